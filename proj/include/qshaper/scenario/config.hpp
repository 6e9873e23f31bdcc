#pragma once
// Scenario configuration: JSON document -> validated Scenario. Every schema
// violation is reported with the JSON-pointer path of the offending key.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qshaper/grid.hpp"
#include "qshaper/shaper.hpp"
#include "qshaper/spectral_field.hpp"
#include "qshaper/units.hpp"

namespace qshaper::scenario {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& message)
      : std::runtime_error((path.empty() ? std::string("/") : path) + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridConfig {
  int n_points = 1025;
  double omega_max = 0.35;  ///< rad/fs
  double center_wavelength_nm = 1064.0;
};

struct NoiseConfig {
  double peak_rate_hz = 20.0;
  double background_rate_hz = 11.0;
  double duration_s = 300.0;
};

struct SlmConfig {
  bool pixelate = false;
  int n_pixels = 640;
  double pixel_width_um = 100.0;
  double gap_um = 3.0;
};

struct ExperimentConfig {
  std::string id;
  std::string path;  ///< e.g. /experiments/2
  int d = 0;
  bool ideal = false;
  std::optional<double> visibility;  ///< noise-model generator
  bool counts = false;
  bool psf = true;
  std::vector<double> centers;  ///< rad/fs
  std::vector<double> widths;
  std::vector<double> t1;  ///< fs
  int modes = 3;
  int export_stride = 8;
  bool convergence_check = false;
  double bandwidth_nm = 105.0;
  double center_nm = 1064.0;
  double power_W = 1e-6;
};

struct Scenario {
  std::uint64_t seed = 1;
  GridConfig grid;
  PumpSpec pump;
  CrystalSpec spdc;
  CrystalSpec sfg;
  double psf_width = 9.6e-3;  ///< rad/fs
  BuildOptions build;
  NoiseConfig noise;
  SlmConfig slm;
  int phase_points = 64;
  std::vector<ExperimentConfig> experiments;

  SpectralGrid make_grid() const {
    return SpectralGrid::symmetric(grid.n_points, grid.omega_max, grid.center_wavelength_nm);
  }
};

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"fig2_amplitude", "fig3_schmidt",  "freq_bin_fringes",
                                            "time_bin_sweep", "schmidt_fringes", "bell_i2_sweep",
                                            "procrustean",    "flux_check"};
  return ids;
}

namespace detail {

inline std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }

inline const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  return j;
}

inline void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw SchemaError(child(path, it.key()), "unknown key");
}

struct Range {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;
};

inline Range positive() { return {0.0, std::numeric_limits<double>::infinity(), true}; }
inline Range non_negative() { return {0.0, std::numeric_limits<double>::infinity(), false}; }

inline double as_number(const json& v, const std::string& path, Range range) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw SchemaError(path, "must be finite");
  if (range.lo_open ? !(x > range.lo) : !(x >= range.lo))
    throw SchemaError(path, std::string("must be ") + (range.lo_open ? "> " : ">= ") + std::to_string(range.lo));
  if (!(x <= range.hi)) throw SchemaError(path, "must be <= " + std::to_string(range.hi));
  return x;
}

inline double number(const json& obj, const std::string& path, const char* key, std::optional<double> fallback,
                     Range range = {}) {
  if (!obj.contains(key)) {
    if (!fallback) throw SchemaError(child(path, key), "required key missing");
    return *fallback;
  }
  return as_number(obj.at(key), child(path, key), range);
}

inline int integer(const json& obj, const std::string& path, const char* key, std::optional<int> fallback,
                   int lo = std::numeric_limits<int>::min(), int hi = std::numeric_limits<int>::max()) {
  if (!obj.contains(key)) {
    if (!fallback) throw SchemaError(child(path, key), "required key missing");
    return *fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw SchemaError(child(path, key), "expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < lo || x > hi)
    throw SchemaError(child(path, key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(x);
}

inline bool boolean(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw SchemaError(child(path, key), "expected true or false");
  return obj.at(key).get<bool>();
}

inline std::vector<double> numbers(const json& obj, const std::string& path, const char* key,
                                   std::vector<double> fallback, Range range = {}) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  const std::string p = child(path, key);
  if (!v.is_array()) throw SchemaError(p, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_number(v[k], p + "/" + std::to_string(k), range));
  return out;
}

inline PumpSpec parse_pump(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"linewidth_mhz", "bandwidth_rad_fs", "wavelength_nm"});
  PumpSpec pump;
  pump.wavelength_nm = number(j, path, "wavelength_nm", 532.0, positive());
  const bool has_mhz = j.contains("linewidth_mhz");
  const bool has_rad = j.contains("bandwidth_rad_fs");
  if (has_mhz == has_rad) throw SchemaError(path, "give exactly one of linewidth_mhz, bandwidth_rad_fs");
  pump.bandwidth = has_mhz ? units::angular_bandwidth_from_mhz(number(j, path, "linewidth_mhz", {}, positive()))
                           : number(j, path, "bandwidth_rad_fs", {}, positive());
  return pump;
}

inline DispersionModel parse_dispersion(const json& j, const std::string& path, double poling_period_um,
                                        double pump_center_frequency) {
  require_object(j, path);
  if (!j.contains("model") || !j.at("model").is_string())
    throw SchemaError(child(path, "model"), "expected \"taylor\" or \"sellmeier\"");
  const auto model = j.at("model").get<std::string>();
  if (model == "taylor") {
    check_keys(j, path, {"model", "dk0", "a1", "a2", "a3"});
    TaylorMismatch t = TaylorMismatch::phase_matched(poling_period_um);
    t.dk0 = number(j, path, "dk0", t.dk0);
    t.a1 = number(j, path, "a1", 0.0);
    t.a2 = number(j, path, "a2", 0.0);
    t.a3 = number(j, path, "a3", 0.0);
    return t;
  }
  if (model == "sellmeier") {
    check_keys(j, path, {"model", "A", "B", "C", "D", "min_wavelength_um", "max_wavelength_um"});
    Sellmeier s;
    s.A = number(j, path, "A", {});
    s.B = number(j, path, "B", {});
    s.C = number(j, path, "C", {});
    s.D = number(j, path, "D", 0.0);
    s.min_wavelength_um = number(j, path, "min_wavelength_um", 0.0, non_negative());
    s.max_wavelength_um = number(j, path, "max_wavelength_um", 0.0, non_negative());
    s.pump_center_frequency = pump_center_frequency;
    return s;
  }
  throw SchemaError(child(path, "model"), "unknown dispersion model '" + model + "'");
}

inline CrystalSpec parse_crystal(const json& j, const std::string& path, NonlinearProcess role,
                                 double pump_center_frequency) {
  require_object(j, path);
  check_keys(j, path, {"length_mm", "poling_period_um", "dispersion"});
  CrystalSpec c;
  c.role = role;
  c.length_mm = number(j, path, "length_mm", 11.5, positive());
  c.poling_period_um = number(j, path, "poling_period_um", 9.0, positive());
  if (!j.contains("dispersion")) throw SchemaError(child(path, "dispersion"), "required key missing");
  c.dispersion = parse_dispersion(j.at("dispersion"), child(path, "dispersion"), c.poling_period_um,
                                  pump_center_frequency);
  return c;
}

inline void require_dimension(const ExperimentConfig& e, int lo, int hi) {
  if (e.d < lo || e.d > hi)
    throw SchemaError(child(e.path, "d"), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

inline void check_bins(const ExperimentConfig& e) {
  if (e.centers.empty() != e.widths.empty())
    throw SchemaError(e.path, "centers and widths must be given together");
  if (!e.centers.empty() && static_cast<int>(e.centers.size()) != e.d)
    throw SchemaError(child(e.path, "centers"), "expected d = " + std::to_string(e.d) + " entries");
  if (e.widths.size() != e.centers.size())
    throw SchemaError(child(e.path, "widths"), "expected as many widths as centers");
}

inline ExperimentConfig parse_experiment(const json& j, const std::string& path) {
  require_object(j, path);
  if (!j.contains("id") || !j.at("id").is_string()) throw SchemaError(child(path, "id"), "expected a string");
  ExperimentConfig e;
  e.path = path;
  e.id = j.at("id").get<std::string>();
  const auto& ids = experiment_ids();
  if (std::find(ids.begin(), ids.end(), e.id) == ids.end())
    throw SchemaError(child(path, "id"), "unknown experiment '" + e.id + "'");

  if (e.id == "fig2_amplitude") {
    check_keys(j, path, {"id", "export_stride"});
    e.export_stride = integer(j, path, "export_stride", 8, 1, 1 << 20);
  } else if (e.id == "fig3_schmidt") {
    check_keys(j, path, {"id", "modes", "convergence_check"});
    e.modes = integer(j, path, "modes", 3, 1, 64);
    e.convergence_check = boolean(j, path, "convergence_check", false);
  } else if (e.id == "freq_bin_fringes") {
    check_keys(j, path, {"id", "d", "ideal", "visibility", "counts", "psf", "centers", "widths"});
    e.d = integer(j, path, "d", {});
    require_dimension(e, 2, 4);
    e.ideal = boolean(j, path, "ideal", false);
    if (j.contains("visibility")) e.visibility = number(j, path, "visibility", {}, {0.0, 1.0});
    if (e.visibility && !e.ideal) throw SchemaError(child(path, "visibility"), "requires \"ideal\": true");
    e.counts = boolean(j, path, "counts", false);
    e.psf = boolean(j, path, "psf", true);
    e.centers = numbers(j, path, "centers", {});
    e.widths = numbers(j, path, "widths", {}, positive());
    check_bins(e);
  } else if (e.id == "time_bin_sweep" || e.id == "bell_i2_sweep") {
    check_keys(j, path, {"id", "t1", "psf"});
    std::vector<double> fallback;
    if (e.id == "time_bin_sweep") {
      fallback = {0.0, 10.0, 25.0, 35.0, 50.0};
    } else {
      for (int t = 0; t <= 200; t += 10) fallback.push_back(t);
    }
    e.t1 = numbers(j, path, "t1", fallback, non_negative());
    if (e.t1.empty()) throw SchemaError(child(path, "t1"), "need at least one delay");
    e.psf = boolean(j, path, "psf", e.id == "bell_i2_sweep");
    e.d = 2;
  } else if (e.id == "schmidt_fringes") {
    check_keys(j, path, {"id", "d", "psf"});
    e.d = integer(j, path, "d", {});
    require_dimension(e, 2, 4);
    e.psf = boolean(j, path, "psf", true);
  } else if (e.id == "procrustean") {
    check_keys(j, path, {"id", "d", "psf", "centers", "widths"});
    e.d = integer(j, path, "d", 3);
    require_dimension(e, 2, 4);
    e.psf = boolean(j, path, "psf", true);
    e.centers = numbers(j, path, "centers", {});
    e.widths = numbers(j, path, "widths", {}, positive());
    check_bins(e);
  } else if (e.id == "flux_check") {
    check_keys(j, path, {"id", "bandwidth_nm", "center_nm", "power_W"});
    e.bandwidth_nm = number(j, path, "bandwidth_nm", 105.0, positive());
    e.center_nm = number(j, path, "center_nm", 1064.0, positive());
    e.power_W = number(j, path, "power_W", 1e-6, non_negative());
  }
  return e;
}

}  // namespace detail

inline Scenario parse_scenario(const json& root) {
  using namespace detail;
  const std::string path;
  require_object(root, path);
  check_keys(root, path,
             {"schema_version", "seed", "grid", "pump", "crystals", "psf_width", "build", "noise", "slm",
              "phase_points", "experiments", "description"});
  const int version = integer(root, path, "schema_version", {});
  if (version != schema_version)
    throw SchemaError("/schema_version", "unsupported schema version " + std::to_string(version));

  Scenario s;
  if (root.contains("seed")) {
    const json& v = root.at("seed");
    if (!v.is_number_unsigned()) throw SchemaError("/seed", "expected a non-negative integer");
    s.seed = v.get<std::uint64_t>();
  }

  if (root.contains("grid")) {
    const json& g = require_object(root.at("grid"), "/grid");
    check_keys(g, "/grid", {"n_points", "omega_max", "center_wavelength_nm"});
    s.grid.n_points = integer(g, "/grid", "n_points", 1025, 3, 16385);
    if (s.grid.n_points % 2 == 0) throw SchemaError("/grid/n_points", "must be odd");
    s.grid.omega_max = number(g, "/grid", "omega_max", 0.35, positive());
    s.grid.center_wavelength_nm = number(g, "/grid", "center_wavelength_nm", 1064.0, positive());
  }
  const double pump_center = s.make_grid().pump_center_frequency();

  if (!root.contains("pump")) throw SchemaError("/pump", "required key missing");
  s.pump = parse_pump(root.at("pump"), "/pump");

  if (!root.contains("crystals")) throw SchemaError("/crystals", "required key missing");
  const json& crystals = require_object(root.at("crystals"), "/crystals");
  check_keys(crystals, "/crystals", {"spdc", "sfg"});
  for (const char* key : {"spdc", "sfg"})
    if (!crystals.contains(key)) throw SchemaError(child("/crystals", key), "required key missing");
  s.spdc = parse_crystal(crystals.at("spdc"), "/crystals/spdc", NonlinearProcess::spdc, pump_center);
  s.sfg = parse_crystal(crystals.at("sfg"), "/crystals/sfg", NonlinearProcess::sfg, pump_center);

  s.psf_width = number(root, path, "psf_width", 9.6e-3, non_negative());

  if (root.contains("build")) {
    const json& b = require_object(root.at("build"), "/build");
    check_keys(b, "/build", {"min_pump_cells", "include_phase"});
    s.build.min_pump_cells = number(b, "/build", "min_pump_cells", 3.0, positive());
    s.build.include_phase = boolean(b, "/build", "include_phase", false);
  }
  if (root.contains("noise")) {
    const json& n = require_object(root.at("noise"), "/noise");
    check_keys(n, "/noise", {"peak_rate_hz", "background_rate_hz", "duration_s"});
    s.noise.peak_rate_hz = number(n, "/noise", "peak_rate_hz", 20.0, non_negative());
    s.noise.background_rate_hz = number(n, "/noise", "background_rate_hz", 11.0, non_negative());
    s.noise.duration_s = number(n, "/noise", "duration_s", 300.0, non_negative());
  }
  if (root.contains("slm")) {
    const json& m = require_object(root.at("slm"), "/slm");
    check_keys(m, "/slm", {"pixelate", "n_pixels", "pixel_width_um", "gap_um"});
    s.slm.pixelate = boolean(m, "/slm", "pixelate", false);
    s.slm.n_pixels = integer(m, "/slm", "n_pixels", 640, 1);
    s.slm.pixel_width_um = number(m, "/slm", "pixel_width_um", 100.0, positive());
    s.slm.gap_um = number(m, "/slm", "gap_um", 3.0, non_negative());
  }
  s.phase_points = integer(root, path, "phase_points", 64, 8, 100000);
  if (root.contains("description") && !root.at("description").is_string())
    throw SchemaError("/description", "expected a string");

  if (!root.contains("experiments")) throw SchemaError("/experiments", "required key missing");
  const json& experiments = root.at("experiments");
  if (!experiments.is_array()) throw SchemaError("/experiments", "expected an array");
  for (std::size_t k = 0; k < experiments.size(); ++k)
    s.experiments.push_back(parse_experiment(experiments[k], "/experiments/" + std::to_string(k)));
  return s;
}

inline Scenario load_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config '" + file + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("not valid JSON: ") + e.what());
  }
  return parse_scenario(root);
}

}  // namespace qshaper::scenario
