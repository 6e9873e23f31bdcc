#pragma once
// Named experiments of a scenario. Each one computes its results entirely in
// memory (report tree, CSV artifacts, one-line summary); nothing touches the
// file system here.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "qshaper/bases.hpp"
#include "qshaper/entanglement.hpp"
#include "qshaper/io.hpp"
#include "qshaper/measurement.hpp"
#include "qshaper/scenario/config.hpp"
#include "qshaper/shaper.hpp"
#include "qshaper/spectral_field.hpp"

namespace qshaper::scenario {

struct Artifact {
  int d = 0;
  std::string description;
  std::string content;
  std::string name;  ///< assigned when the run is assembled
};

struct ExperimentResult {
  std::string id;
  int d = 0;
  json report;
  std::vector<Artifact> artifacts;
  std::string summary;
};

/// Amplitudes shared by the experiments of one run, built on first use.
class Context {
 public:
  explicit Context(const Scenario& scenario) : scenario_(scenario), grid_(scenario.make_grid()) {}

  const Scenario& scenario() const { return scenario_; }
  const SpectralGrid& grid() const { return grid_; }

  const JointAmplitude& gamma() {
    std::lock_guard lock(mutex_);
    if (!gamma_)
      gamma_ = build_joint_amplitude(grid_, scenario_.pump, scenario_.spdc, scenario_.sfg, scenario_.build);
    return *gamma_;
  }

  const JointAmplitude& gamma_psf() {
    const JointAmplitude& base = gamma();
    std::lock_guard lock(mutex_);
    if (!gamma_psf_) gamma_psf_ = apply_psf(base, scenario_.psf_width);
    return *gamma_psf_;
  }

  const JointAmplitude& amplitude(bool psf) { return psf ? gamma_psf() : gamma(); }

  /// Transfer function as the shaper would realize it (pixelated if configured).
  TransferFunction realize(const TransferFunction& m) const {
    if (!scenario_.slm.pixelate) return m;
    const auto& c = scenario_.slm;
    return pixelate(m, SlmModel::spanning(grid_, c.n_pixels, c.pixel_width_um, c.gap_um));
  }

 private:
  const Scenario& scenario_;
  SpectralGrid grid_;
  std::mutex mutex_;
  std::optional<JointAmplitude> gamma_;
  std::optional<JointAmplitude> gamma_psf_;
};

// ---------------------------------------------------------------------------
// helpers

inline json to_json(const FitResult& fit) {
  json j;
  j["model"] = to_string(fit.model);
  for (std::size_t k = 0; k < fit.names.size(); ++k) {
    j["parameters"][fit.names[k]] = fit.parameters[static_cast<Eigen::Index>(k)];
    j["uncertainties"][fit.names[k]] = fit.uncertainties[static_cast<Eigen::Index>(k)];
  }
  j["residual_norm"] = fit.residual_norm;
  j["chi2"] = fit.chi2;
  j["weighted"] = fit.weighted;
  j["iterations"] = fit.iterations;
  return j;
}

inline json to_json(const EntanglementReport& r, int spectrum_entries = 16) {
  json j;
  j["entropy_ebits"] = r.entropy;
  j["schmidt_number"] = r.schmidt_number;
  j["effective_dimension"] = r.effective_dimension;
  j["rank"] = r.rank;
  std::vector<double> beta;
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(spectrum_entries, r.weights.size()); ++k)
    beta.push_back(r.weights[k]);
  j["beta_leading"] = beta;
  j["beta_sum"] = r.weights.sum();
  return j;
}

/// FWHM of a sampled non-negative profile, with linear interpolation at the
/// half-maximum crossings.
inline double fwhm(const std::vector<double>& x, const std::vector<double>& y) {
  const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double half = 0.5 * y[peak];
  std::size_t lo = peak, hi = peak;
  while (lo > 0 && y[lo - 1] >= half) --lo;
  while (hi + 1 < y.size() && y[hi + 1] >= half) ++hi;
  auto cross = [&](std::size_t inside, std::size_t outside) {
    const double t = (y[inside] - half) / (y[inside] - y[outside]);
    return x[inside] + t * (x[outside] - x[inside]);
  };
  const double left = lo > 0 ? cross(lo, lo - 1) : x.front();
  const double right = hi + 1 < y.size() ? cross(hi, hi + 1) : x.back();
  return right - left;
}

/// FWHM of the down-conversion intensity sinc² along ω_s = −ω_i, in nm.
inline double spdc_bandwidth_nm(const SpectralGrid& grid, const CrystalSpec& spdc) {
  std::vector<double> x, y;
  for (int k = 0; k < grid.size(); ++k) {
    x.push_back(grid.omega(k));
    y.push_back(std::norm(phase_matching(grid.omega(k), -grid.omega(k), spdc)));
  }
  return units::bandwidth_nm_from_angular(fwhm(x, y), grid.center_wavelength_nm());
}

/// Cross-section of |Γ|² across the ridge, as FWHM in ω_i + ω_s.
inline double ridge_width(const JointAmplitude& amp) {
  const auto& grid = amp.grid();
  std::vector<double> x, y;
  for (int k = 0; k < grid.size(); ++k) {
    x.push_back(2.0 * grid.omega(k));
    y.push_back(std::norm(amp.values()(k, k)));
  }
  return fwhm(x, y);
}

/// d bins of equal width, centered around the origin.
inline void default_bins(int d, double offset, std::vector<double>& centers, std::vector<double>& widths) {
  centers.clear();
  widths.clear();
  for (int j = 0; j < d; ++j) {
    centers.push_back((j - 0.5 * (d - 1)) * 0.05 + offset);
    widths.push_back(0.04);
  }
}

struct BinBases {
  std::shared_ptr<const BasisSet> idler;
  std::shared_ptr<const BasisSet> signal;
};

inline BinBases frequency_bin_pair(const SpectralGrid& grid, const std::vector<double>& centers,
                                   const std::vector<double>& widths) {
  auto idler = std::make_shared<const BasisSet>(frequency_bins(centers, widths, grid));
  auto signal = std::make_shared<const BasisSet>(mirrored(*idler));
  return {idler, signal};
}

/// Full-field scan along the phase ladder u_j = a_j e^{ijφ}, SLM at its fixed
/// per-basis scale.
inline FringeScan ladder_scan(Context& ctx, const JointAmplitude& amp, const BinBases& bases,
                              const std::vector<double>& phi, const std::vector<double>& amplitudes) {
  const int d = bases.idler->dimension();
  const double scale_i = safe_scale(*bases.idler);
  const double scale_s = safe_scale(*bases.signal);
  auto setting = [&](double p) {
    std::vector<double> phases(d);
    for (int j = 0; j < d; ++j) phases[j] = j * p;
    return TransferPair{
        ctx.realize(transfer_from_coefficients({bases.idler, amplitudes, phases, Side::idler, scale_i})),
        ctx.realize(transfer_from_coefficients({bases.signal, amplitudes, phases, Side::signal, scale_s}))};
  };
  FringeScan scan = fringe_scan(amp, setting, phi, d, bases.idler->kind);
  scan.truncation = project_state(amp, *bases.idler, *bases.signal).truncation();
  return scan;
}

inline double single_projection(Context& ctx, const JointAmplitude& amp, const BinBases& bases, int k,
                                double amplitude) {
  const int d = bases.idler->dimension();
  std::vector<double> a(d, 0.0);
  a[k] = amplitude;
  const std::vector<double> phases(d, 0.0);
  const auto m_i = ctx.realize(
      transfer_from_coefficients({bases.idler, a, phases, Side::idler, safe_scale(*bases.idler)}));
  const auto m_s = ctx.realize(
      transfer_from_coefficients({bases.signal, a, phases, Side::signal, safe_scale(*bases.signal)}));
  return coincidence_signal(amp, m_i, m_s);
}

/// Time-bin qubit {0, t₁} with Δt → 0 on both photons. At t₁ = 0 the two bins
/// coincide and the equivalent interferometer T = R = 1/2 is used.
inline FringeScan time_bin_scan(Context& ctx, const JointAmplitude& amp, double t1, const std::vector<double>& phi) {
  if (t1 == 0.0) {
    auto setting = [&](double p) {
      const auto m = ctx.realize(franson_transfer(0.5, 0.5, 0.0, p, ctx.grid()));
      return TransferPair{m, m};
    };
    return fringe_scan(amp, setting, phi, 2, BasisKind::time_bin);
  }
  auto basis = std::make_shared<const BasisSet>(time_bins({0.0, t1}, {0.0, 0.0}, ctx.grid()));
  return ladder_scan(ctx, amp, {basis, basis}, phi, {1.0, 1.0});
}

struct TimeBinPoint {
  double t1 = 0.0;
  FringeScan scan;
  FitResult gamma;
  FitResult cos4;
  double i2 = 0.0;
};

inline TimeBinPoint time_bin_point(Context& ctx, const JointAmplitude& amp, double t1) {
  const auto phi = phase_grid(ctx.scenario().phase_points, units::two_pi);
  TimeBinPoint point;
  point.t1 = t1;
  point.scan = time_bin_scan(ctx, amp, t1, phi);
  point.gamma = fit_gamma(point.scan);
  point.cos4 = fit_cos4(point.scan);
  point.i2 = bell_I2(point.gamma.parameter("gamma1"), point.gamma.parameter("gamma2")).value;
  return point;
}

inline std::string verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

inline std::string fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
  return buffer;
}

inline std::string scientific(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*e", digits, value);
  return buffer;
}

// ---------------------------------------------------------------------------
// experiments

inline ExperimentResult run_fig2_amplitude(Context& ctx, const ExperimentConfig& e) {
  const auto& plain = ctx.gamma();
  const auto& blurred = ctx.gamma_psf();
  ExperimentResult r{e.id, 0, {}, {}, {}};
  r.report["spdc_bandwidth_nm"] = spdc_bandwidth_nm(ctx.grid(), ctx.scenario().spdc);
  r.report["pump_clamped"] = plain.metadata().pump_clamped;
  r.report["effective_pump_bandwidth"] = plain.metadata().effective_pump_bandwidth;
  r.report["psf_width"] = blurred.metadata().psf_width;
  r.report["psf_subresolution"] = blurred.metadata().psf_subresolution;
  r.report["ridge_width_gamma"] = ridge_width(plain);
  r.report["ridge_width_gamma_psf"] = ridge_width(blurred);
  r.report["symmetry_defect"] = blurred.symmetry_defect();
  r.report["norm"] = blurred.norm();
  r.report["export_stride"] = e.export_stride;
  r.artifacts.push_back({0, "Gamma (omega_i, omega_s, re, im)", io::amplitude_csv(plain, e.export_stride), {}});
  r.artifacts.push_back({0, "GammaPSF (omega_i, omega_s, re, im)", io::amplitude_csv(blurred, e.export_stride), {}});
  r.summary = "ridge width " + scientific(r.report["ridge_width_gamma"].get<double>(), 2) + " -> " +
              scientific(r.report["ridge_width_gamma_psf"].get<double>(), 2) + " rad/fs with PSF";
  return r;
}

inline ExperimentResult run_fig3_schmidt(Context& ctx, const ExperimentConfig& e) {
  const auto& amp = ctx.gamma_psf();
  const auto analysis = schmidt_decompose(amp, e.modes);
  ExperimentResult r{e.id, 0, to_json(analysis.report), {}, {}};

  io::CsvWriter beta({"index", "beta"});
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(64, analysis.report.weights.size()); ++k)
    beta.row(k, analysis.report.weights[k]);
  r.artifacts.push_back({0, "Schmidt weights", beta.str(), {}});

  BasisSet modes = schmidt_modes(amp, e.modes, Side::idler);
  r.artifacts.push_back({e.modes, "leading Schmidt modes", io::basis_csv(modes), {}});
  std::vector<int> sign_changes;
  for (int j = 0; j < e.modes; ++j) {
    // count zero crossings of the real part inside the support
    const Eigen::VectorXd f = modes.functions.col(j).real();
    const double threshold = 1e-3 * f.cwiseAbs().maxCoeff();
    int changes = 0;
    double last = 0.0;
    for (Eigen::Index k = 0; k < f.size(); ++k) {
      if (std::abs(f[k]) < threshold) continue;
      if (last != 0.0 && (f[k] > 0) != (last > 0)) ++changes;
      last = f[k];
    }
    sign_changes.push_back(changes);
  }
  r.report["mode_sign_changes"] = sign_changes;

  if (e.convergence_check) {
    Scenario fine = ctx.scenario();
    fine.grid.n_points = 2 * fine.grid.n_points - 1;
    const auto g = fine.make_grid();
    const auto fine_amp = apply_psf(build_joint_amplitude(g, fine.pump, fine.spdc, fine.sfg, fine.build), fine.psf_width);
    const auto fine_report = schmidt_decompose(fine_amp).report;
    r.report["convergence"]["n_points"] = fine.grid.n_points;
    r.report["convergence"]["entropy_ebits"] = fine_report.entropy;
    r.report["convergence"]["schmidt_number"] = fine_report.schmidt_number;
    r.report["convergence"]["entropy_change"] =
        std::abs(fine_report.entropy - analysis.report.entropy) / analysis.report.entropy;
    r.report["convergence"]["schmidt_number_change"] =
        std::abs(fine_report.schmidt_number - analysis.report.schmidt_number) / analysis.report.schmidt_number;
  }
  r.summary = "E=" + fixed(analysis.report.entropy, 3) + " ebits K=" + fixed(analysis.report.schmidt_number, 3) +
              " d_eff=" + fixed(analysis.report.effective_dimension, 2);
  return r;
}

inline std::string fringe_verdict(const FitResult& fit, int d, json& report) {
  const auto t = cglmp_thresholds(d);
  const double v = fit.visibility();
  report["visibility"] = v;
  report["critical_visibility"] = t.critical_visibility;
  report["critical_lambda"] = t.critical_lambda;
  report["entangled"] = v > t.critical_visibility;
  return "lambda=" + fixed(fit.lambda(), 6) + " V=" + fixed(v, 4) + " Vc=" + fixed(t.critical_visibility, 3) + " " +
         verdict(v > t.critical_visibility);
}

inline ExperimentResult run_freq_bin_fringes(Context& ctx, const ExperimentConfig& e, std::uint64_t seed) {
  const int d = e.d;
  const auto phi = phase_grid(ctx.scenario().phase_points);
  ExperimentResult r{e.id, d, {}, {}, {}};
  FringeScan primary;

  if (e.ideal) {
    if (e.visibility) {
      const double lambda = lambda_from_visibility(*e.visibility, d);
      primary = FringeScan{phi, {}, ScanRoute::state_space, d, BasisKind::frequency_bin, 0.0, 0.0};
      for (double p : phi) primary.signal.push_back(lambda_fringe(p, d, 1.0, lambda, 0.0));
      qshaper::detail::normalize_scan(primary);
      r.report["generator_visibility"] = *e.visibility;
      r.report["generator_lambda"] = lambda;
    } else {
      primary = fringe_scan(QuditState::maximally_entangled(d), phi);
    }
    r.artifacts.push_back({d, "state-space fringe", io::fringe_csv(primary), {}});
  } else {
    std::vector<double> centers = e.centers, widths = e.widths;
    if (centers.empty()) default_bins(d, 0.0, centers, widths);
    const auto& amp = ctx.amplitude(e.psf);
    const auto bases = frequency_bin_pair(ctx.grid(), centers, widths);
    const QuditState state = project_state(amp, *bases.idler, *bases.signal);
    const FringeScan space = fringe_scan(state, phi);
    primary = ladder_scan(ctx, amp, bases, phi, std::vector<double>(d, 1.0));
    double deviation = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k)
      deviation = std::max(deviation, std::abs(primary.signal[k] - space.signal[k]) / space.signal[k]);
    r.report["centers"] = centers;
    r.report["widths"] = widths;
    r.report["truncation"] = state.truncation();
    r.report["route_max_relative_deviation"] = deviation;
    r.report["state_space_fit"] = to_json(fit_fringe(space, d));
    r.artifacts.push_back({d, "state-space fringe", io::fringe_csv(space), {}});
    r.artifacts.push_back({d, "full-field fringe", io::fringe_csv(primary), {}});
  }

  const FitResult fit = fit_fringe(primary, d);
  r.report["fit"] = to_json(fit);
  r.summary = fringe_verdict(fit, d, r.report);

  if (e.counts) {
    const auto& noise = ctx.scenario().noise;
    const CountRecord record =
        synthesize_counts(primary, noise.peak_rate_hz, noise.background_rate_hz, noise.duration_s, seed);
    const FitResult count_fit = fit_fringe(record, d);
    r.report["counts_fit"] = to_json(count_fit);
    r.report["counts_seed"] = seed;
    json counts_verdict;
    r.summary += "; counts: " + fringe_verdict(count_fit, d, counts_verdict);
    r.report["counts_verdict"] = counts_verdict;
    r.artifacts.push_back({d, "Poisson count record", io::counts_csv(record), {}});
  }
  return r;
}

inline json to_json(const TimeBinPoint& p) {
  json j;
  j["t1_fs"] = p.t1;
  j["gamma_fit"] = to_json(p.gamma);
  j["cos4_residual"] = p.cos4.residual_norm;
  j["I2"] = p.i2;
  j["I2_violates"] = p.i2 > 2.0;
  return j;
}

inline ExperimentResult run_time_bin_sweep(Context& ctx, const ExperimentConfig& e) {
  const auto& amp = ctx.amplitude(e.psf);
  ExperimentResult r{e.id, 2, {}, {}, {}};
  r.report["psf"] = e.psf;
  io::CsvWriter table({"t1_fs", "gamma1", "gamma2", "phi0", "cos4_residual", "I2"});
  std::vector<double> gamma1;
  for (double t1 : e.t1) {
    const TimeBinPoint p = time_bin_point(ctx, amp, t1);
    r.report["points"].push_back(to_json(p));
    r.artifacts.push_back({2, "time-bin fringe t1=" + fixed(t1, 1) + " fs", io::fringe_csv(p.scan), {}});
    table.row(t1, p.gamma.parameter("gamma1"), p.gamma.parameter("gamma2"), p.gamma.parameter("phi0"),
              p.cos4.residual_norm, p.i2);
    gamma1.push_back(p.gamma.parameter("gamma1"));
  }
  r.artifacts.insert(r.artifacts.begin(), {2, "gamma fits per delay", table.str(), {}});
  bool monotone = true;
  for (std::size_t k = 1; k < gamma1.size(); ++k) monotone = monotone && gamma1[k] < gamma1[k - 1];
  r.report["gamma1_decreasing"] = monotone;
  r.summary = "gamma1 " + fixed(gamma1.front(), 3) + " -> " + fixed(gamma1.back(), 3) + " (" +
              (monotone ? "decreasing" : "not monotone") + ")";
  return r;
}

inline ExperimentResult run_schmidt_fringes(Context& ctx, const ExperimentConfig& e) {
  const int d = e.d;
  const auto& amp = ctx.amplitude(e.psf);
  const auto pair = schmidt_mode_pair(amp, d);
  const BinBases bases{std::make_shared<const BasisSet>(pair.idler), std::make_shared<const BasisSet>(pair.signal)};
  const auto phi = phase_grid(ctx.scenario().phase_points);
  const QuditState state = project_state(amp, *bases.idler, *bases.signal);
  const FringeScan space = fringe_scan(state, phi);
  const FringeScan field = ladder_scan(ctx, amp, bases, phi, std::vector<double>(d, 1.0));

  std::vector<double> beta(pair.idler.weights.begin(), pair.idler.weights.end());
  const auto u = procrustean_amplitudes(beta);
  const FringeScan equalized = ladder_scan(ctx, amp, bases, phi, u);

  ExperimentResult r{e.id, d, {}, {}, {}};
  r.report["beta"] = beta;
  r.report["truncation"] = state.truncation();
  r.report["state_space_fit"] = to_json(fit_fringe(space, d));
  const FitResult fit = fit_fringe(field, d);
  r.report["fit"] = to_json(fit);
  const FitResult eq_fit = fit_fringe(equalized, d);
  r.report["procrustean_amplitudes"] = u;
  r.report["procrustean_fit"] = to_json(eq_fit);
  r.artifacts.push_back({d, "state-space fringe", io::fringe_csv(space), {}});
  r.artifacts.push_back({d, "full-field fringe", io::fringe_csv(field), {}});
  r.artifacts.push_back({d, "full-field fringe after Procrustean filtering", io::fringe_csv(equalized), {}});
  r.summary = fringe_verdict(fit, d, r.report) + "; filtered lambda=" + fixed(eq_fit.lambda(), 4);
  return r;
}

inline ExperimentResult run_bell_i2_sweep(Context& ctx, const ExperimentConfig& e) {
  ExperimentResult r{e.id, 2, {}, {}, {}};
  io::CsvWriter table({"t1_fs", "gamma1", "gamma2", "I2", "gamma1_psf", "gamma2_psf", "I2_psf"});
  const auto& plain = ctx.gamma();
  const JointAmplitude* blurred = e.psf ? &ctx.gamma_psf() : nullptr;
  std::vector<double> violating;
  for (double t1 : e.t1) {
    const TimeBinPoint p = time_bin_point(ctx, plain, t1);
    json row;
    row["t1_fs"] = t1;
    row["gamma1"] = p.gamma.parameter("gamma1");
    row["gamma2"] = p.gamma.parameter("gamma2");
    row["I2"] = p.i2;
    if (blurred) {
      const TimeBinPoint q = time_bin_point(ctx, *blurred, t1);
      row["gamma1_psf"] = q.gamma.parameter("gamma1");
      row["gamma2_psf"] = q.gamma.parameter("gamma2");
      row["I2_psf"] = q.i2;
      table.row(t1, p.gamma.parameter("gamma1"), p.gamma.parameter("gamma2"), p.i2, q.gamma.parameter("gamma1"),
                q.gamma.parameter("gamma2"), q.i2);
      if (q.i2 > 2.0) violating.push_back(t1);
    } else {
      table.row(t1, p.gamma.parameter("gamma1"), p.gamma.parameter("gamma2"), p.i2, 0.0, 0.0, 0.0);
    }
    r.report["points"].push_back(row);
  }
  r.report["settings"]["idler"] = BellSettings{}.idler;
  r.report["settings"]["signal"] = BellSettings{}.signal;
  r.artifacts.push_back({2, "I2 versus t1", table.str(), {}});
  if (blurred) {
    r.report["psf_violation_t1"] = violating;
    r.summary = violating.empty() ? "no I2 > 2 with PSF"
                                  : "I2 > 2 with PSF for t1 in [" + fixed(violating.front(), 0) + ", " +
                                        fixed(violating.back(), 0) + "] fs";
  } else {
    r.summary = "PSF-free sweep of " + std::to_string(e.t1.size()) + " delays";
  }
  return r;
}

inline ExperimentResult run_procrustean(Context& ctx, const ExperimentConfig& e) {
  const int d = e.d;
  std::vector<double> centers = e.centers, widths = e.widths;
  if (centers.empty()) default_bins(d, 0.02, centers, widths);
  const auto& amp = ctx.amplitude(e.psf);
  const auto bases = frequency_bin_pair(ctx.grid(), centers, widths);
  const auto phi = phase_grid(ctx.scenario().phase_points);

  std::vector<double> before, after;
  for (int k = 0; k < d; ++k) before.push_back(single_projection(ctx, amp, bases, k, 1.0));
  const auto u = procrustean_amplitudes(before);
  for (int k = 0; k < d; ++k) after.push_back(single_projection(ctx, amp, bases, k, u[k]));
  const auto [lo, hi] = std::minmax_element(after.begin(), after.end());
  const double spread = (*hi - *lo) / *hi;

  const FringeScan raw = ladder_scan(ctx, amp, bases, phi, std::vector<double>(d, 1.0));
  const FringeScan filtered = ladder_scan(ctx, amp, bases, phi, u);
  const FitResult raw_fit = fit_fringe(raw, d);
  const FitResult fit = fit_fringe(filtered, d);

  ExperimentResult r{e.id, d, {}, {}, {}};
  r.report["centers"] = centers;
  r.report["widths"] = widths;
  r.report["single_projection_signals"] = before;
  r.report["amplitudes"] = u;
  r.report["filtered_signals"] = after;
  r.report["filtered_spread"] = spread;
  r.report["raw_fit"] = to_json(raw_fit);
  r.report["fit"] = to_json(fit);
  r.report["truncation"] = raw.truncation;
  io::CsvWriter table({"level", "S_k", "amplitude", "S_k_filtered"});
  for (int k = 0; k < d; ++k) table.row(k, before[k], u[k], after[k]);
  r.artifacts.push_back({d, "single projection signals", table.str(), {}});
  r.artifacts.push_back({d, "fringe before filtering", io::fringe_csv(raw), {}});
  r.artifacts.push_back({d, "fringe after filtering", io::fringe_csv(filtered), {}});
  r.summary = "spread " + scientific(spread, 2) + ", lambda " + fixed(raw_fit.lambda(), 4) + " -> " +
              fixed(fit.lambda(), 4) + "; " + fringe_verdict(fit, d, r.report);
  return r;
}

inline ExperimentResult run_flux_check(const ExperimentConfig& e) {
  const FluxLimit limit = photon_flux_limit(e.bandwidth_nm, e.center_nm);
  ExperimentResult r{e.id, 0, {}, {}, {}};
  r.report["bandwidth_nm"] = e.bandwidth_nm;
  r.report["center_nm"] = e.center_nm;
  r.report["flux_per_s"] = limit.flux_per_s;
  r.report["power_W"] = limit.power_W;
  r.report["pair_power_W"] = e.power_W;
  r.report["mode_density"] = spectral_mode_density(e.power_W, limit);
  io::CsvWriter table({"bandwidth_nm", "center_nm", "flux_per_s", "power_W", "mode_density"});
  table.row(e.bandwidth_nm, e.center_nm, limit.flux_per_s, limit.power_W, spectral_mode_density(e.power_W, limit));
  r.artifacts.push_back({0, "single-photon-limit flux", table.str(), {}});
  r.summary = "flux " + scientific(limit.flux_per_s, 2) + " /s, power " + fixed(limit.power_W * 1e6, 2) +
              " uW, n=" + fixed(spectral_mode_density(e.power_W, limit), 3);
  return r;
}

/// Independent stream per experiment derived from the scenario seed.
inline std::uint64_t experiment_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

inline ExperimentResult run_experiment(Context& ctx, const ExperimentConfig& e, std::size_t index) {
  const std::uint64_t seed = experiment_seed(ctx.scenario().seed, index);
  if (e.id == "fig2_amplitude") return run_fig2_amplitude(ctx, e);
  if (e.id == "fig3_schmidt") return run_fig3_schmidt(ctx, e);
  if (e.id == "freq_bin_fringes") return run_freq_bin_fringes(ctx, e, seed);
  if (e.id == "time_bin_sweep") return run_time_bin_sweep(ctx, e);
  if (e.id == "schmidt_fringes") return run_schmidt_fringes(ctx, e);
  if (e.id == "bell_i2_sweep") return run_bell_i2_sweep(ctx, e);
  if (e.id == "procrustean") return run_procrustean(ctx, e);
  if (e.id == "flux_check") return run_flux_check(e);
  throw SchemaError(e.path + "/id", "unknown experiment '" + e.id + "'");
}

/// Runs every experiment; results come back in config order either way.
inline std::vector<ExperimentResult> run_scenario(const Scenario& scenario, bool parallel = false) {
  Context ctx(scenario);
  std::vector<ExperimentResult> results;
  if (!parallel) {
    for (std::size_t k = 0; k < scenario.experiments.size(); ++k)
      results.push_back(run_experiment(ctx, scenario.experiments[k], k));
    return results;
  }
  std::vector<std::future<ExperimentResult>> jobs;
  for (std::size_t k = 0; k < scenario.experiments.size(); ++k)
    jobs.push_back(std::async(std::launch::async,
                              [&ctx, &scenario, k] { return run_experiment(ctx, scenario.experiments[k], k); }));
  for (auto& job : jobs) results.push_back(job.get());
  return results;
}

}  // namespace qshaper::scenario
