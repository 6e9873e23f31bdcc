#pragma once
// Artifact naming, report assembly and atomic-ish output: every file is
// rendered in memory first, existing targets are refused without --force,
// then files are written under temporary names and renamed into place.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "qshaper/scenario/config.hpp"
#include "qshaper/scenario/experiments.hpp"

namespace qshaper::scenario {

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < length; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 15];
  }
  return out;
}

struct OutputFile {
  std::string name;
  std::string content;
};

/// Names artifacts <experiment>_<d>_<index>.csv, the index counting per
/// (experiment, d) across the whole run, and renders report.json.
inline std::vector<OutputFile> assemble_outputs(std::vector<ExperimentResult>& results, std::uint64_t seed) {
  std::vector<OutputFile> files;
  if (results.empty()) return files;
  std::map<std::pair<std::string, int>, int> counters;
  json report;
  report["schema_version"] = schema_version;
  report["seed"] = seed;
  for (auto& r : results) {
    json entry;
    entry["id"] = r.id;
    entry["d"] = r.d;
    entry["summary"] = r.summary;
    entry["results"] = r.report;
    for (auto& a : r.artifacts) {
      const int index = counters[{r.id, a.d}]++;
      a.name = r.id + "_" + std::to_string(a.d) + "_" + std::to_string(index) + ".csv";
      entry["artifacts"].push_back({{"file", a.name}, {"description", a.description}});
      files.push_back({a.name, a.content});
    }
    report["experiments"].push_back(entry);
  }
  files.push_back({"report.json", report.dump(2) + "\n"});
  return files;
}

inline json manifest_for(const std::vector<OutputFile>& files) {
  json manifest;
  manifest["schema_version"] = schema_version;
  manifest["entries"] = json::array();
  for (const auto& f : files)
    manifest["entries"].push_back({{"file", f.name}, {"bytes", f.content.size()}, {"sha256", sha256_hex(f.content)}});
  return manifest;
}

/// Writes the files plus manifest.json into `directory`; returns the manifest.
inline json emit_outputs(const std::vector<OutputFile>& files, const std::filesystem::path& directory, bool force) {
  namespace fs = std::filesystem;
  const json manifest = manifest_for(files);
  std::vector<OutputFile> all = files;
  all.push_back({"manifest.json", manifest.dump(2) + "\n"});

  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw IoError(directory.string() + ": cannot create directory: " + ec.message());
  if (!force)
    for (const auto& f : all)
      if (fs::exists(directory / f.name))
        throw IoError((directory / f.name).string() + ": exists (use --force to overwrite)");

  std::vector<fs::path> staged;
  auto discard = [&] {
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& f : all) {
    const fs::path tmp = directory / (f.name + ".tmp");
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    staged.push_back(tmp);
    if (!out || !out.write(f.content.data(), static_cast<std::streamsize>(f.content.size())) || !out.flush()) {
      discard();
      throw IoError(tmp.string() + ": write failed");
    }
  }
  for (std::size_t k = 0; k < all.size(); ++k) {
    fs::rename(staged[k], directory / all[k].name, ec);
    if (ec) {
      discard();
      throw IoError((directory / all[k].name).string() + ": " + ec.message());
    }
  }
  return manifest;
}

}  // namespace qshaper::scenario
