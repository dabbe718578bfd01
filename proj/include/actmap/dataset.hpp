#pragma once

// IQA database manifests: one row per distorted image, paths relative to the
// manifest's directory.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "actmap/csv.hpp"
#include "actmap/error.hpp"

namespace actmap {

inline constexpr const char* kManifestHeader =
    "pair_id,reference_id,reference_path,distorted_path,mos,distortion_type,distortion_level";

struct ManifestRow {
  std::string pair_id;
  std::string reference_id;
  std::string reference_path;
  std::string distorted_path;
  double mos = 0.0;
  std::string distortion_type;
  std::optional<int> distortion_level;

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

struct DatasetManifest {
  /// Directory that relative image paths resolve against.
  std::filesystem::path base_dir;
  std::vector<ManifestRow> rows;

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }

  std::vector<std::string> reference_ids() const {
    std::set<std::string> ids;
    for (const auto& r : rows) ids.insert(r.reference_id);
    return {ids.begin(), ids.end()};
  }

  /// Row indices grouped by reference id.
  std::map<std::string, std::vector<std::size_t>> by_reference() const {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < rows.size(); ++i) groups[rows[i].reference_id].push_back(i);
    return groups;
  }
};

inline double parse_real(const std::string& s, const std::string& context) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) fail(ErrorKind::CorruptFile, context + ": '" + s + "' is not a number");
  return v;
}

inline std::optional<int> parse_level(const std::string& s, const std::string& context) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) fail(ErrorKind::CorruptFile, context + ": '" + s + "' is not an integer");
  return v;
}

inline void validate_manifest(const DatasetManifest& manifest, bool verify_files) {
  std::set<std::string> pair_ids;
  std::map<std::string, std::string> reference_paths;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    const auto& r = manifest.rows[i];
    const std::string where = "manifest row " + std::to_string(i + 1) + " (pair '" + r.pair_id + "')";
    if (r.pair_id.empty()) fail(ErrorKind::CorruptFile, where + ": empty pair_id");
    if (!pair_ids.insert(r.pair_id).second) fail(ErrorKind::DuplicatePairId, where + ": duplicate pair_id");
    if (r.reference_id.empty()) fail(ErrorKind::CorruptFile, where + ": empty reference_id");
    if (!std::isfinite(r.mos)) fail(ErrorKind::CorruptFile, where + ": mos is not finite");
    const auto [it, inserted] = reference_paths.try_emplace(r.reference_id, r.reference_path);
    if (!inserted && it->second != r.reference_path) {
      fail(ErrorKind::CorruptFile, where + ": reference_id '" + r.reference_id + "' maps to two reference paths");
    }
    if (verify_files) {
      for (const auto* p : {&r.reference_path, &r.distorted_path}) {
        if (!std::filesystem::exists(manifest.resolve(*p))) {
          fail(ErrorKind::MissingImageFile, where + ": missing image " + manifest.resolve(*p).string());
        }
      }
    }
  }
}

/// Reads and validates a manifest CSV. With `verify_files`, every referenced
/// image must exist.
inline DatasetManifest load_manifest(const std::filesystem::path& path, bool verify_files = true) {
  const auto table = csv::read(path);
  static const char* const kColumns[] = {"pair_id",        "reference_id", "reference_path",  "distorted_path",
                                         "mos",            "distortion_type", "distortion_level"};
  long col[7];
  for (int k = 0; k < 7; ++k) {
    col[k] = table.column(kColumns[k]);
    if (col[k] < 0) fail(ErrorKind::MissingColumn, path.string() + ": missing column '" + kColumns[k] + "'");
  }
  DatasetManifest manifest;
  manifest.base_dir = path.parent_path();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const std::string where = path.filename().string() + " row " + std::to_string(i + 1);
    if (f.size() != table.header.size()) fail(ErrorKind::CorruptFile, where + ": wrong number of fields");
    ManifestRow r;
    r.pair_id = f[col[0]];
    r.reference_id = f[col[1]];
    r.reference_path = f[col[2]];
    r.distorted_path = f[col[3]];
    r.mos = parse_real(f[col[4]], where);
    r.distortion_type = f[col[5]];
    r.distortion_level = parse_level(f[col[6]], where);
    manifest.rows.push_back(std::move(r));
  }
  validate_manifest(manifest, verify_files);
  return manifest;
}

inline void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  csv::write_atomically(path, [&](std::ostream& out) {
    out << kManifestHeader << '\n';
    for (const auto& r : manifest.rows) {
      out << csv::join({r.pair_id, r.reference_id, r.reference_path, r.distorted_path, csv::format_real(r.mos),
                        r.distortion_type, r.distortion_level ? std::to_string(*r.distortion_level) : ""})
          << '\n';
    }
  });
}

enum class MosNormalization { None, MinMaxPerDb };

inline MosNormalization parse_mos_normalization(const std::string& s) {
  if (s == "none") return MosNormalization::None;
  if (s == "minmax" || s == "minmax_per_db") return MosNormalization::MinMaxPerDb;
  fail(ErrorKind::Validation, "unknown mos normalization '" + s + "' (expected none|minmax)");
}

/// Maps scores linearly onto [0, 1] (min -> 0, max -> 1) when enabled.
inline DatasetManifest normalize_mos(DatasetManifest manifest, MosNormalization mode) {
  if (mode == MosNormalization::None || manifest.rows.empty()) return manifest;
  const auto [lo, hi] = std::minmax_element(manifest.rows.begin(), manifest.rows.end(),
                                            [](const auto& a, const auto& b) { return a.mos < b.mos; });
  const double min = lo->mos;
  const double span = hi->mos - min;
  if (!(span > 0.0)) fail(ErrorKind::DegenerateInput, "min-max normalization needs two distinct mos values");
  for (auto& r : manifest.rows) r.mos = (r.mos - min) / span;
  return manifest;
}

}  // namespace actmap
