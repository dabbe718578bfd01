#pragma once

// Layer-wise activation-map similarity features and the on-disk feature cache.

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "actmap/archive.hpp"
#include "actmap/csv.hpp"
#include "actmap/dataset.hpp"
#include "actmap/evaluation.hpp"
#include "actmap/error.hpp"
#include "actmap/metrics.hpp"
#include "actmap/tensor.hpp"

namespace actmap {

struct FeatureVector {
  std::vector<double> values;
  /// Index of each layer's first element.
  std::vector<std::size_t> layer_offsets;
  MetricId metric = MetricId::HaarPSI;
};

/// One value per channel: the metric between matching reference and
/// distorted activation maps, with a pairwise-adaptive dynamic range.
inline std::vector<double> layer_features(const Tensor& ref_act, const Tensor& dist_act, MetricId metric) {
  if (!ref_act.same_shape(dist_act)) fail(ErrorKind::ShapeMismatch, "activation tensors differ in shape");
  std::vector<double> out(ref_act.depth());
  for (std::size_t c = 0; c < ref_act.depth(); ++c) {
    const MapView a(ref_act.channel(c), ref_act.width(), ref_act.height());
    const MapView b(dist_act.channel(c), dist_act.width(), dist_act.height());
    out[c] = compare(metric, a, b, activation_range(a, b));
  }
  return out;
}

/// Concatenates layer-wise features of already computed activations.
inline FeatureVector features_from_activations(const std::vector<Tensor>& ref_taps,
                                               const std::vector<Tensor>& dist_taps, MetricId metric) {
  if (ref_taps.size() != dist_taps.size()) fail(ErrorKind::ShapeMismatch, "tap counts differ");
  FeatureVector fv;
  fv.metric = metric;
  for (std::size_t l = 0; l < ref_taps.size(); ++l) {
    fv.layer_offsets.push_back(fv.values.size());
    const auto layer = layer_features(ref_taps[l], dist_taps[l], metric);
    fv.values.insert(fv.values.end(), layer.begin(), layer.end());
  }
  for (double v : fv.values) {
    if (!std::isfinite(v)) fail(ErrorKind::DegenerateInput, "non-finite feature value");
  }
  return fv;
}

inline FeatureVector extract_pair(const NetworkDescriptor& net, const Tensor& ref_img, const Tensor& dist_img,
                                  MetricId metric) {
  if (ref_img.width() != dist_img.width() || ref_img.height() != dist_img.height()) {
    fail(ErrorKind::ResolutionMismatch, "reference is " + std::to_string(ref_img.width()) + "x" +
                                            std::to_string(ref_img.height()) + ", distorted is " +
                                            std::to_string(dist_img.width()) + "x" +
                                            std::to_string(dist_img.height()));
  }
  return features_from_activations(run_network(net, ref_img), run_network(net, dist_img), metric);
}

/// One cached row: pair metadata plus its feature vector.
struct FeatureRow {
  std::string pair_id;
  double mos = 0.0;
  std::string distortion_type;
  std::optional<int> distortion_level;
  std::string reference_id;
  std::vector<double> values;
};

struct FeatureTable {
  std::vector<FeatureRow> rows;

  std::size_t dimension() const { return rows.empty() ? 0 : rows.front().values.size(); }

  Eigen::MatrixXd matrix(const std::vector<std::size_t>& idx) const {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(dimension()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto& v = rows[idx[r]].values;
      for (std::size_t c = 0; c < v.size(); ++c) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[c];
    }
    return x;
  }

  Eigen::VectorXd targets(const std::vector<std::size_t>& idx) const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) y(static_cast<Eigen::Index>(r)) = rows[idx[r]].mos;
    return y;
  }

  std::vector<std::size_t> all() const {
    std::vector<std::size_t> idx(rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return idx;
  }

  std::vector<std::string> reference_ids() const {
    std::vector<std::string> ids;
    for (const auto& r : rows) ids.push_back(r.reference_id);
    return distinct_sorted(ids);
  }
};

inline std::string feature_header(std::size_t dimension) {
  std::string header = "pair_id,mos,distortion_type,distortion_level,reference_id";
  for (std::size_t i = 0; i < dimension; ++i) header += ",f_" + std::to_string(i);
  return header;
}

inline std::string feature_line(const FeatureRow& row) {
  std::vector<std::string> fields{row.pair_id, csv::format_real(row.mos), row.distortion_type,
                                  row.distortion_level ? std::to_string(*row.distortion_level) : "",
                                  row.reference_id};
  for (double v : row.values) fields.push_back(csv::format_real(v));
  return csv::join(fields);
}

inline FeatureRow feature_row(const ManifestRow& pair, std::vector<double> values) {
  return {pair.pair_id, pair.mos, pair.distortion_type, pair.distortion_level, pair.reference_id, std::move(values)};
}

inline FeatureTable read_features(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const long pair = table.column("pair_id");
  const long mos = table.column("mos");
  const long type = table.column("distortion_type");
  const long level = table.column("distortion_level");
  const long ref = table.column("reference_id");
  for (const auto& [name, idx] : {std::pair{"pair_id", pair}, {"mos", mos}, {"distortion_type", type},
                                  {"distortion_level", level}, {"reference_id", ref}}) {
    if (idx < 0) fail(ErrorKind::MissingColumn, path.string() + ": missing column '" + name + "'");
  }
  std::vector<std::size_t> feature_cols;
  for (std::size_t i = 0;; ++i) {
    const long c = table.column("f_" + std::to_string(i));
    if (c < 0) break;
    feature_cols.push_back(static_cast<std::size_t>(c));
  }
  if (feature_cols.empty()) fail(ErrorKind::MissingColumn, path.string() + ": no feature columns f_0...");

  FeatureTable out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const std::string where = path.filename().string() + " row " + std::to_string(i + 1);
    if (f.size() != table.header.size()) fail(ErrorKind::CorruptFile, where + ": wrong number of fields");
    FeatureRow row;
    row.pair_id = f[pair];
    row.mos = parse_real(f[mos], where);
    row.distortion_type = f[type];
    row.distortion_level = parse_level(f[level], where);
    row.reference_id = f[ref];
    for (std::size_t c : feature_cols) row.values.push_back(parse_real(f[c], where));
    out.rows.push_back(std::move(row));
  }
  return out;
}

inline void write_features(const FeatureTable& table, const std::filesystem::path& path) {
  csv::write_atomically(path, [&](std::ostream& out) {
    out << feature_header(table.dimension()) << '\n';
    for (const auto& row : table.rows) out << feature_line(row) << '\n';
  });
}

}  // namespace actmap
