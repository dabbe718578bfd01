#pragma once

// Batch studies behind the command line front end. Each command is a plain
// function so that tests can drive it without spawning processes.

#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "actmap/archive.hpp"
#include "actmap/csv.hpp"
#include "actmap/dataset.hpp"
#include "actmap/error.hpp"
#include "actmap/evaluation.hpp"
#include "actmap/features.hpp"
#include "actmap/image_io.hpp"
#include "actmap/metrics.hpp"
#include "actmap/parallel.hpp"
#include "actmap/regression.hpp"

namespace actmap::cmd {

// ---------------------------------------------------------------- extract

struct ExtractOptions {
  std::filesystem::path net;
  std::filesystem::path manifest;
  MetricId metric = MetricId::HaarPSI;
  std::filesystem::path out;
  std::size_t threads = default_threads();
  /// References processed between checkpoints of the output file.
  std::size_t checkpoint_every = 16;
};

struct ExtractResult {
  std::size_t rows_total = 0;
  std::size_t rows_computed = 0;
};

/// Extracts features for every manifest pair and writes them in manifest
/// order. Pairs already present in an existing output file are kept as is;
/// the file is rewritten after every batch of references so an interrupted
/// run can resume.
inline ExtractResult extract(const ExtractOptions& opt) {
  const NetworkDescriptor net = load_archive(opt.net);
  const DatasetManifest manifest = load_manifest(opt.manifest);
  const std::size_t dim = net.feature_length();

  std::map<std::string, FeatureRow> done;
  if (std::filesystem::exists(opt.out)) {
    const FeatureTable existing = read_features(opt.out);
    if (existing.dimension() == dim) {
      for (const auto& row : existing.rows) done.emplace(row.pair_id, row);
    }
  }

  // Pending work grouped by reference so each reference runs through the network once.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> pending;
  {
    std::map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
      const auto& row = manifest.rows[i];
      if (done.contains(row.pair_id)) continue;
      auto [it, inserted] = slot.try_emplace(row.reference_id, pending.size());
      if (inserted) pending.push_back({row.reference_id, {}});
      pending[it->second].second.push_back(i);
    }
  }

  auto write_snapshot = [&] {
    FeatureTable table;
    for (const auto& row : manifest.rows) {
      if (auto it = done.find(row.pair_id); it != done.end()) table.rows.push_back(it->second);
    }
    if (table.rows.empty()) return;
    csv::write_atomically(opt.out, [&](std::ostream& out) {
      out << feature_header(dim) << '\n';
      for (const auto& r : table.rows) out << feature_line(r) << '\n';
    });
  };

  ExtractResult result;
  result.rows_total = manifest.rows.size();
  const std::size_t batch = std::max<std::size_t>(1, opt.checkpoint_every);
  for (std::size_t begin = 0; begin < pending.size(); begin += batch) {
    const std::size_t end = std::min(pending.size(), begin + batch);
    std::vector<std::vector<FeatureRow>> computed(end - begin);
    parallel_for(end - begin, opt.threads, [&](std::size_t k) {
      const auto& [ref_id, rows] = pending[begin + k];
      const auto& first = manifest.rows[rows.front()];
      const std::string* current = &first.pair_id;
      try {
        const Tensor ref_img = decode_image(manifest.resolve(first.reference_path));
        const auto ref_taps = run_network(net, ref_img);
        for (std::size_t i : rows) {
          const auto& pair = manifest.rows[i];
          current = &pair.pair_id;
          const Tensor dist_img = decode_image(manifest.resolve(pair.distorted_path));
          if (dist_img.width() != ref_img.width() || dist_img.height() != ref_img.height()) {
            fail(ErrorKind::ResolutionMismatch, "reference and distorted resolutions differ");
          }
          auto fv = features_from_activations(ref_taps, run_network(net, dist_img), opt.metric);
          computed[k].push_back(feature_row(pair, std::move(fv.values)));
        }
      } catch (const Error& e) {
        fail(e.kind(), "pair '" + *current + "' (reference '" + ref_id + "'): " + e.what());
      }
    });
    for (auto& rows : computed) {
      for (auto& row : rows) {
        ++result.rows_computed;
        done.insert_or_assign(row.pair_id, std::move(row));
      }
    }
    write_snapshot();
  }
  if (pending.empty()) write_snapshot();
  return result;
}

// ------------------------------------------------------------- regressors

struct RegressorOptions {
  RegressorKind kind = RegressorKind::GaussianSVR;
  SvrParams svr;
  GprParams gpr;
  /// Hyperparameter grid search (SVR: inner 3-fold CV; GPR: marginal likelihood).
  bool grid = false;
};

namespace detail {

inline double auto_gamma(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd xs = Standardizer::fit(x).apply(x);
  const double var = (xs.array() - xs.mean()).square().mean();
  return 1.0 / (static_cast<double>(xs.cols()) * (var > 0.0 ? var : 1.0));
}

/// Grid over C, epsilon and (RBF) a gamma multiplier, scored by SROCC of an
/// inner 3-fold cross-validation with interleaved rows.
inline RegressionModel fit_svr_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const RegressorOptions& opt) {
  const bool rbf = opt.kind == RegressorKind::GaussianSVR;
  const std::vector<double> gamma_factors = rbf ? std::vector<double>{0.5, 1.0, 2.0} : std::vector<double>{1.0};
  double best_score = -2.0;
  SvrParams best = opt.svr;
  double best_factor = 1.0;
  for (double c : {0.1, 1.0, 10.0}) {
    for (double eps : {0.05, 0.1, 0.2}) {
      for (double factor : gamma_factors) {
        SvrParams p = opt.svr;
        p.c = c;
        p.epsilon = eps;
        std::vector<double> pred, truth;
        for (Eigen::Index fold = 0; fold < 3; ++fold) {
          std::vector<Eigen::Index> tr, te;
          for (Eigen::Index i = 0; i < x.rows(); ++i) (i % 3 == fold ? te : tr).push_back(i);
          if (tr.size() < 2 || te.empty()) continue;
          const Eigen::MatrixXd xtr = x(tr, Eigen::all);
          if (rbf) p.gamma = factor * (opt.svr.gamma > 0.0 ? opt.svr.gamma : auto_gamma(xtr));
          const auto model = train_svr(xtr, y(tr), opt.kind, p);
          const Eigen::VectorXd yp = predict(model, Eigen::MatrixXd(x(te, Eigen::all)));
          for (std::size_t k = 0; k < te.size(); ++k) {
            pred.push_back(yp(static_cast<Eigen::Index>(k)));
            truth.push_back(y(te[k]));
          }
        }
        double score = -2.0;
        try {
          score = srocc(truth, pred);
        } catch (const Error&) {
        }
        if (score > best_score) {
          best_score = score;
          best = p;
          best_factor = factor;
        }
      }
    }
  }
  if (rbf) best.gamma = best_factor * (opt.svr.gamma > 0.0 ? opt.svr.gamma : auto_gamma(x));
  return train_svr(x, y, opt.kind, best);
}

}  // namespace detail

inline RegressionModel fit(const RegressorOptions& opt, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (opt.kind == RegressorKind::GprRQ) return opt.grid ? train_gpr_grid(x, y, opt.gpr) : train_gpr(x, y, opt.gpr);
  return opt.grid ? detail::fit_svr_grid(x, y, opt) : train_svr(x, y, opt.kind, opt.svr);
}

// ---------------------------------------------------------------- reports

inline void write_report(const std::vector<AggregateRow>& rows, const std::filesystem::path& path) {
  csv::write_atomically(path, [&](std::ostream& out) {
    out << "scope,n,plcc,srocc,krocc,plcc_std,srocc_std,krocc_std\n";
    for (const auto& r : rows) {
      out << csv::join({r.scope, std::to_string(r.n), csv::format_real(r.plcc), csv::format_real(r.srocc),
                        csv::format_real(r.krocc), csv::format_real(r.plcc_std), csv::format_real(r.srocc_std),
                        csv::format_real(r.krocc_std)})
          << '\n';
    }
  });
}

inline void print_table(const std::vector<AggregateRow>& rows, std::ostream& out) {
  char line[256];
  std::snprintf(line, sizeof line, "%-36s %6s %15s %15s %15s\n", "scope", "n", "PLCC", "SROCC", "KROCC");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-36s %6zu %7.4f+-%.4f %7.4f+-%.4f %7.4f+-%.4f\n", r.scope.c_str(), r.n, r.plcc,
                  r.plcc_std, r.srocc, r.srocc_std, r.krocc, r.krocc_std);
    out << line;
  }
}

namespace detail {

/// Trains on `train`, predicts `test` and evaluates with per-group scopes.
inline EvaluationReport train_and_evaluate(const FeatureTable& table, const std::vector<std::size_t>& train,
                                           const std::vector<std::size_t>& test, const RegressorOptions& reg) {
  const RegressionModel model = fit(reg, table.matrix(train), table.targets(train));
  const Eigen::VectorXd yp = predict(model, table.matrix(test));
  std::vector<double> pred(yp.data(), yp.data() + yp.size());
  std::vector<double> mos;
  std::vector<std::string> types;
  std::vector<std::optional<int>> levels;
  for (std::size_t i : test) {
    mos.push_back(table.rows[i].mos);
    types.push_back(table.rows[i].distortion_type);
    levels.push_back(table.rows[i].distortion_level);
  }
  return evaluate(pred, mos, &types, &levels);
}

}  // namespace detail

// --------------------------------------------------------------- crossval

struct CrossvalOptions {
  std::filesystem::path features;
  RegressorOptions regressor;
  SplitProtocol protocol;
  std::uint64_t seed = 1;
  std::size_t threads = default_threads();
  std::filesystem::path out;
};

/// Reference-disjoint k-fold cross-validation repeated `repetitions` times.
/// Every test fold is one evaluation; the report holds mean and standard
/// deviation over all folds of all repetitions.
inline std::vector<AggregateRow> crossval(const FeatureTable& table, const CrossvalOptions& opt) {
  const auto plans = make_splits(table.reference_ids(), opt.protocol, opt.seed);
  const std::size_t folds = opt.protocol.folds;
  std::vector<EvaluationReport> reports(plans.size() * folds);
  parallel_for(reports.size(), opt.threads, [&](std::size_t task) {
    const SplitPlan& plan = plans[task / folds];
    const std::size_t fold = task % folds;
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      (plan.fold_for(table.rows[i].reference_id) == fold ? test : train).push_back(i);
    }
    reports[task] = detail::train_and_evaluate(table, train, test, opt.regressor);
  });
  return aggregate(reports, opt.protocol.repetitions);
}

inline std::vector<AggregateRow> crossval(const CrossvalOptions& opt) {
  const auto rows = crossval(read_features(opt.features), opt);
  if (!opt.out.empty()) write_report(rows, opt.out);
  return rows;
}

// ------------------------------------------------------------------ sweep

struct SweepOptions {
  std::filesystem::path features;
  RegressorOptions regressor;
  /// Training ratios in percent.
  std::vector<int> train_ratios{5, 10, 20, 30, 40, 50, 60, 70, 80};
  std::size_t repetitions = 100;
  std::uint64_t seed = 1;
  std::size_t threads = default_threads();
  std::filesystem::path out;
};

struct SweepRow {
  int train_ratio = 0;
  std::size_t train_references = 0;
  AggregateRow overall;
};

inline std::vector<SweepRow> sweep(const FeatureTable& table, const SweepOptions& opt) {
  for (int r : opt.train_ratios) {
    if (r <= 0 || r > 95) fail(ErrorKind::Validation, "train ratio " + std::to_string(r) + "% outside (0, 95]");
  }
  if (opt.repetitions < 1) fail(ErrorKind::Validation, "need at least 1 repetition");
  const auto ids = table.reference_ids();
  std::vector<SweepRow> out;
  for (int ratio : opt.train_ratios) {
    std::vector<EvaluationReport> reports(opt.repetitions);
    parallel_for(opt.repetitions, opt.threads, [&](std::size_t rep) {
      const auto is_train = make_ratio_split(ids, ratio / 100.0, opt.seed, rep);
      std::vector<std::size_t> train, test;
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto pos = std::lower_bound(ids.begin(), ids.end(), table.rows[i].reference_id) - ids.begin();
        (is_train[static_cast<std::size_t>(pos)] ? train : test).push_back(i);
      }
      reports[rep] = detail::train_and_evaluate(table, train, test, opt.regressor);
    });
    const auto first_split = make_ratio_split(ids, ratio / 100.0, opt.seed, 0);
    SweepRow row;
    row.train_ratio = ratio;
    row.train_references = static_cast<std::size_t>(std::count(first_split.begin(), first_split.end(), true));
    row.overall = aggregate(reports, opt.repetitions).front();
    out.push_back(row);
  }
  return out;
}

inline void write_sweep(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  csv::write_atomically(path, [&](std::ostream& out) {
    out << "train_ratio,train_references,n_test,plcc,srocc,krocc,plcc_std,srocc_std,krocc_std\n";
    for (const auto& r : rows) {
      const auto& a = r.overall;
      out << csv::join({std::to_string(r.train_ratio), std::to_string(r.train_references), std::to_string(a.n),
                        csv::format_real(a.plcc), csv::format_real(a.srocc), csv::format_real(a.krocc),
                        csv::format_real(a.plcc_std), csv::format_real(a.srocc_std), csv::format_real(a.krocc_std)})
          << '\n';
    }
  });
}

inline std::vector<SweepRow> sweep(const SweepOptions& opt) {
  const auto rows = sweep(read_features(opt.features), opt);
  if (!opt.out.empty()) write_sweep(rows, opt.out);
  return rows;
}

// ------------------------------------------------------------- paramstudy

struct ParamStudyOptions {
  std::filesystem::path manifest;
  std::filesystem::path net;
  /// Directory for the per-metric feature caches.
  std::filesystem::path work_dir;
  SplitProtocol protocol;
  std::uint64_t seed = 1;
  std::size_t threads = default_threads();
  std::filesystem::path out;
};

struct ParamStudyRow {
  MetricId metric;
  RegressorKind regressor;
  AggregateRow overall;
};

/// Every (metric, regressor) combination under the same cross-validation splits.
inline std::vector<ParamStudyRow> paramstudy(const ParamStudyOptions& opt) {
  std::filesystem::create_directories(opt.work_dir);
  std::vector<ParamStudyRow> rows;
  for (MetricId metric : {MetricId::PSNR, MetricId::SSIM, MetricId::HaarPSI}) {
    ExtractOptions ex;
    ex.net = opt.net;
    ex.manifest = opt.manifest;
    ex.metric = metric;
    ex.out = opt.work_dir / ("features_" + std::string(to_string(metric)) + ".csv");
    ex.threads = opt.threads;
    extract(ex);
    const FeatureTable table = read_features(ex.out);
    for (RegressorKind kind : {RegressorKind::LinearSVR, RegressorKind::GaussianSVR, RegressorKind::GprRQ}) {
      CrossvalOptions cv;
      cv.regressor.kind = kind;
      cv.protocol = opt.protocol;
      cv.seed = opt.seed;
      cv.threads = opt.threads;
      rows.push_back({metric, kind, crossval(table, cv).front()});
    }
  }
  if (!opt.out.empty()) {
    csv::write_atomically(opt.out, [&](std::ostream& out) {
      out << "metric,regressor,n,plcc,srocc,krocc,plcc_std,srocc_std,krocc_std\n";
      for (const auto& r : rows) {
        const auto& a = r.overall;
        out << csv::join({std::string(to_string(r.metric)), std::string(to_string(r.regressor)), std::to_string(a.n),
                          csv::format_real(a.plcc), csv::format_real(a.srocc), csv::format_real(a.krocc),
                          csv::format_real(a.plcc_std), csv::format_real(a.srocc_std),
                          csv::format_real(a.krocc_std)})
            << '\n';
      }
    });
  }
  return rows;
}

// ---------------------------------------------------------------- crossdb

struct CrossDbOptions {
  std::filesystem::path train_features;
  std::filesystem::path test_features;
  RegressorOptions regressor;
  MosNormalization normalization = MosNormalization::MinMaxPerDb;
  std::filesystem::path out;
};

inline FeatureTable normalize_scores(FeatureTable table, MosNormalization mode) {
  if (mode == MosNormalization::None || table.rows.empty()) return table;
  DatasetManifest scores;
  for (const auto& r : table.rows) scores.rows.push_back({r.pair_id, r.reference_id, "", "", r.mos, "", {}});
  scores = normalize_mos(std::move(scores), mode);
  for (std::size_t i = 0; i < table.rows.size(); ++i) table.rows[i].mos = scores.rows[i].mos;
  return table;
}

/// Trains on all of one database and tests on all of another.
inline std::vector<AggregateRow> crossdb(const FeatureTable& train, const FeatureTable& test,
                                         const CrossDbOptions& opt) {
  if (train.dimension() != test.dimension()) {
    fail(ErrorKind::DimensionMismatch, "feature files differ in dimension (" + std::to_string(train.dimension()) +
                                           " vs " + std::to_string(test.dimension()) + ")");
  }
  const FeatureTable a = normalize_scores(train, opt.normalization);
  const FeatureTable b = normalize_scores(test, opt.normalization);
  const RegressionModel model = fit(opt.regressor, a.matrix(a.all()), a.targets(a.all()));
  const Eigen::VectorXd yp = predict(model, b.matrix(b.all()));
  std::vector<double> pred(yp.data(), yp.data() + yp.size());
  std::vector<double> mos;
  std::vector<std::string> types;
  std::vector<std::optional<int>> levels;
  for (const auto& r : b.rows) {
    mos.push_back(r.mos);
    types.push_back(r.distortion_type);
    levels.push_back(r.distortion_level);
  }
  return aggregate({evaluate(pred, mos, &types, &levels)}, 1);
}

inline std::vector<AggregateRow> crossdb(const CrossDbOptions& opt) {
  const auto rows = crossdb(read_features(opt.train_features), read_features(opt.test_features), opt);
  if (!opt.out.empty()) write_report(rows, opt.out);
  return rows;
}

// ------------------------------------------------------- train / predict

inline RegressionModel train_model(const std::filesystem::path& features, const RegressorOptions& reg,
                                   const std::filesystem::path& model_out) {
  const FeatureTable table = read_features(features);
  const auto model = fit(reg, table.matrix(table.all()), table.targets(table.all()));
  save_model(model, model_out);
  return model;
}

/// Writes pair_id,mos,prediction for every row of a feature file.
inline std::vector<double> predict_file(const std::filesystem::path& model_path, const std::filesystem::path& features,
                                        const std::filesystem::path& out) {
  const RegressionModel model = load_model(model_path);
  const FeatureTable table = read_features(features);
  std::vector<double> predictions;
  for (const auto& row : table.rows) predictions.push_back(predict(model, row.values));
  if (!out.empty()) {
    csv::write_atomically(out, [&](std::ostream& os) {
      os << "pair_id,mos,prediction\n";
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        os << csv::join({table.rows[i].pair_id, csv::format_real(table.rows[i].mos), csv::format_real(predictions[i])})
           << '\n';
      }
    });
  }
  return predictions;
}

// ------------------------------------------------------------ kadid-10k

/// KADID-10k's published numbers for the activation-map method (overall,
/// 5-fold cross-validation with 100 repetitions).
struct PublishedRow {
  double plcc = 0.959;
  double srocc = 0.957;
  double krocc = 0.819;
};

/// Converts KADID-10k's dmos.csv (dist_img,ref_img,dmos,var) into a manifest.
/// Image names follow I<ref>_<type>_<level>.png and live in `images/`.
inline DatasetManifest convert_kadid(const std::filesystem::path& dmos_csv, bool verify_files = true) {
  const auto table = csv::read(dmos_csv);
  const long dist = table.column("dist_img");
  const long ref = table.column("ref_img");
  const long score = table.column("dmos");
  for (const auto& [name, idx] : {std::pair{"dist_img", dist}, {"ref_img", ref}, {"dmos", score}}) {
    if (idx < 0) fail(ErrorKind::MissingColumn, dmos_csv.string() + ": missing column '" + name + "'");
  }
  DatasetManifest manifest;
  manifest.base_dir = dmos_csv.parent_path();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const std::string where = dmos_csv.filename().string() + " row " + std::to_string(i + 1);
    const std::string stem = std::filesystem::path(f[dist]).stem().string();
    // I01_01_01 -> reference I01, type 01, level 1
    const auto first = stem.find('_');
    const auto second = stem.find('_', first + 1);
    if (first == std::string::npos || second == std::string::npos) {
      fail(ErrorKind::CorruptFile, where + ": unexpected image name '" + f[dist] + "'");
    }
    ManifestRow row;
    row.pair_id = stem;
    row.reference_id = std::filesystem::path(f[ref]).stem().string();
    row.reference_path = "images/" + f[ref];
    row.distorted_path = "images/" + f[dist];
    row.mos = parse_real(f[score], where);
    row.distortion_type = stem.substr(first + 1, second - first - 1);
    row.distortion_level = parse_level(stem.substr(second + 1), where);
    manifest.rows.push_back(std::move(row));
  }
  validate_manifest(manifest, verify_files);
  return manifest;
}

struct ProtocolCheck {
  std::size_t pairs = 0;
  std::size_t references = 0;
  std::size_t min_pairs_per_reference = 0;
  std::size_t max_pairs_per_reference = 0;
  std::vector<std::size_t> fold_sizes;
  std::size_t folds = 0;
  std::size_t repetitions = 0;
  std::vector<std::string> problems;

  bool ok() const { return problems.empty(); }
};

/// Checks the database shape (10,125 pairs over 81 references, 125 each) and
/// that the split protocol yields 5 folds of sizes {17,16,16,16,16} for every
/// one of the 100 repetitions.
inline ProtocolCheck check_kadid_protocol(const DatasetManifest& manifest, SplitProtocol protocol = {},
                                          std::uint64_t seed = 1) {
  ProtocolCheck c;
  c.pairs = manifest.rows.size();
  const auto groups = manifest.by_reference();
  c.references = groups.size();
  c.min_pairs_per_reference = groups.empty() ? 0 : std::numeric_limits<std::size_t>::max();
  for (const auto& [id, idx] : groups) {
    c.min_pairs_per_reference = std::min(c.min_pairs_per_reference, idx.size());
    c.max_pairs_per_reference = std::max(c.max_pairs_per_reference, idx.size());
  }
  c.folds = protocol.folds;
  c.repetitions = protocol.repetitions;
  if (c.pairs != 10125) c.problems.push_back("expected 10125 pairs, found " + std::to_string(c.pairs));
  if (c.references != 81) c.problems.push_back("expected 81 references, found " + std::to_string(c.references));
  if (c.min_pairs_per_reference != 125 || c.max_pairs_per_reference != 125) {
    c.problems.push_back("expected 125 distorted images per reference");
  }
  if (protocol.folds != 5 || protocol.repetitions != 100) c.problems.push_back("protocol must be 5 folds x 100 reps");
  if (c.references < protocol.folds) {
    c.problems.push_back("fewer references than folds");
    return c;
  }
  const std::vector<std::size_t> expected{17, 16, 16, 16, 16};
  const auto plans = make_splits(manifest.reference_ids(), protocol, seed);
  c.fold_sizes = plans.front().fold_sizes();
  for (const auto& plan : plans) {
    auto sizes = plan.fold_sizes();
    std::sort(sizes.rbegin(), sizes.rend());
    if (sizes != expected) {
      c.problems.push_back("repetition " + std::to_string(plan.repetition) + " has unexpected fold sizes");
      break;
    }
  }
  return c;
}

struct ReproOptions {
  /// Directory holding dmos.csv and images/.
  std::filesystem::path kadid_dir;
  std::filesystem::path net;
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  std::size_t threads = default_threads();
  bool check_only = false;
};

struct ReproResult {
  ProtocolCheck check;
  bool ran = false;
  std::vector<AggregateRow> report;
};

/// Converts the database, verifies the protocol shape and, when images and a
/// network are available, runs HaarPSI features + Gaussian SVR cross-validation.
inline ReproResult repro_kadid10k(const ReproOptions& opt, std::ostream& log) {
  ReproResult result;
  const auto dmos = opt.kadid_dir / "dmos.csv";
  const bool have_images = std::filesystem::exists(opt.kadid_dir / "images");
  DatasetManifest manifest = convert_kadid(dmos, have_images && !opt.check_only);
  std::filesystem::create_directories(opt.out_dir);
  // The manifest lives in out_dir, so point it at the database with absolute paths.
  for (auto& row : manifest.rows) {
    row.reference_path = std::filesystem::absolute(manifest.resolve(row.reference_path)).string();
    row.distorted_path = std::filesystem::absolute(manifest.resolve(row.distorted_path)).string();
  }
  const auto manifest_path = opt.out_dir / "manifest.csv";
  write_manifest(manifest, manifest_path);

  result.check = check_kadid_protocol(manifest, {5, 100}, opt.seed);
  log << "pairs=" << result.check.pairs << " references=" << result.check.references << " folds=5 repetitions=100\n";
  for (const auto& p : result.check.problems) log << "protocol problem: " << p << '\n';
  if (!result.check.ok()) fail(ErrorKind::Validation, "KADID-10k protocol check failed");
  if (opt.check_only || !have_images || opt.net.empty()) {
    log << "protocol check passed; correlation run skipped (needs images/ and --net)\n";
    return result;
  }

  ExtractOptions ex;
  ex.net = opt.net;
  ex.manifest = manifest_path;
  ex.metric = MetricId::HaarPSI;
  ex.out = opt.out_dir / "features_haarpsi.csv";
  ex.threads = opt.threads;
  extract(ex);

  CrossvalOptions cv;
  cv.features = ex.out;
  cv.regressor.kind = RegressorKind::GaussianSVR;
  cv.protocol = {5, 100};
  cv.seed = opt.seed;
  cv.threads = opt.threads;
  cv.out = opt.out_dir / "report.csv";
  result.report = crossval(cv);
  result.ran = true;
  const PublishedRow published;
  const auto& all = result.report.front();
  char line[160];
  std::snprintf(line, sizeof line, "PLCC %.3f (published %.3f, delta %+.3f)\nSROCC %.3f (published %.3f, delta %+.3f)\n"
                "KROCC %.3f (published %.3f, delta %+.3f)\n",
                all.plcc, published.plcc, all.plcc - published.plcc, all.srocc, published.srocc,
                all.srocc - published.srocc, all.krocc, published.krocc, all.krocc - published.krocc);
  log << line;
  return result;
}

}  // namespace actmap::cmd
