#pragma once

// Correlation statistics, 5-parameter logistic mapping, Fisher-z significance
// testing and reference-disjoint split construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "actmap/error.hpp"
#include "actmap/rng.hpp"

namespace actmap {

namespace detail {

inline void require_aligned(std::span<const double> x, std::span<const double> y, std::size_t min_len,
                            const char* what) {
  if (x.size() != y.size()) fail(ErrorKind::DimensionMismatch, std::string(what) + ": vectors differ in length");
  if (x.size() < min_len) {
    fail(ErrorKind::DegenerateInput, std::string(what) + " needs at least " + std::to_string(min_len) + " samples");
  }
}

inline double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace detail

/// Pearson linear correlation.
inline double plcc(std::span<const double> x, std::span<const double> y) {
  detail::require_aligned(x, y, 3, "plcc");
  const double mx = detail::mean(x);
  const double my = detail::mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorKind::DegenerateInput, "plcc undefined for a constant vector");
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

/// 1-based ranks; tied values share the mean of the ranks they span.
inline std::vector<double> fractional_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

/// Spearman rank correlation: Pearson correlation of fractional ranks.
inline double srocc(std::span<const double> x, std::span<const double> y) {
  detail::require_aligned(x, y, 3, "srocc");
  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  return plcc(rx, ry);
}

/// Kendall correlation (n_c - n_d) / (n (n - 1) / 2) by pair enumeration.
/// Pairs tied in either vector count as neither concordant nor discordant.
inline double krocc(std::span<const double> x, std::span<const double> y) {
  detail::require_aligned(x, y, 2, "krocc");
  const std::size_t n = x.size();
  std::int64_t balance = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 || dy == 0.0) continue;
      balance += (dx > 0.0) == (dy > 0.0) ? 1 : -1;
    }
  }
  return static_cast<double>(balance) / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

/// f(s) = b1 (1/2 - 1 / (1 + exp(b2 (s - b3)))) + b4 s + b5
struct Logistic5 {
  std::array<double, 5> beta{0.0, 1.0, 0.0, 1.0, 0.0};

  double operator()(double s) const {
    const double z = std::clamp(beta[1] * (s - beta[2]), -700.0, 700.0);
    return beta[0] * (0.5 - 1.0 / (1.0 + std::exp(z))) + beta[3] * s + beta[4];
  }

  std::vector<double> apply(std::span<const double> s) const {
    std::vector<double> out(s.size());
    std::transform(s.begin(), s.end(), out.begin(), [this](double v) { return (*this)(v); });
    return out;
  }
};

struct LogisticFitOptions {
  int max_iterations = 2000;
  double tolerance = 1e-10;
};

namespace detail {

inline double sse(const Logistic5& f, std::span<const double> predicted, std::span<const double> mos) {
  double s = 0.0;
  for (std::size_t i = 0; i < mos.size(); ++i) {
    const double r = f(predicted[i]) - mos[i];
    s += r * r;
  }
  return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

/// Nelder-Mead simplex minimization of the squared residual from `start`.
inline Logistic5 nelder_mead(Logistic5 start, std::span<const double> predicted, std::span<const double> mos,
                             double data_scale, const LogisticFitOptions& opt) {
  constexpr std::size_t kDim = 5;
  std::array<Logistic5, kDim + 1> simplex;
  std::array<double, kDim + 1> value;
  simplex[0] = start;
  for (std::size_t k = 0; k < kDim; ++k) {
    simplex[k + 1] = start;
    const double b = start.beta[k];
    simplex[k + 1].beta[k] = b != 0.0 ? b * 1.1 : 0.1 * data_scale;
  }
  for (std::size_t k = 0; k <= kDim; ++k) value[k] = sse(simplex[k], predicted, mos);

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    std::array<std::size_t, kDim + 1> order;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[kDim - 1];
    if (value[worst] - value[best] <= opt.tolerance * (std::abs(value[best]) + opt.tolerance)) break;

    Logistic5 centroid;
    centroid.beta.fill(0.0);
    for (std::size_t k = 0; k <= kDim; ++k) {
      if (k == worst) continue;
      for (std::size_t d = 0; d < kDim; ++d) centroid.beta[d] += simplex[k].beta[d] / kDim;
    }
    auto along = [&](double t) {
      Logistic5 p;
      for (std::size_t d = 0; d < kDim; ++d) {
        p.beta[d] = centroid.beta[d] + t * (simplex[worst].beta[d] - centroid.beta[d]);
      }
      return p;
    };

    const Logistic5 reflected = along(-1.0);
    const double fr = sse(reflected, predicted, mos);
    if (fr < value[best]) {
      const Logistic5 expanded = along(-2.0);
      const double fe = sse(expanded, predicted, mos);
      if (fe < fr) {
        simplex[worst] = expanded;
        value[worst] = fe;
      } else {
        simplex[worst] = reflected;
        value[worst] = fr;
      }
    } else if (fr < value[second]) {
      simplex[worst] = reflected;
      value[worst] = fr;
    } else {
      const bool outside = fr < value[worst];
      const Logistic5 contracted = along(outside ? -0.5 : 0.5);
      const double fc = sse(contracted, predicted, mos);
      if (fc < (outside ? fr : value[worst])) {
        simplex[worst] = contracted;
        value[worst] = fc;
      } else {
        for (std::size_t k = 0; k <= kDim; ++k) {
          if (k == best) continue;
          for (std::size_t d = 0; d < kDim; ++d) {
            simplex[k].beta[d] = simplex[best].beta[d] + 0.5 * (simplex[k].beta[d] - simplex[best].beta[d]);
          }
          value[k] = sse(simplex[k], predicted, mos);
        }
      }
    }
  }
  const auto best = std::min_element(value.begin(), value.end()) - value.begin();
  return simplex[static_cast<std::size_t>(best)];
}

/// Refits outer scale and offset by least squares: a*f + c stays in the family.
inline Logistic5 affine_refit(Logistic5 f, std::span<const double> predicted, std::span<const double> mos) {
  const auto fitted = f.apply(predicted);
  const double mf = mean(fitted);
  const double mm = mean(mos);
  double sff = 0.0, sfm = 0.0;
  for (std::size_t i = 0; i < mos.size(); ++i) {
    sff += (fitted[i] - mf) * (fitted[i] - mf);
    sfm += (fitted[i] - mf) * (mos[i] - mm);
  }
  if (sff <= 0.0) return f;
  const double a = sfm / sff;
  const double c = mm - a * mf;
  f.beta[0] *= a;
  f.beta[3] *= a;
  f.beta[4] = a * f.beta[4] + c;
  return f;
}

}  // namespace detail

/// Least-squares fit of the logistic mapping predicted -> mos, from three
/// starts: a logistic start, the best straight line, and the logistic start
/// with the slope sign flipped. Never returns a fit worse than its starts.
inline Logistic5 fit_logistic5(std::span<const double> mos, std::span<const double> predicted,
                               const LogisticFitOptions& opt = {}) {
  detail::require_aligned(mos, predicted, 5, "fit_logistic5");
  const double mp = detail::mean(predicted);
  const double mm = detail::mean(mos);
  double spp = 0.0, spm = 0.0;
  for (std::size_t i = 0; i < mos.size(); ++i) {
    spp += (predicted[i] - mp) * (predicted[i] - mp);
    spm += (predicted[i] - mp) * (mos[i] - mm);
  }
  const double sd = std::sqrt(spp / static_cast<double>(mos.size()));
  const auto [lo, hi] = std::minmax_element(mos.begin(), mos.end());

  Logistic5 logistic;
  logistic.beta = {*hi - *lo, sd > 0.0 ? 1.0 / sd : 1.0, mp, 0.0, mm};
  Logistic5 linear = logistic;
  linear.beta[0] = 0.0;
  linear.beta[3] = spp > 0.0 ? spm / spp : 0.0;
  linear.beta[4] = mm - linear.beta[3] * mp;
  Logistic5 flipped = logistic;
  flipped.beta[1] = -flipped.beta[1];

  const double scale = std::max(*hi - *lo, 1e-12);
  Logistic5 best = linear;
  double best_sse = detail::sse(linear, predicted, mos);
  auto consider = [&](const Logistic5& candidate) {
    const double v = detail::sse(candidate, predicted, mos);
    if (v < best_sse) {
      best_sse = v;
      best = candidate;
    }
  };
  for (const Logistic5& start : {logistic, linear, flipped}) {
    consider(start);
    const Logistic5 fitted = detail::nelder_mead(start, predicted, mos, scale, opt);
    consider(fitted);
    consider(detail::affine_refit(fitted, predicted, mos));
  }
  return best;
}

/// PLCC after the logistic mapping; falls back to the raw PLCC below 5 samples.
inline double mapped_plcc(std::span<const double> mos, std::span<const double> predicted) {
  if (mos.size() < 5) return plcc(predicted, mos);
  const Logistic5 f = fit_logistic5(mos, predicted);
  const auto mapped = f.apply(predicted);
  // A degenerate mapping (constant output) keeps the raw linear correlation.
  try {
    return plcc(mapped, mos);
  } catch (const Error&) {
    return plcc(predicted, mos);
  }
}

struct SignificanceResult {
  double z_stat = 0.0;
  double p_value = 1.0;
  bool significant_at_05 = false;
};

/// Two-sided test for the difference of two correlations over the same N
/// samples; Fisher z-transforms with variance 1.06 / (N - 3) each.
inline SignificanceResult significance(double r1, double r2, std::size_t n) {
  if (!(std::abs(r1) < 1.0) || !(std::abs(r2) < 1.0)) fail(ErrorKind::DomainError, "|r| must be < 1");
  if (n <= 3) fail(ErrorKind::DomainError, "significance test needs n > 3");
  const double se = std::sqrt(2.0 * 1.06 / static_cast<double>(n - 3));
  SignificanceResult out;
  out.z_stat = (std::atanh(r1) - std::atanh(r2)) / se;
  out.p_value = std::erfc(std::abs(out.z_stat) / std::sqrt(2.0));
  out.significant_at_05 = out.p_value < 0.05;
  return out;
}

/// One repetition of k-fold cross-validation over reference identifiers.
struct SplitPlan {
  std::uint64_t seed = 0;
  std::size_t repetition = 0;
  std::size_t folds = 0;
  /// Sorted distinct reference ids and the test fold of each.
  std::vector<std::string> reference_ids;
  std::vector<std::size_t> fold_of;

  std::size_t fold_for(const std::string& id) const {
    const auto it = std::lower_bound(reference_ids.begin(), reference_ids.end(), id);
    if (it == reference_ids.end() || *it != id) fail(ErrorKind::Validation, "unknown reference id '" + id + "'");
    return fold_of[static_cast<std::size_t>(it - reference_ids.begin())];
  }

  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> sizes(folds, 0);
    for (std::size_t f : fold_of) ++sizes[f];
    return sizes;
  }
};

struct SplitProtocol {
  std::size_t folds = 5;
  std::size_t repetitions = 100;
};

inline std::vector<std::string> distinct_sorted(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

/// Per repetition, shuffles the distinct reference ids with a stream derived
/// from (seed, repetition) and deals them round-robin into near-equal folds.
inline std::vector<SplitPlan> make_splits(const std::vector<std::string>& reference_ids, SplitProtocol protocol,
                                          std::uint64_t seed) {
  if (protocol.folds < 2) fail(ErrorKind::Validation, "need at least 2 folds");
  if (protocol.repetitions < 1) fail(ErrorKind::Validation, "need at least 1 repetition");
  const auto ids = distinct_sorted(reference_ids);
  if (ids.size() < protocol.folds) {
    fail(ErrorKind::TooFewReferences, std::to_string(ids.size()) + " distinct references for " +
                                          std::to_string(protocol.folds) + " folds");
  }
  std::vector<SplitPlan> plans;
  plans.reserve(protocol.repetitions);
  for (std::size_t rep = 0; rep < protocol.repetitions; ++rep) {
    SplitPlan plan;
    plan.seed = seed;
    plan.repetition = rep;
    plan.folds = protocol.folds;
    plan.reference_ids = ids;
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, rep));
    rng.shuffle(order);
    plan.fold_of.assign(ids.size(), 0);
    for (std::size_t k = 0; k < order.size(); ++k) plan.fold_of[order[k]] = k % protocol.folds;
    plans.push_back(std::move(plan));
  }
  return plans;
}

/// Single train/test split by reference with the given training fraction
/// (rounded, at least one reference on each side).
inline std::vector<bool> make_ratio_split(const std::vector<std::string>& sorted_ids, double train_ratio,
                                          std::uint64_t seed, std::size_t repetition) {
  if (!(train_ratio > 0.0) || train_ratio > 0.95) {
    fail(ErrorKind::Validation, "train ratio must lie in (0, 0.95]");
  }
  if (sorted_ids.size() < 2) fail(ErrorKind::TooFewReferences, "need at least 2 references");
  auto n_train = static_cast<std::size_t>(std::lround(train_ratio * static_cast<double>(sorted_ids.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, sorted_ids.size() - 1);
  std::vector<std::size_t> order(sorted_ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed ^ 0x5ee9ULL, repetition));
  rng.shuffle(order);
  std::vector<bool> is_train(sorted_ids.size(), false);
  for (std::size_t k = 0; k < n_train; ++k) is_train[order[k]] = true;
  return is_train;
}

/// Correlations for one scope of one evaluation.
struct ScopeResult {
  std::string scope;
  std::size_t n = 0;
  bool degenerate = false;
  double plcc = 0.0;
  double srocc = 0.0;
  double krocc = 0.0;
};

struct EvaluationReport {
  std::vector<ScopeResult> scopes;

  const ScopeResult* find(const std::string& scope) const {
    for (const auto& s : scopes) {
      if (s.scope == scope) return &s;
    }
    return nullptr;
  }
};

inline ScopeResult evaluate_scope(std::string scope, std::span<const double> predictions, std::span<const double> mos) {
  ScopeResult r;
  r.scope = std::move(scope);
  r.n = mos.size();
  try {
    r.plcc = mapped_plcc(mos, predictions);
    r.srocc = srocc(mos, predictions);
    r.krocc = krocc(mos, predictions);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateInput) throw;
    r.degenerate = true;
  }
  return r;
}

/// Overall correlations plus one scope per distinct distortion type and level.
/// Degenerate scopes (constant scores, too few samples) are flagged, not fatal.
inline EvaluationReport evaluate(std::span<const double> predictions, std::span<const double> mos,
                                 const std::vector<std::string>* types = nullptr,
                                 const std::vector<std::optional<int>>* levels = nullptr) {
  if (predictions.size() != mos.size()) fail(ErrorKind::DimensionMismatch, "predictions and mos differ in length");
  EvaluationReport report;
  report.scopes.push_back(evaluate_scope("all", predictions, mos));

  auto add_group = [&](const std::string& scope, const std::vector<std::size_t>& idx) {
    std::vector<double> p, m;
    for (std::size_t i : idx) {
      p.push_back(predictions[i]);
      m.push_back(mos[i]);
    }
    report.scopes.push_back(evaluate_scope(scope, p, m));
  };
  if (types && !types->empty()) {
    if (types->size() != mos.size()) fail(ErrorKind::DimensionMismatch, "type labels misaligned");
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < types->size(); ++i) {
      if (!(*types)[i].empty()) groups[(*types)[i]].push_back(i);
    }
    for (const auto& [key, idx] : groups) add_group("type:" + key, idx);
  }
  if (levels && !levels->empty()) {
    if (levels->size() != mos.size()) fail(ErrorKind::DimensionMismatch, "level labels misaligned");
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < levels->size(); ++i) {
      if ((*levels)[i]) groups[*(*levels)[i]].push_back(i);
    }
    for (const auto& [key, idx] : groups) add_group("level:" + std::to_string(key), idx);
  }
  return report;
}

/// Mean and sample standard deviation of each scope across many evaluations.
struct AggregateRow {
  std::string scope;
  std::size_t n = 0;
  std::size_t evaluations = 0;
  double plcc = 0.0, srocc = 0.0, krocc = 0.0;
  double plcc_std = 0.0, srocc_std = 0.0, krocc_std = 0.0;
};

/// `n` is the per-repetition sample count of each scope: the scope's samples
/// summed over all evaluations divided by `repetitions`. Scopes keep the order
/// of first appearance ("all", then types, then levels).
inline std::vector<AggregateRow> aggregate(const std::vector<EvaluationReport>& reports, std::size_t repetitions) {
  struct Acc {
    std::size_t n = 0;
    std::vector<double> p, s, k;
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> acc;
  for (const auto& report : reports) {
    for (const auto& scope : report.scopes) {
      auto [it, inserted] = acc.try_emplace(scope.scope);
      if (inserted) order.push_back(scope.scope);
      it->second.n += scope.n;
      if (scope.degenerate) continue;
      it->second.p.push_back(scope.plcc);
      it->second.s.push_back(scope.srocc);
      it->second.k.push_back(scope.krocc);
    }
  }
  // "all" first, then type:* and level:* in sorted order (levels numerically).
  std::stable_sort(order.begin(), order.end(), [](const std::string& a, const std::string& b) {
    auto rank = [](const std::string& s) { return s == "all" ? 0 : s.rfind("type:", 0) == 0 ? 1 : 2; };
    if (rank(a) != rank(b)) return rank(a) < rank(b);
    if (rank(a) == 2) return std::stoi(a.substr(6)) < std::stoi(b.substr(6));
    return a < b;
  });
  auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    if (v.empty()) {
      mean = sd = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  };
  std::vector<AggregateRow> rows;
  for (const auto& scope : order) {
    const Acc& a = acc.at(scope);
    AggregateRow row;
    row.scope = scope;
    row.n = repetitions > 0 ? a.n / repetitions : a.n;
    row.evaluations = a.p.size();
    stats(a.p, row.plcc, row.plcc_std);
    stats(a.s, row.srocc, row.srocc_std);
    stats(a.k, row.krocc, row.krocc_std);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace actmap
