#pragma once

// Regressors mapping feature vectors to quality scores:
//  - epsilon-SVR (linear or RBF kernel) trained with SMO on the 2l-variable dual,
//  - Gaussian process regression with a rational quadratic kernel.
// Features are standardized inside the model using training statistics.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <list>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "actmap/error.hpp"

namespace actmap {

enum class RegressorKind : std::uint8_t { LinearSVR = 1, GaussianSVR = 2, GprRQ = 3 };

inline std::string_view to_string(RegressorKind kind) {
  switch (kind) {
    case RegressorKind::LinearSVR: return "linsvr";
    case RegressorKind::GaussianSVR: return "gsvr";
    case RegressorKind::GprRQ: return "gpr";
  }
  return "?";
}

inline RegressorKind parse_regressor(std::string_view name) {
  if (name == "linsvr") return RegressorKind::LinearSVR;
  if (name == "gsvr") return RegressorKind::GaussianSVR;
  if (name == "gpr") return RegressorKind::GprRQ;
  fail(ErrorKind::Validation, "unknown regressor '" + std::string(name) + "' (expected linsvr|gsvr|gpr)");
}

/// Per-feature affine standardization fitted on training rows.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x) {
    Standardizer s;
    const auto n = static_cast<double>(x.rows());
    s.mean = x.colwise().sum().transpose() / n;
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double var = (x.col(j).array() - s.mean(j)).square().sum() / n;
      // Zero-variance features are only centered.
      s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
  }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return (x - mean).cwiseQuotient(scale); }
};

struct SvrParams {
  double c = 1.0;
  double epsilon = 0.1;
  /// RBF width; <= 0 selects 1 / (num_features * var(standardized X)).
  double gamma = 0.0;
  double tolerance = 1e-3;
  std::int64_t max_iterations = 1'000'000;
};

/// k(x, x') = sf2 * (1 + |x - x'|^2 / (2 alpha l^2))^-alpha
struct RationalQuadratic {
  double signal_variance = 1.0;
  /// <= 0 selects sqrt(num_features).
  double length_scale = 0.0;
  double alpha = 1.0;

  double operator()(double squared_distance) const {
    return signal_variance *
           std::pow(1.0 + squared_distance / (2.0 * alpha * length_scale * length_scale), -alpha);
  }
};

struct GprParams {
  RationalQuadratic kernel;
  double noise = 0.05;
};

struct RegressionModel {
  RegressorKind kind = RegressorKind::LinearSVR;
  Standardizer standardizer;
  /// SVR targets are standardized too; GPR keeps raw targets (zero prior mean).
  double target_mean = 0.0;
  double target_scale = 1.0;

  SvrParams svr;
  GprParams gpr;

  /// Standardized training inputs (SVR: support vectors only), one per row.
  Eigen::MatrixXd inputs;
  /// SVR: dual coefficients alpha_i - alpha_i^*. GPR: (K + noise I)^-1 y.
  Eigen::VectorXd coefficients;
  double bias = 0.0;
  /// GPR only: lower Cholesky factor of K + noise I.
  Eigen::MatrixXd cholesky;
  std::int64_t iterations = 0;

  Eigen::Index dimension() const { return standardizer.mean.size(); }

  double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    switch (kind) {
      case RegressorKind::LinearSVR: return a.dot(b);
      case RegressorKind::GaussianSVR: return std::exp(-svr.gamma * (a - b).squaredNorm());
      case RegressorKind::GprRQ: return gpr.kernel((a - b).squaredNorm());
    }
    return 0.0;
  }
};

namespace detail {

inline void check_training_input(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::Index min_rows) {
  if (x.rows() != y.size()) {
    fail(ErrorKind::DimensionMismatch, "feature rows (" + std::to_string(x.rows()) + ") != targets (" +
                                           std::to_string(y.size()) + ")");
  }
  if (x.rows() < min_rows) {
    fail(y.size() == 0 ? ErrorKind::DimensionMismatch : ErrorKind::DegenerateInput,
         "need at least " + std::to_string(min_rows) + " training rows");
  }
  if (x.cols() < 1) fail(ErrorKind::DimensionMismatch, "feature matrix has no columns");
  if (!x.allFinite() || !y.allFinite()) fail(ErrorKind::DegenerateInput, "non-finite training data");
}

/// Kernel column provider for SMO: full matrix when it fits, otherwise an LRU
/// cache of columns.
class KernelColumns {
 public:
  KernelColumns(const RegressionModel& model, const Eigen::MatrixXd& x) : model_(model), x_(x) {
    const auto n = static_cast<std::size_t>(x.rows());
    constexpr std::size_t kFullLimit = 64ull << 20;  // entries
    if (n * n <= kFullLimit) {
      full_.resize(x.rows(), x.rows());
      for (Eigen::Index j = 0; j < x.rows(); ++j) {
        for (Eigen::Index i = j; i < x.rows(); ++i) {
          full_(i, j) = full_(j, i) = eval(i, j);
        }
      }
    } else {
      capacity_ = std::max<std::size_t>(2, kFullLimit / n);
    }
    diagonal_.resize(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) diagonal_(i) = full_.size() ? full_(i, i) : eval(i, i);
  }

  double diagonal(Eigen::Index i) const { return diagonal_(i); }

  const double* column(Eigen::Index j) {
    if (full_.size()) return full_.col(j).data();
    if (auto it = index_.find(j); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second.data();
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    std::vector<double> col(static_cast<std::size_t>(x_.rows()));
    for (Eigen::Index i = 0; i < x_.rows(); ++i) col[static_cast<std::size_t>(i)] = eval(i, j);
    lru_.emplace_front(j, std::move(col));
    index_[j] = lru_.begin();
    return lru_.front().second.data();
  }

 private:
  double eval(Eigen::Index i, Eigen::Index j) const {
    return model_.kernel(x_.row(i).transpose(), x_.row(j).transpose());
  }

  const RegressionModel& model_;
  const Eigen::MatrixXd& x_;
  Eigen::MatrixXd full_;
  Eigen::VectorXd diagonal_;
  std::size_t capacity_ = 0;
  std::list<std::pair<Eigen::Index, std::vector<double>>> lru_;
  std::unordered_map<Eigen::Index, std::list<std::pair<Eigen::Index, std::vector<double>>>::iterator> index_;
};

}  // namespace detail

/// Trains an epsilon-SVR. Solves
///   min 1/2 a^T Q a + p^T a   s.t.  sum_t s_t a_t = 0,  0 <= a_t <= C
/// over a = (alpha, alpha^*), s = (+1.., -1..), Q_ts = s_t s_s K, with
/// maximal-violating-pair working set selection.
inline RegressionModel train_svr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, RegressorKind kind,
                                 SvrParams params = {}) {
  if (kind == RegressorKind::GprRQ) fail(ErrorKind::Validation, "train_svr called with a GPR kind");
  if (!(params.c > 0.0)) fail(ErrorKind::Validation, "SVR C must be > 0");
  if (!(params.epsilon >= 0.0)) fail(ErrorKind::Validation, "SVR epsilon must be >= 0");
  detail::check_training_input(x, y, 2);

  RegressionModel model;
  model.kind = kind;
  model.standardizer = Standardizer::fit(x);
  const Eigen::MatrixXd xs = model.standardizer.apply(x);

  const auto n = static_cast<double>(y.size());
  model.target_mean = y.sum() / n;
  const double target_var = (y.array() - model.target_mean).square().sum() / n;
  model.target_scale = target_var > 0.0 ? std::sqrt(target_var) : 1.0;
  const Eigen::VectorXd ys = (y.array() - model.target_mean) / model.target_scale;

  if (kind == RegressorKind::GaussianSVR && params.gamma <= 0.0) {
    const double mean = xs.mean();
    const double var = (xs.array() - mean).square().mean();
    params.gamma = 1.0 / (static_cast<double>(xs.cols()) * (var > 0.0 ? var : 1.0));
  }
  model.svr = params;

  const Eigen::Index l = xs.rows();
  const Eigen::Index m = 2 * l;
  const double c = params.c;
  detail::KernelColumns kernel(model, xs);

  std::vector<double> alpha(static_cast<std::size_t>(m), 0.0);
  std::vector<double> grad(static_cast<std::size_t>(m));
  std::vector<signed char> sign(static_cast<std::size_t>(m));
  for (Eigen::Index t = 0; t < l; ++t) {
    sign[t] = 1;
    sign[t + l] = -1;
    grad[t] = params.epsilon - ys(t);
    grad[t + l] = params.epsilon + ys(t);
  }
  auto row = [l](Eigen::Index t) { return t < l ? t : t - l; };
  auto at_upper = [&](Eigen::Index t) { return alpha[t] >= c; };
  auto at_lower = [&](Eigen::Index t) { return alpha[t] <= 0.0; };
  constexpr double kTau = 1e-12;

  std::int64_t iter = 0;
  for (;; ++iter) {
    // i maximizes -s_t G_t over I_up, j minimizes it over I_low.
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < m; ++t) {
      const double v = -sign[t] * grad[t];
      const bool up = sign[t] > 0 ? !at_upper(t) : !at_lower(t);
      const bool low = sign[t] > 0 ? !at_lower(t) : !at_upper(t);
      if (up && v > gmax) {
        gmax = v;
        i = t;
      }
      if (low && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < params.tolerance) break;
    if (iter >= params.max_iterations) {
      fail(ErrorKind::ConvergenceFailure, "SMO did not reach KKT tolerance within " +
                                              std::to_string(params.max_iterations) + " iterations");
    }

    const double* ki = kernel.column(row(i));
    const double* kj = kernel.column(row(j));
    const double qii = kernel.diagonal(row(i));
    const double qjj = kernel.diagonal(row(j));
    const double qij = sign[i] * sign[j] * ki[row(j)];
    const double old_i = alpha[i];
    const double old_j = alpha[j];

    if (sign[i] != sign[j]) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (Eigen::Index t = 0; t < m; ++t) {
      const Eigen::Index r = row(t);
      grad[t] += sign[t] * (sign[i] * ki[r] * di + sign[j] * kj[r] * dj);
    }
  }
  model.iterations = iter;

  // rho from free variables, else the midpoint of the feasible interval.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::int64_t free_count = 0;
  for (Eigen::Index t = 0; t < m; ++t) {
    const double yg = sign[t] * grad[t];
    if (at_upper(t)) {
      if (sign[t] < 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (at_lower(t)) {
      if (sign[t] > 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (upper + lower) / 2.0;
  model.bias = -rho;

  std::vector<Eigen::Index> support;
  for (Eigen::Index t = 0; t < l; ++t) {
    if (alpha[t] - alpha[t + l] != 0.0) support.push_back(t);
  }
  model.inputs.resize(static_cast<Eigen::Index>(support.size()), xs.cols());
  model.coefficients.resize(static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    const auto idx = static_cast<Eigen::Index>(k);
    model.inputs.row(idx) = xs.row(support[k]);
    model.coefficients(idx) = alpha[support[k]] - alpha[support[k] + l];
  }
  return model;
}

/// Exact GP posterior mean through a Cholesky factorization of K + noise I.
inline RegressionModel train_gpr(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, GprParams params = {}) {
  detail::check_training_input(x, y, 1);
  if (!(params.noise > 0.0)) fail(ErrorKind::Validation, "GPR noise must be > 0");
  if (params.kernel.length_scale <= 0.0) params.kernel.length_scale = std::sqrt(static_cast<double>(x.cols()));
  if (!(params.kernel.signal_variance > 0.0) || !(params.kernel.alpha > 0.0)) {
    fail(ErrorKind::Validation, "GPR kernel parameters must be > 0");
  }

  RegressionModel model;
  model.kind = RegressorKind::GprRQ;
  model.gpr = params;
  model.standardizer = Standardizer::fit(x);
  model.inputs = model.standardizer.apply(x);

  const Eigen::Index n = model.inputs.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      k(i, j) = k(j, i) = params.kernel((model.inputs.row(i) - model.inputs.row(j)).squaredNorm());
    }
    k(j, j) += params.noise;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::CholeskyFailure, "kernel matrix plus noise is not positive definite");
  }
  model.cholesky = llt.matrixL();
  model.coefficients = llt.solve(y);
  return model;
}

/// Log marginal likelihood of the training targets under the model's kernel.
inline double log_marginal_likelihood(const RegressionModel& model, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(y.size());
  const double log_det = 2.0 * model.cholesky.diagonal().array().log().sum();
  return -0.5 * y.dot(model.coefficients) - 0.5 * log_det - 0.5 * n * std::log(2.0 * 3.14159265358979323846);
}

/// Picks length scale and noise from a fixed grid by marginal likelihood.
inline RegressionModel train_gpr_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, GprParams base = {}) {
  const double l0 = base.kernel.length_scale > 0.0 ? base.kernel.length_scale : std::sqrt(static_cast<double>(x.cols()));
  RegressionModel best;
  double best_lml = -std::numeric_limits<double>::infinity();
  for (double lf : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    for (double noise : {1e-3, 1e-2, 0.05, 0.1, 0.5}) {
      GprParams p = base;
      p.kernel.length_scale = l0 * lf;
      p.noise = noise;
      auto model = train_gpr(x, y, p);
      const double lml = log_marginal_likelihood(model, y);
      if (lml > best_lml) {
        best_lml = lml;
        best = std::move(model);
      }
    }
  }
  return best;
}

inline double predict(const RegressionModel& model, std::span<const double> features) {
  if (static_cast<Eigen::Index>(features.size()) != model.dimension()) {
    fail(ErrorKind::DimensionMismatch, "query has " + std::to_string(features.size()) + " features, model expects " +
                                           std::to_string(model.dimension()));
  }
  const Eigen::VectorXd q =
      model.standardizer.apply(Eigen::Map<const Eigen::VectorXd>(features.data(), model.dimension()).eval());
  double f = model.bias;
  for (Eigen::Index i = 0; i < model.inputs.rows(); ++i) {
    f += model.coefficients(i) * model.kernel(model.inputs.row(i).transpose(), q);
  }
  return f * model.target_scale + model.target_mean;
}

inline Eigen::VectorXd predict(const RegressionModel& model, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.rows());
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
    out(r) = predict(model, row);
  }
  return out;
}

/// Trains the requested regressor with the given (or default) parameters.
inline RegressionModel train(RegressorKind kind, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const SvrParams& svr = {}, const GprParams& gpr = {}) {
  if (kind == RegressorKind::GprRQ) return train_gpr(x, y, gpr);
  return train_svr(x, y, kind, svr);
}

// Model file: "AMF1", kind byte, then a fixed sequence of float64 arrays, each
// preceded by its element count as a little-endian uint64.
namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) fail(ErrorKind::CorruptFile, "model file truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline void put_array(std::ostream& out, std::span<const double> values) {
  put_u64(out, values.size());
  for (double v : values) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline std::vector<double> get_array(std::istream& in) {
  const std::uint64_t n = get_u64(in);
  if (n > (1ull << 32)) fail(ErrorKind::CorruptFile, "implausible array length in model file");
  std::vector<double> values(n);
  for (auto& v : values) v = std::bit_cast<double>(get_u64(in));
  return values;
}

inline std::vector<double> flatten(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()) + 2);
  out.push_back(static_cast<double>(m.rows()));
  out.push_back(static_cast<double>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

inline Eigen::MatrixXd unflatten(const std::vector<double>& v) {
  if (v.size() < 2) fail(ErrorKind::CorruptFile, "matrix record too short");
  const auto rows = static_cast<Eigen::Index>(v[0]);
  const auto cols = static_cast<Eigen::Index>(v[1]);
  if (rows < 0 || cols < 0 || v.size() != static_cast<std::size_t>(rows * cols) + 2) {
    fail(ErrorKind::CorruptFile, "matrix record size mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 2;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v[k++];
  }
  return m;
}

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline void save_model(const RegressionModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot write model " + path.string());
  out.write("AMF1", 4);
  out.put(static_cast<char>(model.kind));
  const std::vector<double> svr{model.svr.c, model.svr.epsilon, model.svr.gamma, model.svr.tolerance,
                                static_cast<double>(model.svr.max_iterations)};
  const std::vector<double> gpr{model.gpr.kernel.signal_variance, model.gpr.kernel.length_scale,
                                model.gpr.kernel.alpha, model.gpr.noise};
  detail::put_array(out, svr);
  detail::put_array(out, gpr);
  detail::put_array(out, {model.standardizer.mean.data(), static_cast<std::size_t>(model.standardizer.mean.size())});
  detail::put_array(out, {model.standardizer.scale.data(), static_cast<std::size_t>(model.standardizer.scale.size())});
  detail::put_array(out, std::vector<double>{model.target_mean, model.target_scale, model.bias});
  detail::put_array(out, detail::flatten(model.inputs));
  detail::put_array(out, {model.coefficients.data(), static_cast<std::size_t>(model.coefficients.size())});
  detail::put_array(out, detail::flatten(model.cholesky));
  if (!out) fail(ErrorKind::IoError, "failed writing model " + path.string());
}

inline RegressionModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, "cannot open model " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::string_view(magic, 4) != "AMF1") {
    fail(ErrorKind::CorruptFile, path.string() + " is not an AMF1 model file");
  }
  const int kind = in.get();
  if (kind < 1 || kind > 3) fail(ErrorKind::CorruptFile, "unknown model kind byte");

  RegressionModel model;
  model.kind = static_cast<RegressorKind>(kind);
  const auto svr = detail::get_array(in);
  const auto gpr = detail::get_array(in);
  if (svr.size() != 5 || gpr.size() != 4) fail(ErrorKind::CorruptFile, "bad parameter records");
  model.svr = {svr[0], svr[1], svr[2], svr[3], static_cast<std::int64_t>(svr[4])};
  model.gpr.kernel = {gpr[0], gpr[1], gpr[2]};
  model.gpr.noise = gpr[3];
  model.standardizer.mean = detail::to_vector(detail::get_array(in));
  model.standardizer.scale = detail::to_vector(detail::get_array(in));
  const auto scalars = detail::get_array(in);
  if (scalars.size() != 3) fail(ErrorKind::CorruptFile, "bad scalar record");
  model.target_mean = scalars[0];
  model.target_scale = scalars[1];
  model.bias = scalars[2];
  model.inputs = detail::unflatten(detail::get_array(in));
  model.coefficients = detail::to_vector(detail::get_array(in));
  model.cholesky = detail::unflatten(detail::get_array(in));
  if (model.standardizer.mean.size() != model.standardizer.scale.size() ||
      model.inputs.rows() != model.coefficients.size() ||
      (model.inputs.rows() > 0 && model.inputs.cols() != model.standardizer.mean.size())) {
    fail(ErrorKind::CorruptFile, "inconsistent model dimensions");
  }
  return model;
}

}  // namespace actmap
