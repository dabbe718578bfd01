#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the library's algorithm code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

/// Row-major dense matrix of doubles.
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v;
  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}
  double& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

// ------------------------------------------------------------------ conv

/// Naive zero-padded convolution in double. Layout (c, y, x) like the library.
inline std::vector<double> conv2d(const std::vector<float>& in, std::size_t w, std::size_t h, std::size_t cin,
                                  const std::vector<float>& weights, const std::vector<float>& bias, std::size_t cout,
                                  std::size_t kh, std::size_t kw, std::size_t stride, std::size_t pad,
                                  std::size_t groups, std::size_t& out_w, std::size_t& out_h) {
  out_w = (w + 2 * pad - kw) / stride + 1;
  out_h = (h + 2 * pad - kh) / stride + 1;
  std::vector<double> out(out_w * out_h * cout, 0.0);
  const std::size_t in_g = cin / groups, out_g = cout / groups;
  for (std::size_t oc = 0; oc < cout; ++oc)
    for (std::size_t oy = 0; oy < out_h; ++oy)
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        double s = bias[oc];
        for (std::size_t ic = 0; ic < in_g; ++ic)
          for (std::size_t ky = 0; ky < kh; ++ky)
            for (std::size_t kx = 0; kx < kw; ++kx) {
              const long y = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
              const long x = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
              if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w)) continue;
              const std::size_t c = (oc / out_g) * in_g + ic;
              s += static_cast<double>(weights[((oc * in_g + ic) * kh + ky) * kw + kx]) *
                   in[(c * h + static_cast<std::size_t>(y)) * w + static_cast<std::size_t>(x)];
            }
        out[(oc * out_h + oy) * out_w + ox] = s;
      }
  return out;
}

// ------------------------------------------------------------------ SSIM

/// Direct SSIM: for every valid window position, weighted statistics with an
/// explicit 2-D Gaussian window (normalized over the whole window).
inline double ssim(const Mat& a, const Mat& b, double L, std::size_t win = 11, double sigma = 1.5) {
  Mat g(win, win);
  double total = 0.0;
  const double c = (static_cast<double>(win) - 1.0) / 2.0;
  for (std::size_t i = 0; i < win; ++i)
    for (std::size_t j = 0; j < win; ++j) {
      g(i, j) = std::exp(-((i - c) * (i - c) + (j - c) * (j - c)) / (2 * sigma * sigma));
      total += g(i, j);
    }
  for (double& x : g.v) x /= total;
  const double c1 = (0.01 * L) * (0.01 * L), c2 = (0.03 * L) * (0.03 * L);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t y = 0; y + win <= a.rows; ++y)
    for (std::size_t x = 0; x + win <= a.cols; ++x) {
      double ma = 0, mb = 0;
      for (std::size_t i = 0; i < win; ++i)
        for (std::size_t j = 0; j < win; ++j) {
          ma += g(i, j) * a(y + i, x + j);
          mb += g(i, j) * b(y + i, x + j);
        }
      double va = 0, vb = 0, cov = 0;
      for (std::size_t i = 0; i < win; ++i)
        for (std::size_t j = 0; j < win; ++j) {
          const double da = a(y + i, x + j) - ma, db = b(y + i, x + j) - mb;
          va += g(i, j) * da * da;
          vb += g(i, j) * db * db;
          cov += g(i, j) * da * db;
        }
      sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return sum / static_cast<double>(count);
}

// --------------------------------------------------------------- HaarPSI

/// Full 2-D convolution, output (ra + rk - 1) x (ca + ck - 1).
inline Mat conv2_full(const Mat& a, const Mat& k) {
  Mat out(a.rows + k.rows - 1, a.cols + k.cols - 1);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j)
      for (std::size_t p = 0; p < k.rows; ++p)
        for (std::size_t q = 0; q < k.cols; ++q) out(i + p, j + q) += a(i, j) * k(p, q);
  return out;
}

/// MATLAB conv2(a, k, 'same'): central part, starting at floor(size(k)/2).
inline Mat conv2_same(const Mat& a, const Mat& k) {
  const Mat full = conv2_full(a, k);
  Mat out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) out(i, j) = full(i + k.rows / 2, j + k.cols / 2);
  return out;
}

inline Mat rot180(const Mat& k) {
  Mat out(k.rows, k.cols);
  for (std::size_t i = 0; i < k.rows; ++i)
    for (std::size_t j = 0; j < k.cols; ++j) out(i, j) = k(k.rows - 1 - i, k.cols - 1 - j);
  return out;
}

/// Reference HaarPSI for a single channel, following the published MATLAB
/// construction step by step (convolve2d = conv2(A, rot90(K, 2), 'same')).
inline double haarpsi(Mat ref, Mat dist, double range, bool subsample) {
  const double scale = range / 255.0;
  const double C = 30.0 * scale * scale;
  const double alpha = 4.2;
  auto convolve2d = [](const Mat& a, const Mat& k) { return conv2_same(a, rot180(k)); };
  if (subsample) {
    Mat box(2, 2, 0.25);
    auto sub = [&](const Mat& img) {
      const Mat f = convolve2d(img, box);
      Mat out((img.rows + 1) / 2, (img.cols + 1) / 2);
      for (std::size_t i = 0; i < out.rows; ++i)
        for (std::size_t j = 0; j < out.cols; ++j) out(i, j) = f(2 * i, 2 * j);
      return out;
    };
    ref = sub(ref);
    dist = sub(dist);
  }
  const int n_scales = 3;
  auto decompose = [&](const Mat& img) {
    std::vector<Mat> coeffs(2 * n_scales);
    for (int k = 1; k <= n_scales; ++k) {
      const std::size_t m = std::size_t{1} << k;
      Mat filt(m, m, std::ldexp(1.0, -k));
      for (std::size_t i = 0; i < m / 2; ++i)
        for (std::size_t j = 0; j < m; ++j) filt(i, j) = -filt(i, j);
      Mat filt_t(m, m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) filt_t(i, j) = filt(j, i);
      coeffs[k - 1] = convolve2d(img, filt);
      coeffs[k - 1 + n_scales] = convolve2d(img, filt_t);
    }
    return coeffs;
  };
  const auto cr = decompose(ref);
  const auto cd = decompose(dist);
  double num = 0.0, den = 0.0;
  for (int ori = 0; ori < 2; ++ori) {
    const auto& wr = cr[2 + ori * n_scales];
    const auto& wd = cd[2 + ori * n_scales];
    for (std::size_t i = 0; i < ref.v.size(); ++i) {
      const double w = std::max(std::abs(wr.v[i]), std::abs(wd.v[i]));
      double ls = 0.0;
      for (int s = 0; s < 2; ++s) {
        const double r = std::abs(cr[s + ori * n_scales].v[i]);
        const double d = std::abs(cd[s + ori * n_scales].v[i]);
        ls += (2 * r * d + C) / (r * r + d * d + C);
      }
      ls /= 2.0;
      num += w / (1.0 + std::exp(-alpha * ls));
      den += w;
    }
  }
  const double m = num / den;
  const double inv = std::log(m / (1 - m)) / alpha;
  return inv * inv;
}

// ----------------------------------------------------------- statistics

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

/// Rank of each element by counting: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> ranks_by_counting(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double u : v) {
      less += u < v[i];
      equal += u == v[i];
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

/// n_c - n_d via merge-sort inversion counting (Knight's algorithm), ties in
/// either vector counting as neither.
inline std::int64_t kendall_balance_mergesort(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  auto count_ties = [&](auto&& same) {
    std::int64_t t = 0, run = 1;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i < n && same(idx[i - 1], idx[i])) {
        ++run;
      } else {
        t += run * (run - 1) / 2;
        run = 1;
      }
    }
    return t;
  };
  const std::int64_t n1 = count_ties([&](std::size_t a, std::size_t b) { return x[a] == x[b]; });
  const std::int64_t n3 = count_ties([&](std::size_t a, std::size_t b) { return x[a] == x[b] && y[a] == y[b]; });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  std::int64_t swaps = 0;
  std::vector<double> buf(n);
  std::function<void(std::size_t, std::size_t)> sort = [&](std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return;
    const std::size_t mid = (lo + hi) / 2;
    sort(lo, mid);
    sort(mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
      if (ys[j] < ys[i]) {
        swaps += static_cast<std::int64_t>(mid - i);
        buf[k++] = ys[j++];
      } else {
        buf[k++] = ys[i++];
      }
    }
    while (i < mid) buf[k++] = ys[i++];
    while (j < hi) buf[k++] = ys[j++];
    std::copy(buf.begin() + lo, buf.begin() + hi, ys.begin() + lo);
  };
  sort(0, n);
  std::int64_t n2 = 0, run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && ys[i] == ys[i - 1]) {
      ++run;
    } else {
      n2 += run * (run - 1) / 2;
      run = 1;
    }
  }
  const std::int64_t n0 = static_cast<std::int64_t>(n) * (static_cast<std::int64_t>(n) - 1) / 2;
  return n0 - n1 - n2 + n3 - 2 * swaps;
}

// ---------------------------------------------------------- linear algebra

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(Mat a, std::vector<double> b) {
  const std::size_t n = a.rows;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(piv, c));
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
    x[i] = s / a(i, i);
  }
  return x;
}

/// Population standardization of columns (zero-variance columns centered only).
inline Mat standardize(const Mat& x, std::vector<double>* mean_out = nullptr, std::vector<double>* sd_out = nullptr) {
  Mat out = x;
  std::vector<double> mean(x.cols, 0.0), sd(x.cols, 0.0);
  for (std::size_t c = 0; c < x.cols; ++c) {
    for (std::size_t r = 0; r < x.rows; ++r) mean[c] += x(r, c);
    mean[c] /= static_cast<double>(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) sd[c] += (x(r, c) - mean[c]) * (x(r, c) - mean[c]);
    sd[c] = std::sqrt(sd[c] / static_cast<double>(x.rows));
    if (sd[c] == 0.0) sd[c] = 1.0;
    for (std::size_t r = 0; r < x.rows; ++r) out(r, c) = (x(r, c) - mean[c]) / sd[c];
  }
  if (mean_out) *mean_out = mean;
  if (sd_out) *sd_out = sd;
  return out;
}

/// Epsilon-SVR dual in beta = alpha - alpha^* form:
///   1/2 b^T K b - y^T b + eps * |b|_1
inline double svr_dual_objective(const Mat& k, const std::vector<double>& y, const std::vector<double>& beta,
                                 double eps) {
  double quad = 0.0, lin = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    for (std::size_t j = 0; j < beta.size(); ++j) quad += beta[i] * k(i, j) * beta[j];
    lin += y[i] * beta[i];
    l1 += std::abs(beta[i]);
  }
  return 0.5 * quad - lin + eps * l1;
}

/// Accelerated projected gradient on the 2l-variable epsilon-SVR dual
///   min 1/2 a^T Q a + p^T a,  s^T a = 0,  0 <= a <= C.
/// Projection onto the box-and-hyperplane set by bisection on the multiplier.
/// Returns beta = alpha - alpha^*.
inline std::vector<double> svr_projected_gradient(const Mat& k, const std::vector<double>& y, double C, double eps,
                                                  int iterations = 60000) {
  const std::size_t l = y.size(), m = 2 * l;
  std::vector<double> s(m), p(m);
  for (std::size_t t = 0; t < l; ++t) {
    s[t] = 1;
    s[t + l] = -1;
    p[t] = eps - y[t];
    p[t + l] = eps + y[t];
  }
  auto q = [&](std::size_t a, std::size_t b) { return s[a] * s[b] * k(a % l, b % l); };
  // Lipschitz constant bound: 2 * max row sum of |K|.
  double lip = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < l; ++j) r += std::abs(k(i, j));
    lip = std::max(lip, 2.0 * r);
  }
  auto project = [&](const std::vector<double>& v) {
    auto residual = [&](double lam) {
      double r = 0.0;
      for (std::size_t t = 0; t < m; ++t) r += s[t] * std::clamp(v[t] - lam * s[t], 0.0, C);
      return r;
    };
    double lo = -1e6, hi = 1e6;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (residual(mid) > 0 ? lo : hi) = mid;
    }
    const double lam = 0.5 * (lo + hi);
    std::vector<double> out(m);
    for (std::size_t t = 0; t < m; ++t) out[t] = std::clamp(v[t] - lam * s[t], 0.0, C);
    return out;
  };
  std::vector<double> a(m, 0.0), z = a, prev = a;
  double tk = 1.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> g(m);
    for (std::size_t i = 0; i < m; ++i) {
      double acc = p[i];
      for (std::size_t j = 0; j < m; ++j) acc += q(i, j) * z[j];
      g[i] = acc;
    }
    std::vector<double> step(m);
    for (std::size_t i = 0; i < m; ++i) step[i] = z[i] - g[i] / lip;
    prev = a;
    a = project(step);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    for (std::size_t i = 0; i < m; ++i) z[i] = a[i] + ((tk - 1.0) / tn) * (a[i] - prev[i]);
    tk = tn;
  }
  std::vector<double> beta(l);
  for (std::size_t t = 0; t < l; ++t) beta[t] = a[t] - a[t + l];
  return beta;
}

}  // namespace oracle
