#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "piano/core/errors.hpp"
#include "piano/core/rng.hpp"

namespace piano {

// Per-feature standardization statistics fitted on one matrix and applied
// to another (train stats applied to test features).
struct Standardizer {
  std::vector<double> mean, stdev;

  void fit(const std::vector<double>& X, int n, int d) {
    mean.assign(d, 0.0);
    stdev.assign(d, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j)
        mean[j] += X[static_cast<std::size_t>(i) * d + j];
    for (double& m : mean) m /= n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) {
        double t = X[static_cast<std::size_t>(i) * d + j] - mean[j];
        stdev[j] += t * t;
      }
    for (double& s : stdev) s = std::sqrt(s / n);
  }
  std::vector<double> apply(const std::vector<double>& X, int n, int d) const {
    std::vector<double> out(X.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) {
        double s = stdev[j] > 1e-12 ? stdev[j] : 1.0;
        out[static_cast<std::size_t>(i) * d + j] =
            (X[static_cast<std::size_t>(i) * d + j] - mean[j]) / s;
      }
    return out;
  }
};

// Multinomial logistic regression probe, full-batch gradient descent with
// L2 penalty on the weights.
struct LogisticProbe {
  int d = 0, k = 0;
  std::vector<double> W;  // [k, d]
  std::vector<double> b;  // [k]

  void fit(const std::vector<double>& X, const std::vector<int>& y, int n,
           int d_in, int n_classes, double l2 = 1e-3, int iters = 500,
           double lr = 0.5) {
    d = d_in;
    k = n_classes;
    W.assign(static_cast<std::size_t>(k) * d, 0.0);
    b.assign(k, 0.0);
    std::vector<double> p(k), gW(W.size()), gb(k);
    for (int it = 0; it < iters; ++it) {
      std::fill(gW.begin(), gW.end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      for (int i = 0; i < n; ++i) {
        const double* xi = X.data() + static_cast<std::size_t>(i) * d;
        softmax_row(xi, p.data());
        p[y[i]] -= 1.0;
        for (int c = 0; c < k; ++c) {
          gb[c] += p[c];
          double* gw = gW.data() + static_cast<std::size_t>(c) * d;
          for (int j = 0; j < d; ++j) gw[j] += p[c] * xi[j];
        }
      }
      double inv = 1.0 / n;
      for (std::size_t i = 0; i < W.size(); ++i)
        W[i] -= lr * (gW[i] * inv + l2 * W[i]);
      for (int c = 0; c < k; ++c) b[c] -= lr * gb[c] * inv;
    }
  }

  int predict(const double* xi) const {
    int best = 0;
    double bs = -1e300;
    for (int c = 0; c < k; ++c) {
      const double* w = W.data() + static_cast<std::size_t>(c) * d;
      double s = b[c];
      for (int j = 0; j < d; ++j) s += w[j] * xi[j];
      if (s > bs) {
        bs = s;
        best = c;
      }
    }
    return best;
  }

  double accuracy(const std::vector<double>& X, const std::vector<int>& y,
                  int n) const {
    int hit = 0;
    for (int i = 0; i < n; ++i)
      if (predict(X.data() + static_cast<std::size_t>(i) * d) == y[i]) ++hit;
    return static_cast<double>(hit) / n;
  }

 private:
  void softmax_row(const double* xi, double* p) const {
    double mx = -1e300;
    for (int c = 0; c < k; ++c) {
      const double* w = W.data() + static_cast<std::size_t>(c) * d;
      double s = b[c];
      for (int j = 0; j < d; ++j) s += w[j] * xi[j];
      p[c] = s;
      mx = std::max(mx, s);
    }
    double z = 0.0;
    for (int c = 0; c < k; ++c) z += (p[c] = std::exp(p[c] - mx));
    for (int c = 0; c < k; ++c) p[c] /= z;
  }
};

namespace detail {

// In-place Cholesky solve of the SPD system A x = rhs, A [d, d] row-major.
inline std::vector<double> cholesky_solve(std::vector<double> A,
                                          std::vector<double> rhs, int d) {
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = A[static_cast<std::size_t>(i) * d + j];
      for (int m = 0; m < j; ++m)
        s -= A[static_cast<std::size_t>(i) * d + m] *
             A[static_cast<std::size_t>(j) * d + m];
      if (i == j) {
        if (s <= 0.0) throw ConfigError("cholesky_solve: matrix not SPD");
        A[static_cast<std::size_t>(i) * d + j] = std::sqrt(s);
      } else {
        A[static_cast<std::size_t>(i) * d + j] =
            s / A[static_cast<std::size_t>(j) * d + j];
      }
    }
  }
  // Forward then backward substitution with L and L^T.
  for (int i = 0; i < d; ++i) {
    double s = rhs[i];
    for (int m = 0; m < i; ++m)
      s -= A[static_cast<std::size_t>(i) * d + m] * rhs[m];
    rhs[i] = s / A[static_cast<std::size_t>(i) * d + i];
  }
  for (int i = d - 1; i >= 0; --i) {
    double s = rhs[i];
    for (int m = i + 1; m < d; ++m)
      s -= A[static_cast<std::size_t>(m) * d + i] * rhs[m];
    rhs[i] = s / A[static_cast<std::size_t>(i) * d + i];
  }
  return rhs;
}

}  // namespace detail

// Ridge regression probe, closed form (X^T X + lambda I) w = X^T y with an
// unpenalized intercept handled by centering.
struct RidgeProbe {
  int d = 0;
  std::vector<double> w;
  double intercept = 0.0;
  std::vector<double> x_mean;
  double y_mean = 0.0;

  void fit(const std::vector<double>& X, const std::vector<double>& y, int n,
           int d_in, double lambda = 1e-3) {
    d = d_in;
    x_mean.assign(d, 0.0);
    y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j)
        x_mean[j] += X[static_cast<std::size_t>(i) * d + j];
    for (double& m : x_mean) m /= n;

    std::vector<double> A(static_cast<std::size_t>(d) * d, 0.0), rhs(d, 0.0);
    std::vector<double> xc(d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j)
        xc[j] = X[static_cast<std::size_t>(i) * d + j] - x_mean[j];
      double yc = y[i] - y_mean;
      for (int j = 0; j < d; ++j) {
        rhs[j] += xc[j] * yc;
        for (int m = j; m < d; ++m)
          A[static_cast<std::size_t>(j) * d + m] += xc[j] * xc[m];
      }
    }
    for (int j = 0; j < d; ++j) {
      A[static_cast<std::size_t>(j) * d + j] += lambda;
      for (int m = j + 1; m < d; ++m)
        A[static_cast<std::size_t>(m) * d + j] =
            A[static_cast<std::size_t>(j) * d + m];
    }
    w = detail::cholesky_solve(std::move(A), std::move(rhs), d);
    intercept = y_mean;
    for (int j = 0; j < d; ++j) intercept -= w[j] * x_mean[j];
  }

  double predict(const double* xi) const {
    double s = intercept;
    for (int j = 0; j < d; ++j) s += w[j] * xi[j];
    return s;
  }

  double mae(const std::vector<double>& X, const std::vector<double>& y,
             int n) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += std::abs(predict(X.data() + static_cast<std::size_t>(i) * d) - y[i]);
    return s / n;
  }

  double rmse(const std::vector<double>& X, const std::vector<double>& y,
              int n) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double e = predict(X.data() + static_cast<std::size_t>(i) * d) - y[i];
      s += e * e;
    }
    return std::sqrt(s / n);
  }

  // ||pred - y||_2 / ||y||_2 over the given set.
  double rel_error(const std::vector<double>& X, const std::vector<double>& y,
                   int n) const {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      double e = predict(X.data() + static_cast<std::size_t>(i) * d) - y[i];
      num += e * e;
      den += y[i] * y[i];
    }
    if (!(den > 0.0)) throw ConfigError("RidgeProbe: zero target norm");
    return std::sqrt(num / den);
  }
};

// First principal component scores via power iteration on the covariance.
inline std::vector<double> pc1_scores(const std::vector<double>& X, int n,
                                      int d, double tol = 1e-10,
                                      int max_iter = 10000) {
  std::vector<double> mean(d, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      mean[j] += X[static_cast<std::size_t>(i) * d + j];
  for (double& m : mean) m /= n;
  std::vector<double> Xc(X.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      Xc[static_cast<std::size_t>(i) * d + j] =
          X[static_cast<std::size_t>(i) * d + j] - mean[j];

  std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
  std::vector<double> t(n), next(d);
  for (int it = 0; it < max_iter; ++it) {
    // next = Xc^T (Xc v) without forming the covariance.
    for (int i = 0; i < n; ++i) {
      const double* xi = Xc.data() + static_cast<std::size_t>(i) * d;
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += xi[j] * v[j];
      t[i] = s;
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      const double* xi = Xc.data() + static_cast<std::size_t>(i) * d;
      for (int j = 0; j < d; ++j) next[j] += xi[j] * t[i];
    }
    double nrm = 0.0;
    for (double x : next) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0)) break;
    double delta = 0.0;
    for (int j = 0; j < d; ++j) {
      next[j] /= nrm;
      delta = std::max(delta, std::abs(next[j] - v[j]));
    }
    // Sign flips alternate for negative eigenvalues; covariance is PSD so
    // plain convergence is fine.
    v.swap(next);
    if (delta < tol) break;
  }
  std::vector<double> scores(n);
  for (int i = 0; i < n; ++i) {
    const double* xi = Xc.data() + static_cast<std::size_t>(i) * d;
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += xi[j] * v[j];
    scores[i] = s;
  }
  return scores;
}

inline double pearson_correlation(const std::vector<double>& x,
                                  const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConfigError("pearson_correlation: bad input sizes");
  const int n = static_cast<int>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    double a = x[i] - mx, b = y[i] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw ConfigError("pearson_correlation: zero-variance input");
  return sxy / std::sqrt(sxx * syy);
}

// Fractional ranks with ties sharing their average rank.
inline std::vector<double> fractional_ranks(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    double r = 0.5 * (i + j) + 1.0;
    for (int m = i; m <= j; ++m) ranks[idx[m]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double spearman_correlation(const std::vector<double>& x,
                                   const std::vector<double>& y) {
  return pearson_correlation(fractional_ranks(x), fractional_ranks(y));
}

}  // namespace piano
