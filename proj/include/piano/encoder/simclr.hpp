#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "piano/core/errors.hpp"

namespace piano {

// Contrastive loss over two batches of projected vectors Z1, Z2 (each
// [B, d], row-major). For each anchor the positive is the other view of the
// same sample; the denominator sums over both views of all other samples
// (j != i). sim is cosine similarity; the result carries the 1/(2B) factor.
//
// include_positive adds the positive-pair term to each denominator (the
// canonical SimCLR normalization).
struct SimclrGrad {
  double loss = 0.0;
  std::vector<double> g1, g2;  // d(loss)/dZ1, d(loss)/dZ2
};

namespace detail {

struct SimclrWork {
  int B, d;
  std::vector<double> norm1, norm2;  // vector norms
  std::vector<double> n1, n2;        // normalized rows
  // sim[v][w] is a BxB matrix of cosine similarities between view v and w.
  std::vector<double> s11, s12, s21, s22;
};

inline void normalize_rows(const std::vector<double>& Z, int B, int d,
                           std::vector<double>& out, std::vector<double>& nrm) {
  out.resize(static_cast<std::size_t>(B) * d);
  nrm.resize(B);
  for (int i = 0; i < B; ++i) {
    const double* z = Z.data() + static_cast<std::size_t>(i) * d;
    double s = 0.0;
    for (int k = 0; k < d; ++k) s += z[k] * z[k];
    s = std::sqrt(s);
    if (!(s > 0.0))
      throw std::domain_error("simclr_loss: zero-norm vector at row " +
                              std::to_string(i));
    nrm[i] = s;
    double* o = out.data() + static_cast<std::size_t>(i) * d;
    for (int k = 0; k < d; ++k) o[k] = z[k] / s;
  }
}

inline void gram(const std::vector<double>& A, const std::vector<double>& Bm,
                 int B, int d, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(B) * B, 0.0);
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < B; ++j) {
      const double* a = A.data() + static_cast<std::size_t>(i) * d;
      const double* b = Bm.data() + static_cast<std::size_t>(j) * d;
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += a[k] * b[k];
      out[static_cast<std::size_t>(i) * B + j] = s;
    }
}

inline SimclrWork simclr_prepare(const std::vector<double>& Z1,
                                 const std::vector<double>& Z2, int B, int d) {
  if (B < 2) throw ConfigError("simclr_loss: batch must be >= 2");
  SimclrWork w;
  w.B = B;
  w.d = d;
  normalize_rows(Z1, B, d, w.n1, w.norm1);
  normalize_rows(Z2, B, d, w.n2, w.norm2);
  gram(w.n1, w.n1, B, d, w.s11);
  gram(w.n1, w.n2, B, d, w.s12);
  gram(w.n2, w.n1, B, d, w.s21);
  gram(w.n2, w.n2, B, d, w.s22);
  return w;
}

}  // namespace detail

inline double simclr_loss(const std::vector<double>& Z1,
                          const std::vector<double>& Z2, int B, int d,
                          double tau, bool include_positive = false) {
  auto w = detail::simclr_prepare(Z1, Z2, B, d);
  double loss = 0.0;
  for (int i = 0; i < B; ++i) {
    double pos = w.s12[static_cast<std::size_t>(i) * B + i] / tau;
    double d1 = 0.0, d2 = 0.0;
    for (int j = 0; j < B; ++j) {
      if (j == i) continue;
      d1 += std::exp(w.s11[static_cast<std::size_t>(i) * B + j] / tau) +
            std::exp(w.s12[static_cast<std::size_t>(i) * B + j] / tau);
      d2 += std::exp(w.s21[static_cast<std::size_t>(i) * B + j] / tau) +
            std::exp(w.s22[static_cast<std::size_t>(i) * B + j] / tau);
    }
    if (include_positive) {
      d1 += std::exp(pos);
      d2 += std::exp(pos);
    }
    loss += -(pos - std::log(d1)) - (pos - std::log(d2));
  }
  return loss / (2.0 * B);
}

// Loss plus analytic gradients with respect to the unnormalized vectors.
inline SimclrGrad simclr_loss_grad(const std::vector<double>& Z1,
                                   const std::vector<double>& Z2, int B, int d,
                                   double tau,
                                   bool include_positive = false) {
  auto w = detail::simclr_prepare(Z1, Z2, B, d);
  // dL/ds accumulators for the four view-pair similarity matrices.
  std::vector<double> g11(w.s11.size(), 0.0), g12(w.s12.size(), 0.0),
      g21(w.s21.size(), 0.0), g22(w.s22.size(), 0.0);
  const double inv = 1.0 / (2.0 * B * tau);
  double loss = 0.0;
  for (int i = 0; i < B; ++i) {
    double pos = w.s12[static_cast<std::size_t>(i) * B + i] / tau;
    double d1 = 0.0, d2 = 0.0;
    for (int j = 0; j < B; ++j) {
      if (j == i) continue;
      d1 += std::exp(w.s11[static_cast<std::size_t>(i) * B + j] / tau) +
            std::exp(w.s12[static_cast<std::size_t>(i) * B + j] / tau);
      d2 += std::exp(w.s21[static_cast<std::size_t>(i) * B + j] / tau) +
            std::exp(w.s22[static_cast<std::size_t>(i) * B + j] / tau);
    }
    if (include_positive) {
      d1 += std::exp(pos);
      d2 += std::exp(pos);
    }
    loss += -(pos - std::log(d1)) - (pos - std::log(d2));
    g12[static_cast<std::size_t>(i) * B + i] -= 2.0 * inv;
    for (int j = 0; j < B; ++j) {
      if (j == i) continue;
      g11[static_cast<std::size_t>(i) * B + j] +=
          inv * std::exp(w.s11[static_cast<std::size_t>(i) * B + j] / tau) / d1;
      g12[static_cast<std::size_t>(i) * B + j] +=
          inv * std::exp(w.s12[static_cast<std::size_t>(i) * B + j] / tau) / d1;
      g21[static_cast<std::size_t>(i) * B + j] +=
          inv * std::exp(w.s21[static_cast<std::size_t>(i) * B + j] / tau) / d2;
      g22[static_cast<std::size_t>(i) * B + j] +=
          inv * std::exp(w.s22[static_cast<std::size_t>(i) * B + j] / tau) / d2;
    }
    if (include_positive) {
      g12[static_cast<std::size_t>(i) * B + i] +=
          inv * std::exp(pos) * (1.0 / d1 + 1.0 / d2);
    }
  }

  SimclrGrad out;
  out.loss = loss / (2.0 * B);
  out.g1.assign(static_cast<std::size_t>(B) * d, 0.0);
  out.g2.assign(static_cast<std::size_t>(B) * d, 0.0);
  // Chain through s(a,b) = n_a . n_b with n = z/|z|:
  //   ds/dz_a = (n_b - s n_a)/|z_a|.
  auto accum = [&](const std::vector<double>& gs,
                   const std::vector<double>& na,
                   const std::vector<double>& nb,
                   const std::vector<double>& norm_a,
                   const std::vector<double>& norm_b,
                   const std::vector<double>& s, std::vector<double>& ga,
                   std::vector<double>& gb) {
    for (int i = 0; i < B; ++i) {
      for (int j = 0; j < B; ++j) {
        double g = gs[static_cast<std::size_t>(i) * B + j];
        if (g == 0.0) continue;
        double sij = s[static_cast<std::size_t>(i) * B + j];
        const double* ai = na.data() + static_cast<std::size_t>(i) * d;
        const double* bj = nb.data() + static_cast<std::size_t>(j) * d;
        double* gi = ga.data() + static_cast<std::size_t>(i) * d;
        double* gj = gb.data() + static_cast<std::size_t>(j) * d;
        double ia = g / norm_a[i], ib = g / norm_b[j];
        for (int k = 0; k < d; ++k) {
          gi[k] += ia * (bj[k] - sij * ai[k]);
          gj[k] += ib * (ai[k] - sij * bj[k]);
        }
      }
    }
  };
  accum(g11, w.n1, w.n1, w.norm1, w.norm1, w.s11, out.g1, out.g1);
  accum(g12, w.n1, w.n2, w.norm1, w.norm2, w.s12, out.g1, out.g2);
  accum(g21, w.n2, w.n1, w.norm2, w.norm1, w.s21, out.g2, out.g1);
  accum(g22, w.n2, w.n2, w.norm2, w.norm2, w.s22, out.g2, out.g2);
  return out;
}

}  // namespace piano
