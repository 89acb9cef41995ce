#pragma once

#include <complex>
#include <vector>

#include "piano/core/fft.hpp"
#include "piano/nn/param.hpp"

// Batched layer primitives with hand-written backward passes. Tensors are
// flat row-major std::vector<double>:
//   fields 1D: [B, C, N], fields 2D: [B, C, N1, N2], flat: [B, F].
// forward() caches whatever backward() needs; one batch in flight at a time.

namespace piano::nn {

using cplx = std::complex<double>;

class Linear {
 public:
  Linear(std::string name, int in, int out, Rng& rng)
      : in_(in), out_(out), W(name + ".W", {out, in}), b(name + ".b", {out}) {
    init_fan_in(W, in, rng);
    init_fan_in(b, in, rng);
  }

  std::vector<double> forward(const std::vector<double>& x, int B) {
    x_ = x;
    std::vector<double> y(static_cast<std::size_t>(B) * out_);
    for (int bi = 0; bi < B; ++bi) {
      const double* xr = x.data() + static_cast<std::size_t>(bi) * in_;
      double* yr = y.data() + static_cast<std::size_t>(bi) * out_;
      for (int o = 0; o < out_; ++o) {
        const double* wr = W.v.data() + static_cast<std::size_t>(o) * in_;
        double s = b.v[o];
        for (int i = 0; i < in_; ++i) s += wr[i] * xr[i];
        yr[o] = s;
      }
    }
    return y;
  }

  std::vector<double> backward(const std::vector<double>& gy, int B) {
    std::vector<double> gx(static_cast<std::size_t>(B) * in_, 0.0);
    for (int bi = 0; bi < B; ++bi) {
      const double* xr = x_.data() + static_cast<std::size_t>(bi) * in_;
      const double* gr = gy.data() + static_cast<std::size_t>(bi) * out_;
      double* gxr = gx.data() + static_cast<std::size_t>(bi) * in_;
      for (int o = 0; o < out_; ++o) {
        const double g = gr[o];
        b.g[o] += g;
        double* wg = W.g.data() + static_cast<std::size_t>(o) * in_;
        const double* wr = W.v.data() + static_cast<std::size_t>(o) * in_;
        for (int i = 0; i < in_; ++i) {
          wg[i] += g * xr[i];
          gxr[i] += g * wr[i];
        }
      }
    }
    return gx;
  }

  ParamRefs params() { return {&W, &b}; }
  int in() const { return in_; }
  int out() const { return out_; }

 private:
  int in_, out_;

 public:
  Param W, b;

 private:
  std::vector<double> x_;
};

// Channel mixing applied independently at each spatial point (1x1 conv).
class PointwiseLinear {
 public:
  PointwiseLinear(std::string name, int cin, int cout, Rng& rng)
      : cin_(cin), cout_(cout), W(name + ".W", {cout, cin}),
        b(name + ".b", {cout}) {
    init_fan_in(W, cin, rng);
    init_fan_in(b, cin, rng);
  }

  std::vector<double> forward(const std::vector<double>& x, int B, int S) {
    x_ = x;
    S_ = S;
    std::vector<double> y(static_cast<std::size_t>(B) * cout_ * S);
    for (int bi = 0; bi < B; ++bi) {
      const double* xb = x.data() + static_cast<std::size_t>(bi) * cin_ * S;
      double* yb = y.data() + static_cast<std::size_t>(bi) * cout_ * S;
      for (int o = 0; o < cout_; ++o) {
        double* yr = yb + static_cast<std::size_t>(o) * S;
        for (int s = 0; s < S; ++s) yr[s] = b.v[o];
        for (int c = 0; c < cin_; ++c) {
          const double w = W.v[static_cast<std::size_t>(o) * cin_ + c];
          const double* xr = xb + static_cast<std::size_t>(c) * S;
          for (int s = 0; s < S; ++s) yr[s] += w * xr[s];
        }
      }
    }
    return y;
  }

  std::vector<double> backward(const std::vector<double>& gy, int B) {
    const int S = S_;
    std::vector<double> gx(static_cast<std::size_t>(B) * cin_ * S, 0.0);
    for (int bi = 0; bi < B; ++bi) {
      const double* xb = x_.data() + static_cast<std::size_t>(bi) * cin_ * S;
      const double* gb = gy.data() + static_cast<std::size_t>(bi) * cout_ * S;
      double* gxb = gx.data() + static_cast<std::size_t>(bi) * cin_ * S;
      for (int o = 0; o < cout_; ++o) {
        const double* gr = gb + static_cast<std::size_t>(o) * S;
        for (int s = 0; s < S; ++s) b.g[o] += gr[s];
        for (int c = 0; c < cin_; ++c) {
          const double w = W.v[static_cast<std::size_t>(o) * cin_ + c];
          const double* xr = xb + static_cast<std::size_t>(c) * S;
          double* gxr = gxb + static_cast<std::size_t>(c) * S;
          double wg = 0.0;
          for (int s = 0; s < S; ++s) {
            wg += gr[s] * xr[s];
            gxr[s] += gr[s] * w;
          }
          W.g[static_cast<std::size_t>(o) * cin_ + c] += wg;
        }
      }
    }
    return gx;
  }

  ParamRefs params() { return {&W, &b}; }

  Param W, b;

 private:
  int cin_, cout_, S_ = 0;
  std::vector<double> x_;
};

// Elementwise GeLU with cached pre-activation.
class GeluStage {
 public:
  std::vector<double> forward(std::vector<double> x) {
    pre_ = x;
    for (auto& v : x) v = gelu(v);
    return x;
  }
  std::vector<double> backward(std::vector<double> gy) {
    for (std::size_t i = 0; i < gy.size(); ++i) gy[i] *= gelu_grad(pre_[i]);
    return gy;
  }

 private:
  std::vector<double> pre_;
};

// 1D convolution, kernel 3, stride 2, zero pad 1. N must be even.
class Conv1dK3S2 {
 public:
  Conv1dK3S2(std::string name, int cin, int cout, Rng& rng)
      : cin_(cin), cout_(cout), W(name + ".W", {cout, cin, 3}),
        b(name + ".b", {cout}) {
    init_fan_in(W, cin * 3, rng);
    init_fan_in(b, cin * 3, rng);
  }

  std::vector<double> forward(const std::vector<double>& x, int B, int N) {
    if (N % 2 != 0) throw ConfigError("Conv1dK3S2: N must be even");
    x_ = x;
    N_ = N;
    const int P = N / 2;
    std::vector<double> y(static_cast<std::size_t>(B) * cout_ * P);
    for (int bi = 0; bi < B; ++bi) {
      const double* xb = x.data() + static_cast<std::size_t>(bi) * cin_ * N;
      double* yb = y.data() + static_cast<std::size_t>(bi) * cout_ * P;
      for (int o = 0; o < cout_; ++o) {
        double* yr = yb + static_cast<std::size_t>(o) * P;
        for (int p = 0; p < P; ++p) yr[p] = b.v[o];
        for (int c = 0; c < cin_; ++c) {
          const double* xr = xb + static_cast<std::size_t>(c) * N;
          const double* w = W.v.data() + (static_cast<std::size_t>(o) * cin_ + c) * 3;
          for (int p = 0; p < P; ++p) {
            int base = 2 * p - 1;
            double s = 0.0;
            if (base >= 0) s += w[0] * xr[base];
            s += w[1] * xr[base + 1];
            s += w[2] * xr[base + 2];
            yr[p] += s;
          }
        }
      }
    }
    return y;
  }

  std::vector<double> backward(const std::vector<double>& gy, int B) {
    const int N = N_, P = N / 2;
    std::vector<double> gx(static_cast<std::size_t>(B) * cin_ * N, 0.0);
    for (int bi = 0; bi < B; ++bi) {
      const double* xb = x_.data() + static_cast<std::size_t>(bi) * cin_ * N;
      const double* gb = gy.data() + static_cast<std::size_t>(bi) * cout_ * P;
      double* gxb = gx.data() + static_cast<std::size_t>(bi) * cin_ * N;
      for (int o = 0; o < cout_; ++o) {
        const double* gr = gb + static_cast<std::size_t>(o) * P;
        for (int p = 0; p < P; ++p) b.g[o] += gr[p];
        for (int c = 0; c < cin_; ++c) {
          const double* xr = xb + static_cast<std::size_t>(c) * N;
          double* gxr = gxb + static_cast<std::size_t>(c) * N;
          const std::size_t wbase = (static_cast<std::size_t>(o) * cin_ + c) * 3;
          const double* w = W.v.data() + wbase;
          double* wg = W.g.data() + wbase;
          for (int p = 0; p < P; ++p) {
            const double g = gr[p];
            int base = 2 * p - 1;
            if (base >= 0) {
              wg[0] += g * xr[base];
              gxr[base] += g * w[0];
            }
            wg[1] += g * xr[base + 1];
            gxr[base + 1] += g * w[1];
            wg[2] += g * xr[base + 2];
            gxr[base + 2] += g * w[2];
          }
        }
      }
    }
    return gx;
  }

  ParamRefs params() { return {&W, &b}; }

  Param W, b;

 private:
  int cin_, cout_, N_ = 0;
  std::vector<double> x_;
};

// 2D convolution, kernel 3x3, stride 2, zero pad 1, square input.
class Conv2dK3S2 {
 public:
  Conv2dK3S2(std::string name, int cin, int cout, Rng& rng)
      : cin_(cin), cout_(cout), W(name + ".W", {cout, cin, 3, 3}),
        b(name + ".b", {cout}) {
    init_fan_in(W, cin * 9, rng);
    init_fan_in(b, cin * 9, rng);
  }

  std::vector<double> forward(const std::vector<double>& x, int B, int N) {
    if (N % 2 != 0) throw ConfigError("Conv2dK3S2: N must be even");
    x_ = x;
    N_ = N;
    const int P = N / 2;
    std::vector<double> y(static_cast<std::size_t>(B) * cout_ * P * P);
    for (int bi = 0; bi < B; ++bi) {
      const double* xb = x.data() + static_cast<std::size_t>(bi) * cin_ * N * N;
      double* yb = y.data() + static_cast<std::size_t>(bi) * cout_ * P * P;
      for (int o = 0; o < cout_; ++o) {
        double* yp = yb + static_cast<std::size_t>(o) * P * P;
        for (int i = 0; i < P * P; ++i) yp[i] = b.v[o];
        for (int c = 0; c < cin_; ++c) {
          const double* xp = xb + static_cast<std::size_t>(c) * N * N;
          const double* w =
              W.v.data() + (static_cast<std::size_t>(o) * cin_ + c) * 9;
          for (int pr = 0; pr < P; ++pr) {
            for (int pc = 0; pc < P; ++pc) {
              double s = 0.0;
              for (int dr = 0; dr < 3; ++dr) {
                int r = 2 * pr + dr - 1;
                if (r < 0 || r >= N) continue;
                for (int dc = 0; dc < 3; ++dc) {
                  int cc = 2 * pc + dc - 1;
                  if (cc < 0 || cc >= N) continue;
                  s += w[dr * 3 + dc] * xp[static_cast<std::size_t>(r) * N + cc];
                }
              }
              yp[static_cast<std::size_t>(pr) * P + pc] += s;
            }
          }
        }
      }
    }
    return y;
  }

  std::vector<double> backward(const std::vector<double>& gy, int B) {
    const int N = N_, P = N / 2;
    std::vector<double> gx(static_cast<std::size_t>(B) * cin_ * N * N, 0.0);
    for (int bi = 0; bi < B; ++bi) {
      const double* xb = x_.data() + static_cast<std::size_t>(bi) * cin_ * N * N;
      const double* gb = gy.data() + static_cast<std::size_t>(bi) * cout_ * P * P;
      double* gxb = gx.data() + static_cast<std::size_t>(bi) * cin_ * N * N;
      for (int o = 0; o < cout_; ++o) {
        const double* gp = gb + static_cast<std::size_t>(o) * P * P;
        for (int i = 0; i < P * P; ++i) b.g[o] += gp[i];
        for (int c = 0; c < cin_; ++c) {
          const double* xp = xb + static_cast<std::size_t>(c) * N * N;
          double* gxp = gxb + static_cast<std::size_t>(c) * N * N;
          const std::size_t wbase = (static_cast<std::size_t>(o) * cin_ + c) * 9;
          const double* w = W.v.data() + wbase;
          double* wg = W.g.data() + wbase;
          for (int pr = 0; pr < P; ++pr) {
            for (int pc = 0; pc < P; ++pc) {
              const double g = gp[static_cast<std::size_t>(pr) * P + pc];
              for (int dr = 0; dr < 3; ++dr) {
                int r = 2 * pr + dr - 1;
                if (r < 0 || r >= N) continue;
                for (int dc = 0; dc < 3; ++dc) {
                  int cc = 2 * pc + dc - 1;
                  if (cc < 0 || cc >= N) continue;
                  wg[dr * 3 + dc] += g * xp[static_cast<std::size_t>(r) * N + cc];
                  gxp[static_cast<std::size_t>(r) * N + cc] += g * w[dr * 3 + dc];
                }
              }
            }
          }
        }
      }
    }
    return gx;
  }

  ParamRefs params() { return {&W, &b}; }

  Param W, b;

 private:
  int cin_, cout_, N_ = 0;
  std::vector<double> x_;
};

}  // namespace piano::nn
