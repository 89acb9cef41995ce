#pragma once

#include <complex>
#include <vector>

#include "piano/core/fft.hpp"
#include "piano/nn/param.hpp"

// Spectral (Fourier) convolution primitives. The forward map keeps the
// lowest `modes` coefficients, mixes channels with learned complex weights
// and transforms back to a real field. Both directions and their adjoints
// are realized with the radix-2 FFT.
//
// 1D field of size N, modes M <= N/2:
//   y_n = (1/N) Re[ sum_{m<M} c_m S_m e^{2 pi i m n / N} ],  c_0=1, c_m=2.
// 2D field N x N: kept modes are the two corner blocks k1 in [0,M) and
// [N-M,N), k2 in [0,M) of the half spectrum; c depends on k2 only.

namespace piano::nn {

inline void check_modes(int N, int M, const char* who) {
  if (M < 1 || M > N / 2)
    throw ConfigError(std::string(who) + ": modes must lie in [1, N/2]");
}

// ---- 1D transform helpers ----

inline void fft_kept_1d(const double* x, int N, int M, cplx* out) {
  std::vector<cplx> buf(x, x + N);
  fft::transform(buf.data(), N, false);
  for (int m = 0; m < M; ++m) out[m] = buf[m];
}

inline void ifft_kept_1d(const cplx* S, int N, int M, double* y) {
  std::vector<cplx> buf(N, cplx(0.0, 0.0));
  buf[0] = S[0];
  for (int m = 1; m < M; ++m) buf[m] = 2.0 * S[m];
  fft::transform(buf.data(), N, true);
  for (int n = 0; n < N; ++n) y[n] = buf[n].real();
}

// Adjoint of ifft_kept_1d: dS_m = (c_m / N) (fft gy)_m.
inline void ifft_kept_adjoint_1d(const double* gy, int N, int M, cplx* dS) {
  std::vector<cplx> buf(gy, gy + N);
  fft::transform(buf.data(), N, false);
  const double invn = 1.0 / N;
  dS[0] = buf[0] * invn;
  for (int m = 1; m < M; ++m) dS[m] = buf[m] * (2.0 * invn);
}

// Adjoint of fft_kept_1d: gx_n += Re[ sum_m dX_m e^{2 pi i m n / N} ].
inline void fft_kept_adjoint_1d(const cplx* dX, int N, int M, double* gx) {
  std::vector<cplx> buf(N, cplx(0.0, 0.0));
  for (int m = 0; m < M; ++m) buf[m] = dX[m];
  fft::transform(buf.data(), N, true);
  for (int n = 0; n < N; ++n) gx[n] += buf[n].real() * N;
}

// ---- 2D transform helpers (kept set size 2*M*M) ----
// Kept index layout: [blk in {0,1}][m1 in 0..M)[m2 in 0..M), where blk 0
// maps to k1 = m1 and blk 1 to k1 = N - M + m1.

inline int kept_count_2d(int M) { return 2 * M * M; }

inline void fft_kept_2d(const double* x, int N, int M, cplx* out) {
  std::vector<cplx> buf(x, x + static_cast<std::size_t>(N) * N);
  fft::transform2(buf.data(), N, N, false);
  int idx = 0;
  for (int blk = 0; blk < 2; ++blk)
    for (int m1 = 0; m1 < M; ++m1) {
      int k1 = blk == 0 ? m1 : N - M + m1;
      for (int m2 = 0; m2 < M; ++m2)
        out[idx++] = buf[static_cast<std::size_t>(k1) * N + m2];
    }
}

inline void ifft_kept_2d(const cplx* S, int N, int M, double* y) {
  std::vector<cplx> buf(static_cast<std::size_t>(N) * N, cplx(0.0, 0.0));
  int idx = 0;
  for (int blk = 0; blk < 2; ++blk)
    for (int m1 = 0; m1 < M; ++m1) {
      int k1 = blk == 0 ? m1 : N - M + m1;
      for (int m2 = 0; m2 < M; ++m2, ++idx)
        buf[static_cast<std::size_t>(k1) * N + m2] =
            (m2 == 0 ? 1.0 : 2.0) * S[idx];
    }
  fft::transform2(buf.data(), N, N, true);
  for (std::size_t n = 0; n < buf.size(); ++n) y[n] = buf[n].real();
}

inline void ifft_kept_adjoint_2d(const double* gy, int N, int M, cplx* dS) {
  std::vector<cplx> buf(gy, gy + static_cast<std::size_t>(N) * N);
  fft::transform2(buf.data(), N, N, false);
  const double invn2 = 1.0 / (static_cast<double>(N) * N);
  int idx = 0;
  for (int blk = 0; blk < 2; ++blk)
    for (int m1 = 0; m1 < M; ++m1) {
      int k1 = blk == 0 ? m1 : N - M + m1;
      for (int m2 = 0; m2 < M; ++m2, ++idx)
        dS[idx] = buf[static_cast<std::size_t>(k1) * N + m2] *
                  ((m2 == 0 ? 1.0 : 2.0) * invn2);
    }
}

inline void fft_kept_adjoint_2d(const cplx* dX, int N, int M, double* gx) {
  std::vector<cplx> buf(static_cast<std::size_t>(N) * N, cplx(0.0, 0.0));
  int idx = 0;
  for (int blk = 0; blk < 2; ++blk)
    for (int m1 = 0; m1 < M; ++m1) {
      int k1 = blk == 0 ? m1 : N - M + m1;
      for (int m2 = 0; m2 < M; ++m2, ++idx)
        buf[static_cast<std::size_t>(k1) * N + m2] = dX[idx];
    }
  fft::transform2(buf.data(), N, N, true);
  const double n2 = static_cast<double>(N) * N;
  for (std::size_t n = 0; n < buf.size(); ++n) gx[n] += buf[n].real() * n2;
}

// ---- mixing core shared by static and dynamic layers ----
// X: [cin, K] kept coefficients, W: interleaved re/im [cout, cin, K],
// S: [cout, K].
inline void mix_forward(const double* wre, const double* wim, const cplx* X,
                        int cin, int cout, int K, cplx* S) {
  for (int o = 0; o < cout; ++o) {
    cplx* So = S + static_cast<std::size_t>(o) * K;
    for (int k = 0; k < K; ++k) So[k] = 0.0;
    for (int c = 0; c < cin; ++c) {
      const std::size_t wb = (static_cast<std::size_t>(o) * cin + c) * K;
      const cplx* Xc = X + static_cast<std::size_t>(c) * K;
      for (int k = 0; k < K; ++k)
        So[k] += cplx(wre[wb + k], wim[wb + k]) * Xc[k];
    }
  }
}

// Accumulates dW into (dwre, dwim) and writes dX (overwrites).
inline void mix_backward(const double* wre, const double* wim, const cplx* X,
                         const cplx* dS, int cin, int cout, int K,
                         double* dwre, double* dwim, cplx* dX) {
  for (int c = 0; c < cin; ++c)
    for (int k = 0; k < K; ++k) dX[static_cast<std::size_t>(c) * K + k] = 0.0;
  for (int o = 0; o < cout; ++o) {
    const cplx* dSo = dS + static_cast<std::size_t>(o) * K;
    for (int c = 0; c < cin; ++c) {
      const std::size_t wb = (static_cast<std::size_t>(o) * cin + c) * K;
      const cplx* Xc = X + static_cast<std::size_t>(c) * K;
      cplx* dXc = dX + static_cast<std::size_t>(c) * K;
      for (int k = 0; k < K; ++k) {
        cplx w(wre[wb + k], wim[wb + k]);
        cplx dw = std::conj(Xc[k]) * dSo[k];
        dwre[wb + k] += dw.real();
        dwim[wb + k] += dw.imag();
        dXc[k] += std::conj(w) * dSo[k];
      }
    }
  }
}

// Static spectral convolution; dim = 1 or 2 selects the transform pair.
template <int DIM>
class SpectralConv {
  static_assert(DIM == 1 || DIM == 2);

 public:
  SpectralConv(std::string name, int cin, int cout, int modes, Rng& rng)
      : cin_(cin), cout_(cout), modes_(modes),
        kept_(DIM == 1 ? modes : kept_count_2d(modes)),
        Wre(name + ".Wre",
            DIM == 1 ? std::vector<int>{cout, cin, modes}
                     : std::vector<int>{cout, cin, 2, modes, modes}),
        Wim(name + ".Wim", Wre.shape) {
    init_spectral(Wre, cin, cout, rng);
    init_spectral(Wim, cin, cout, rng);
  }

  // x: [B, cin, spatial]; N is the per-axis size.
  std::vector<double> forward(const std::vector<double>& x, int B, int N) {
    check_modes(N, modes_, "SpectralConv");
    N_ = N;
    const int sp = spatial(N);
    X_.assign(static_cast<std::size_t>(B) * cin_ * kept_, cplx(0.0, 0.0));
    std::vector<double> y(static_cast<std::size_t>(B) * cout_ * sp);
    std::vector<cplx> S(static_cast<std::size_t>(cout_) * kept_);
    for (int bi = 0; bi < B; ++bi) {
      cplx* Xb = X_.data() + static_cast<std::size_t>(bi) * cin_ * kept_;
      for (int c = 0; c < cin_; ++c)
        gather(x.data() + (static_cast<std::size_t>(bi) * cin_ + c) * sp, N,
               Xb + static_cast<std::size_t>(c) * kept_);
      mix_forward(Wre.v.data(), Wim.v.data(), Xb, cin_, cout_, kept_, S.data());
      for (int o = 0; o < cout_; ++o)
        scatter(S.data() + static_cast<std::size_t>(o) * kept_, N,
                y.data() + (static_cast<std::size_t>(bi) * cout_ + o) * sp);
    }
    return y;
  }

  std::vector<double> backward(const std::vector<double>& gy, int B) {
    const int N = N_, sp = spatial(N);
    std::vector<double> gx(static_cast<std::size_t>(B) * cin_ * sp, 0.0);
    std::vector<cplx> dS(static_cast<std::size_t>(cout_) * kept_);
    std::vector<cplx> dX(static_cast<std::size_t>(cin_) * kept_);
    for (int bi = 0; bi < B; ++bi) {
      const cplx* Xb = X_.data() + static_cast<std::size_t>(bi) * cin_ * kept_;
      for (int o = 0; o < cout_; ++o)
        scatter_adjoint(
            gy.data() + (static_cast<std::size_t>(bi) * cout_ + o) * sp, N,
            dS.data() + static_cast<std::size_t>(o) * kept_);
      mix_backward(Wre.v.data(), Wim.v.data(), Xb, dS.data(), cin_, cout_,
                   kept_, Wre.g.data(), Wim.g.data(), dX.data());
      for (int c = 0; c < cin_; ++c)
        gather_adjoint(dX.data() + static_cast<std::size_t>(c) * kept_, N,
                       gx.data() + (static_cast<std::size_t>(bi) * cin_ + c) * sp);
    }
    return gx;
  }

  ParamRefs params() { return {&Wre, &Wim}; }
  int modes() const { return modes_; }

  Param Wre, Wim;

 private:
  static int spatial(int N) { return DIM == 1 ? N : N * N; }
  void gather(const double* x, int N, cplx* out) const {
    if constexpr (DIM == 1) fft_kept_1d(x, N, modes_, out);
    else fft_kept_2d(x, N, modes_, out);
  }
  void scatter(const cplx* S, int N, double* y) const {
    if constexpr (DIM == 1) ifft_kept_1d(S, N, modes_, y);
    else ifft_kept_2d(S, N, modes_, y);
  }
  void scatter_adjoint(const double* gy, int N, cplx* dS) const {
    if constexpr (DIM == 1) ifft_kept_adjoint_1d(gy, N, modes_, dS);
    else ifft_kept_adjoint_2d(gy, N, modes_, dS);
  }
  void gather_adjoint(const cplx* dX, int N, double* gx) const {
    if constexpr (DIM == 1) fft_kept_adjoint_1d(dX, N, modes_, gx);
    else fft_kept_adjoint_2d(dX, N, modes_, gx);
  }

  int cin_, cout_, modes_, kept_, N_ = 0;
  std::vector<cplx> X_;
};

using SpectralConv1d = SpectralConv<1>;
using SpectralConv2d = SpectralConv<2>;

// Spectral convolution whose complex weights are an attention-weighted sum
// over a bank of K kernels (the dynamic first layer).
template <int DIM>
class DynamicSpectralConv {
 public:
  DynamicSpectralConv(std::string name, int cin, int cout, int modes,
                      int n_kernels, Rng& rng)
      : cin_(cin), cout_(cout), modes_(modes), K_(n_kernels),
        kept_(DIM == 1 ? modes : kept_count_2d(modes)) {
    if (n_kernels < 1) throw ConfigError("DynamicSpectralConv: K must be >= 1");
    bank_re_.reserve(K_);
    bank_im_.reserve(K_);
    for (int k = 0; k < K_; ++k) {
      std::vector<int> sh = DIM == 1
                                ? std::vector<int>{cout, cin, modes}
                                : std::vector<int>{cout, cin, 2, modes, modes};
      bank_re_.emplace_back(name + ".bank" + std::to_string(k) + ".Wre", sh);
      bank_im_.emplace_back(name + ".bank" + std::to_string(k) + ".Wim", sh);
      init_spectral(bank_re_.back(), cin, cout, rng);
      init_spectral(bank_im_.back(), cin, cout, rng);
    }
  }

  // Elementwise weighted sum of the bank; a has K entries.
  void assemble(const double* a, std::vector<double>& wre,
                std::vector<double>& wim) const {
    const std::size_t sz = bank_re_[0].size();
    wre.assign(sz, 0.0);
    wim.assign(sz, 0.0);
    for (int k = 0; k < K_; ++k) {
      const double ak = a[k];
      for (std::size_t i = 0; i < sz; ++i) {
        wre[i] += ak * bank_re_[k].v[i];
        wim[i] += ak * bank_im_[k].v[i];
      }
    }
  }

  // x: [B, cin, spatial], a: [B, K].
  std::vector<double> forward(const std::vector<double>& x, int B, int N,
                              const std::vector<double>& a) {
    check_modes(N, modes_, "DynamicSpectralConv");
    N_ = N;
    a_ = a;
    const int sp = spatial(N);
    X_.assign(static_cast<std::size_t>(B) * cin_ * kept_, cplx(0.0, 0.0));
    std::vector<double> y(static_cast<std::size_t>(B) * cout_ * sp);
    std::vector<cplx> S(static_cast<std::size_t>(cout_) * kept_);
    std::vector<double> wre, wim;
    for (int bi = 0; bi < B; ++bi) {
      cplx* Xb = X_.data() + static_cast<std::size_t>(bi) * cin_ * kept_;
      for (int c = 0; c < cin_; ++c)
        gather(x.data() + (static_cast<std::size_t>(bi) * cin_ + c) * sp, N,
               Xb + static_cast<std::size_t>(c) * kept_);
      assemble(a.data() + static_cast<std::size_t>(bi) * K_, wre, wim);
      mix_forward(wre.data(), wim.data(), Xb, cin_, cout_, kept_, S.data());
      for (int o = 0; o < cout_; ++o)
        scatter(S.data() + static_cast<std::size_t>(o) * kept_, N,
                y.data() + (static_cast<std::size_t>(bi) * cout_ + o) * sp);
    }
    return y;
  }

  // Returns gx; writes d(loss)/d(attention) into ga [B, K].
  std::vector<double> backward(const std::vector<double>& gy, int B,
                               std::vector<double>& ga) {
    const int N = N_, sp = spatial(N);
    const std::size_t sz = bank_re_[0].size();
    std::vector<double> gx(static_cast<std::size_t>(B) * cin_ * sp, 0.0);
    ga.assign(static_cast<std::size_t>(B) * K_, 0.0);
    std::vector<cplx> dS(static_cast<std::size_t>(cout_) * kept_);
    std::vector<cplx> dX(static_cast<std::size_t>(cin_) * kept_);
    std::vector<double> wre, wim, dwre(sz), dwim(sz);
    for (int bi = 0; bi < B; ++bi) {
      const cplx* Xb = X_.data() + static_cast<std::size_t>(bi) * cin_ * kept_;
      const double* ab = a_.data() + static_cast<std::size_t>(bi) * K_;
      assemble(ab, wre, wim);
      for (int o = 0; o < cout_; ++o)
        scatter_adjoint(
            gy.data() + (static_cast<std::size_t>(bi) * cout_ + o) * sp, N,
            dS.data() + static_cast<std::size_t>(o) * kept_);
      std::fill(dwre.begin(), dwre.end(), 0.0);
      std::fill(dwim.begin(), dwim.end(), 0.0);
      mix_backward(wre.data(), wim.data(), Xb, dS.data(), cin_, cout_, kept_,
                   dwre.data(), dwim.data(), dX.data());
      // d(effective weight) distributes to the bank and the attention.
      for (int k = 0; k < K_; ++k) {
        const double ak = ab[k];
        double gak = 0.0;
        for (std::size_t i = 0; i < sz; ++i) {
          bank_re_[k].g[i] += ak * dwre[i];
          bank_im_[k].g[i] += ak * dwim[i];
          gak += bank_re_[k].v[i] * dwre[i] + bank_im_[k].v[i] * dwim[i];
        }
        ga[static_cast<std::size_t>(bi) * K_ + k] = gak;
      }
      for (int c = 0; c < cin_; ++c)
        gather_adjoint(dX.data() + static_cast<std::size_t>(c) * kept_, N,
                       gx.data() + (static_cast<std::size_t>(bi) * cin_ + c) * sp);
    }
    return gx;
  }

  ParamRefs params() {
    ParamRefs ps;
    for (int k = 0; k < K_; ++k) {
      ps.push_back(&bank_re_[k]);
      ps.push_back(&bank_im_[k]);
    }
    return ps;
  }

  int n_kernels() const { return K_; }
  int modes() const { return modes_; }
  std::size_t kernel_size() const { return bank_re_[0].size(); }
  const Param& bank_re(int k) const { return bank_re_[k]; }
  const Param& bank_im(int k) const { return bank_im_[k]; }
  Param& bank_re(int k) { return bank_re_[k]; }
  Param& bank_im(int k) { return bank_im_[k]; }

 private:
  static int spatial(int N) { return DIM == 1 ? N : N * N; }
  void gather(const double* x, int N, cplx* out) const {
    if constexpr (DIM == 1) fft_kept_1d(x, N, modes_, out);
    else fft_kept_2d(x, N, modes_, out);
  }
  void scatter(const cplx* S, int N, double* y) const {
    if constexpr (DIM == 1) ifft_kept_1d(S, N, modes_, y);
    else ifft_kept_2d(S, N, modes_, y);
  }
  void scatter_adjoint(const double* gy, int N, cplx* dS) const {
    if constexpr (DIM == 1) ifft_kept_adjoint_1d(gy, N, modes_, dS);
    else ifft_kept_adjoint_2d(gy, N, modes_, dS);
  }
  void gather_adjoint(const cplx* dX, int N, double* gx) const {
    if constexpr (DIM == 1) fft_kept_adjoint_1d(dX, N, modes_, gx);
    else fft_kept_adjoint_2d(dX, N, modes_, gx);
  }

  int cin_, cout_, modes_, K_, kept_, N_ = 0;
  std::vector<Param> bank_re_, bank_im_;
  std::vector<cplx> X_;
  std::vector<double> a_;
};

using DynamicSpectralConv1d = DynamicSpectralConv<1>;
using DynamicSpectralConv2d = DynamicSpectralConv<2>;

}  // namespace piano::nn
