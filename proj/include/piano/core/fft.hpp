#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "piano/core/errors.hpp"

namespace piano::fft {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

// Twiddle table for size n (forward sign), cached per size.
inline const std::vector<cplx>& twiddles(std::size_t n, bool inverse) {
  thread_local std::vector<std::vector<cplx>> cache_fwd(32), cache_inv(32);
  int log2n = 0;
  while ((std::size_t{1} << log2n) < n) ++log2n;
  auto& slot = (inverse ? cache_inv : cache_fwd)[log2n];
  if (slot.empty()) {
    slot.resize(n / 2);
    double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n / 2; ++k) {
      double ang = sign * 2.0 * M_PI * static_cast<double>(k) /
                   static_cast<double>(n);
      slot[k] = cplx(std::cos(ang), std::sin(ang));
    }
  }
  return slot;
}

}  // namespace detail

// In-place iterative radix-2 transform. inverse=true applies the conjugate
// kernel and the 1/n factor.
inline void transform(cplx* a, std::size_t n, bool inverse) {
  if (!is_pow2(n)) throw ConfigError("fft: size must be a power of two");
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto& tw = detail::twiddles(n, inverse);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        cplx w = tw[k * step];
        cplx u = a[i + k];
        cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) a[i] *= inv_n;
  }
}

inline void fft(std::vector<cplx>& a) { transform(a.data(), a.size(), false); }
inline void ifft(std::vector<cplx>& a) { transform(a.data(), a.size(), true); }

// 2D transform on row-major [n1, n2] data.
inline void transform2(cplx* a, std::size_t n1, std::size_t n2, bool inverse) {
  for (std::size_t r = 0; r < n1; ++r) transform(a + r * n2, n2, inverse);
  std::vector<cplx> col(n1);
  for (std::size_t c = 0; c < n2; ++c) {
    for (std::size_t r = 0; r < n1; ++r) col[r] = a[r * n2 + c];
    transform(col.data(), n1, inverse);
    for (std::size_t r = 0; r < n1; ++r) a[r * n2 + c] = col[r];
  }
}

inline void fft2(std::vector<cplx>& a, std::size_t n1, std::size_t n2) {
  transform2(a.data(), n1, n2, false);
}
inline void ifft2(std::vector<cplx>& a, std::size_t n1, std::size_t n2) {
  transform2(a.data(), n1, n2, true);
}

}  // namespace piano::fft
