#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "piano/core/fft.hpp"
#include "piano/core/rng.hpp"
#include "piano/field/grid.hpp"

namespace piano::sim {

// Random superposition of the first four sine modes on [x_min, x_max],
// c_m ~ N(0, 1/m^2). Vanishes at both boundaries by construction.
struct SineInitial1D {
  double x_min = 0.0, length = 1.0;
  std::array<double, 4> coeff{};

  double eval(double x) const {
    double s = 0.0;
    for (int m = 1; m <= 4; ++m)
      s += coeff[m - 1] *
           std::sin(m * (x - x_min) * M_PI / length);
    return s;
  }
};

inline SineInitial1D sample_initial_1d(const Grid1D& grid, Rng& rng) {
  SineInitial1D ic;
  ic.x_min = grid.x_min;
  ic.length = grid.x_max - grid.x_min;
  for (int m = 1; m <= 4; ++m) ic.coeff[m - 1] = rng.normal(0.0, 1.0 / m);
  return ic;
}

inline std::vector<double> sample_initial_condition_1d(const Grid1D& grid,
                                                       Rng& rng) {
  SineInitial1D ic = sample_initial_1d(grid, rng);
  std::vector<double> u(grid.n_points);
  for (int j = 0; j < grid.n_points; ++j) u[j] = ic.eval(grid.node(j));
  return u;
}

// Zero-mean periodic Gaussian random field with spectral density
// proportional to (|k|^2 + 49)^(-2.5), |k|^2 = m^2 + n^2 in integer
// wavenumbers. Amplitude scaled for approximately unit pointwise variance.
inline std::vector<double> sample_initial_condition_2d(const Grid2D& grid,
                                                       Rng& rng) {
  const int n = grid.n_x;
  if (grid.n_y != n) throw ConfigError("2D initial condition requires n_x == n_y");
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(n) * n,
                                         {0.0, 0.0});
  const double scale = std::sqrt(3.0 * 343.0 / (2.0 * M_PI));

  auto freq = [n](int i) { return i <= n / 2 ? i : i - n; };
  auto amp = [&](int i, int j) {
    double m = freq(i), l = freq(j);
    double k2 = m * m + l * l;
    return scale * std::pow(k2 + 49.0, -1.25);
  };
  // Draw the canonical half-spectrum in fixed index order and mirror
  // conjugates so the synthesized field is exactly real.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      int ic = (n - i) % n, jc = (n - j) % n;
      bool canonical = (j < jc) || (j == jc && i <= ic);
      if (!canonical) continue;
      if (i == 0 && j == 0) continue;  // zero mean
      double a = amp(i, j);
      bool self_conj = (i == ic && j == jc);
      if (self_conj) {
        spec[static_cast<std::size_t>(i) * n + j] = {a * rng.normal(), 0.0};
      } else {
        std::complex<double> z(rng.normal() * M_SQRT1_2,
                               rng.normal() * M_SQRT1_2);
        spec[static_cast<std::size_t>(i) * n + j] = a * z;
        spec[static_cast<std::size_t>(ic) * n + jc] = a * std::conj(z);
      }
    }
  }
  // Synthesize field(x) = sum_k A_k e^{2 pi i k.x}; undo the 1/N^2 of the
  // inverse transform so per-mode amplitudes carry over directly.
  fft::transform2(spec.data(), n, n, true);
  std::vector<double> field(static_cast<std::size_t>(n) * n);
  const double n2 = static_cast<double>(n) * n;
  for (std::size_t idx = 0; idx < field.size(); ++idx)
    field[idx] = spec[idx].real() * n2;
  return field;
}

}  // namespace piano::sim
