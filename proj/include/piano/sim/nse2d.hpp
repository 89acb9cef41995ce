#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "piano/core/errors.hpp"
#include "piano/core/fft.hpp"
#include "piano/field/grid.hpp"
#include "piano/field/series.hpp"

namespace piano::sim {

enum class NseForcing { fixed_e4, amplitude_e5, kolmogorov_e6 };

struct NseSpec {
  double viscosity = 1e-3;
  NseForcing forcing = NseForcing::fixed_e4;
  double amplitude = 0.1;  // E5 only; E4 uses 0.1 fixed

  void validate() const {
    if (!(viscosity > 0.0)) throw ConfigError("NseSpec: viscosity must be > 0");
    if (forcing == NseForcing::amplitude_e5 &&
        (amplitude < 0.0 || amplitude > 0.2))
      throw ConfigError("NseSpec: amplitude must lie in [0, 0.2]");
  }
};

inline double nse_forcing_value(const NseSpec& spec, double x1, double x2) {
  switch (spec.forcing) {
    case NseForcing::fixed_e4:
      return 0.1 * std::sin(2.0 * M_PI * (x1 + x2)) +
             0.1 * std::cos(2.0 * M_PI * (x1 + x2));
    case NseForcing::amplitude_e5:
      return spec.amplitude * std::sin(2.0 * M_PI * (x1 + x2)) +
             spec.amplitude * std::cos(2.0 * M_PI * (x1 + x2));
    case NseForcing::kolmogorov_e6:
      return 0.1 * std::cos(8.0 * M_PI * x1);
  }
  throw ConfigError("bad forcing kind");
}

// Pseudo-spectral vorticity stepper on the periodic unit square.
// Crank-Nicolson on diffusion, Adams-Bashforth 2 (Euler first step) on
// advection + forcing, 2/3-rule dealiasing of the nonlinear product.
class NseStepper {
 public:
  using cplx = std::complex<double>;

  NseStepper(const Grid2D& grid, const NseSpec& spec, double dt)
      : n_(grid.n_x), spec_(spec), dt_(dt) {
    spec_.validate();
    if (grid.n_y != n_) throw ConfigError("NseStepper: grid must be square");
    if (!fft::is_pow2(static_cast<std::size_t>(n_)))
      throw ConfigError("NseStepper: grid size must be a power of two");
    const int n = n_;
    freq_.resize(n);
    for (int i = 0; i < n; ++i) freq_[i] = i <= n / 2 ? i : i - n;
    // Spectral forcing.
    std::vector<cplx> f(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        f[idx(i, j)] = nse_forcing_value(spec_, grid.x(i), grid.y(j));
    fft::fft2(f, n, n);
    f_hat_ = std::move(f);
  }

  // Load physical vorticity as the current state; resets AB2 history.
  void set_state(const std::vector<double>& omega) {
    if (omega.size() != static_cast<std::size_t>(n_) * n_)
      throw ConfigError("NseStepper: state size mismatch");
    w_hat_.assign(omega.begin(), omega.end());
    fft::fft2(w_hat_, n_, n_);
    have_prev_ = false;
    step_count_ = 0;
  }

  std::vector<double> state() const {
    std::vector<cplx> w = w_hat_;
    fft::ifft2(w, n_, n_);
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i].real();
    return out;
  }

  double enstrophy() const {
    // 0.5 sum omega^2 via Parseval: (0.5/N^2) sum |w_hat|^2.
    double s = 0.0;
    for (const auto& c : w_hat_) s += std::norm(c);
    return 0.5 * s / (static_cast<double>(n_) * n_);
  }

  void step() {
    const int n = n_;
    std::vector<cplx> nl = nonlinear_hat();
    const double two_pi_sq = 4.0 * M_PI * M_PI;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        std::size_t id = idx(i, j);
        double k2 = two_pi_sq * (static_cast<double>(freq_[i]) * freq_[i] +
                                 static_cast<double>(freq_[j]) * freq_[j]);
        cplx rhs = have_prev_ ? 1.5 * nl[id] - 0.5 * nl_prev_[id] : nl[id];
        double diff = 0.5 * dt_ * spec_.viscosity * k2;
        w_hat_[id] = ((1.0 - diff) * w_hat_[id] + dt_ * rhs) / (1.0 + diff);
      }
    }
    nl_prev_ = std::move(nl);
    have_prev_ = true;
    ++step_count_;
    if (!std::isfinite(w_hat_[0].real()))
      throw BlowUpError("NseStepper: blow-up at step " +
                        std::to_string(step_count_));
  }

  long step_count() const { return step_count_; }
  int size() const { return n_; }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * n_ + j;
  }

  void dealias(std::vector<cplx>& a) const {
    const int cut = n_ / 3;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (std::abs(freq_[i]) > cut || std::abs(freq_[j]) > cut)
          a[idx(i, j)] = 0.0;
  }

  // Spectral advection + forcing term: -(u . grad) omega + f.
  std::vector<cplx> nonlinear_hat() const {
    const int n = n_;
    std::vector<cplx> w = w_hat_;
    dealias(w);
    std::vector<cplx> u(w.size()), v(w.size()), wx(w.size()), wy(w.size());
    const double two_pi = 2.0 * M_PI;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        std::size_t id = idx(i, j);
        double kx = two_pi * freq_[i], ky = two_pi * freq_[j];
        double k2 = kx * kx + ky * ky;
        cplx psi = k2 > 0.0 ? w[id] / k2 : cplx(0.0, 0.0);
        u[id] = cplx(0.0, ky) * psi;    // u = d(psi)/dy
        v[id] = cplx(0.0, -kx) * psi;   // v = -d(psi)/dx
        wx[id] = cplx(0.0, kx) * w[id];
        wy[id] = cplx(0.0, ky) * w[id];
      }
    }
    fft::ifft2(u, n, n);
    fft::ifft2(v, n, n);
    fft::ifft2(wx, n, n);
    fft::ifft2(wy, n, n);
    std::vector<cplx> prod(w.size());
    for (std::size_t id = 0; id < prod.size(); ++id)
      prod[id] = -(u[id].real() * wx[id].real() + v[id].real() * wy[id].real());
    fft::fft2(prod, n, n);
    dealias(prod);
    for (std::size_t id = 0; id < prod.size(); ++id) prod[id] += f_hat_[id];
    return prod;
  }

  int n_;
  NseSpec spec_;
  double dt_;
  std::vector<int> freq_;
  std::vector<cplx> f_hat_, w_hat_, nl_prev_;
  bool have_prev_ = false;
  long step_count_ = 0;
};

// Single step from a physical vorticity field (Euler first step on the
// advection term).
inline std::vector<double> step_nse_spectral(const std::vector<double>& omega,
                                             const Grid2D& grid,
                                             const NseSpec& spec, double dt) {
  NseStepper st(grid, spec, dt);
  st.set_state(omega);
  st.step();
  return st.state();
}

inline FieldSeries integrate_nse(const std::vector<double>& omega0,
                                 const Grid2D& grid, const NseSpec& spec,
                                 double dt_solver, int n_frames,
                                 double dt_frame) {
  const double steps_exact = dt_frame / dt_solver;
  const int steps_per_frame = static_cast<int>(std::lround(steps_exact));
  if (steps_per_frame < 1 ||
      std::abs(steps_exact - steps_per_frame) > 1e-9 * steps_per_frame)
    throw ConfigError("integrate_nse: dt_frame must be a multiple of dt_solver");

  NseStepper st(grid, spec, dt_solver);
  st.set_state(omega0);
  const int n = grid.n_x;
  FieldSeries out;
  out.n_frames = n_frames;
  out.channels = 1;
  out.grid = grid;
  out.dt_frame = dt_frame;
  out.t0 = dt_frame;
  out.values.resize(static_cast<std::size_t>(n_frames) * n * n);
  for (int f = 0; f < n_frames; ++f) {
    for (int s = 0; s < steps_per_frame; ++s) st.step();
    std::vector<double> w = st.state();
    for (std::size_t id = 0; id < w.size(); ++id) {
      if (!std::isfinite(w[id]))
        throw BlowUpError("integrate_nse: blow-up at step " +
                          std::to_string(st.step_count()));
      out.values[static_cast<std::size_t>(f) * n * n + id] = w[id];
    }
  }
  return out;
}

}  // namespace piano::sim
