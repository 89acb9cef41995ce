#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "piano/core/errors.hpp"
#include "piano/field/grid.hpp"
#include "piano/field/series.hpp"
#include "piano/sim/catalogs.hpp"

namespace piano::sim {

enum class Rhs1DVariant { E1_force, E2_diffusivity, E3_cde };

struct Rhs1DSpec {
  Rhs1DVariant variant = Rhs1DVariant::E1_force;
  int force_id = 0;        // E1
  int diffusivity_id = 0;  // E2
  BoundaryKind boundary = BoundaryKind::dirichlet;  // E3

  void validate() const {
    switch (variant) {
      case Rhs1DVariant::E1_force:
        if (force_id < 0 || force_id >= kNumForces)
          throw ConfigError("Rhs1DSpec: force id out of catalog");
        break;
      case Rhs1DVariant::E2_diffusivity:
        if (diffusivity_id < 0 || diffusivity_id >= kNumDiffusivities)
          throw ConfigError("Rhs1DSpec: diffusivity id out of catalog");
        break;
      case Rhs1DVariant::E3_cde:
        break;
    }
  }
};

// Ghost-cell values for a cell-centered grid with one ghost per side.
// Returns {left_ghost, right_ghost}.
inline std::pair<double, double> ghost_cells(const std::vector<double>& u,
                                             const Grid1D& grid,
                                             const Rhs1DSpec& spec) {
  const int n = grid.n_points;
  const double dx = grid.dx();
  const double c = 0.2;
  if (spec.variant != Rhs1DVariant::E3_cde) {
    // Homogeneous Dirichlet at both ends: midpoint of ghost and first cell
    // sits on the boundary with value 0.
    return {-u[0], -u[n - 1]};
  }
  switch (spec.boundary) {
    case BoundaryKind::dirichlet:
      // (g + u0)/2 = c
      return {2.0 * c - u[0], 2.0 * c - u[n - 1]};
    case BoundaryKind::neumann:
      // outward-normal derivative = c: -u_x(0) = c, u_x(1) = c
      return {u[0] + c * dx, u[n - 1] + c * dx};
    case BoundaryKind::curvature:
      // second derivative along the normal = c at the boundary
      return {2.0 * u[0] - u[1] + c * dx * dx,
              2.0 * u[n - 1] - u[n - 2] + c * dx * dx};
    case BoundaryKind::robin: {
      // -u_x + u = c at x=0; u_x + u = c at x=1 (midpoint/face stencils)
      double a = 1.0 / dx + 0.5, b = 1.0 / dx - 0.5;
      return {(c + u[0] * b) / a, (c + u[n - 1] * b) / a};
    }
  }
  throw ConfigError("ghost_cells: bad boundary kind");
}

// Smooth upwind-type dissipation coefficient for the advection term:
// 0.5 dx u^2/sqrt(u^2 + eps^2) ~ 0.5 dx |u| for |u| >> eps, -> 0
// quadratically as u -> 0. Keeps the cell Peclet number at or below 2 for
// arbitrarily steep boundary layers while staying infinitely
// differentiable (central advection alone oscillates and blows up when a
// strong outflow meets a Dirichlet wall).
inline double advective_dissipation(double u, double dx) {
  constexpr double eps = 0.05;
  return 0.5 * dx * u * u / std::sqrt(u * u + eps * eps);
}

// du/dt on the interior cells. Second-order central differences; advection
// in non-conservative form -u u_x plus the smooth upwind dissipation.
inline void evaluate_rhs_1d(const std::vector<double>& u,
                            const Rhs1DSpec& spec, const Grid1D& grid,
                            std::vector<double>& dudt) {
  spec.validate();
  const int n = grid.n_points;
  const double dx = grid.dx();
  const double inv2dx = 0.5 / dx;
  const double invdx2 = 1.0 / (dx * dx);
  dudt.resize(n);
  auto [gl, gr] = ghost_cells(u, grid, spec);
  auto at = [&](int j) -> double {
    if (j < 0) return gl;
    if (j >= n) return gr;
    return u[j];
  };

  switch (spec.variant) {
    case Rhs1DVariant::E1_force:
      for (int j = 0; j < n; ++j) {
        double um = at(j - 1), up = at(j + 1);
        double ux = (up - um) * inv2dx;
        double uxx = (up - 2.0 * u[j] + um) * invdx2;
        dudt[j] = -u[j] * ux + (0.1 + advective_dissipation(u[j], dx)) * uxx +
                  0.1 * force_value(spec.force_id, grid.node(j));
      }
      break;
    case Rhs1DVariant::E2_diffusivity:
      for (int j = 0; j < n; ++j) {
        double um = at(j - 1), up = at(j + 1);
        double ux = (up - um) * inv2dx;
        double uxx = (up - 2.0 * u[j] + um) * invdx2;
        // flux form with face-centered diffusivity
        double xj = grid.node(j);
        double d_right = diffusivity_value(spec.diffusivity_id, xj + 0.5 * dx);
        double d_left = diffusivity_value(spec.diffusivity_id, xj - 0.5 * dx);
        double diff =
            (d_right * (up - u[j]) - d_left * (u[j] - um)) * invdx2;
        dudt[j] = -u[j] * ux + 0.1 * diff +
                  advective_dissipation(u[j], dx) * uxx;
      }
      break;
    case Rhs1DVariant::E3_cde:
      for (int j = 0; j < n; ++j) {
        double um = at(j - 1), up = at(j + 1);
        double uxx = (up - 2.0 * u[j] + um) * invdx2;
        dudt[j] = 0.1 * uxx + 0.1 * u[j] +
                  0.1 * std::sin(2.0 * M_PI * grid.node(j));
      }
      break;
  }
}

// Classical RK4 with fixed step; stores n_frames frames at times
// (i+1)*dt_frame. dt_frame must be an integer multiple of dt_solver.
inline FieldSeries integrate_1d(const std::vector<double>& u0,
                                const Rhs1DSpec& spec, const Grid1D& grid,
                                double dt_solver, int n_frames,
                                double dt_frame) {
  if (!(dt_solver > 0.0)) throw ConfigError("integrate_1d: dt_solver <= 0");
  const double steps_exact = dt_frame / dt_solver;
  const int steps_per_frame = static_cast<int>(std::lround(steps_exact));
  if (steps_per_frame < 1 ||
      std::abs(steps_exact - steps_per_frame) > 1e-9 * steps_per_frame)
    throw ConfigError("integrate_1d: dt_frame must be a multiple of dt_solver");

  const int n = grid.n_points;
  FieldSeries out;
  out.n_frames = n_frames;
  out.channels = 1;
  out.grid = grid;
  out.dt_frame = dt_frame;
  out.t0 = dt_frame;
  out.values.resize(static_cast<std::size_t>(n_frames) * n);

  std::vector<double> u = u0, k1, k2, k3, k4, tmp(n);
  long step = 0;
  for (int f = 0; f < n_frames; ++f) {
    for (int s = 0; s < steps_per_frame; ++s, ++step) {
      evaluate_rhs_1d(u, spec, grid, k1);
      for (int j = 0; j < n; ++j) tmp[j] = u[j] + 0.5 * dt_solver * k1[j];
      evaluate_rhs_1d(tmp, spec, grid, k2);
      for (int j = 0; j < n; ++j) tmp[j] = u[j] + 0.5 * dt_solver * k2[j];
      evaluate_rhs_1d(tmp, spec, grid, k3);
      for (int j = 0; j < n; ++j) tmp[j] = u[j] + dt_solver * k3[j];
      evaluate_rhs_1d(tmp, spec, grid, k4);
      for (int j = 0; j < n; ++j)
        u[j] += dt_solver / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(u[j]))
        throw BlowUpError("integrate_1d: blow-up at step " +
                          std::to_string(step));
      out.values[static_cast<std::size_t>(f) * n + j] = u[j];
    }
  }
  return out;
}

}  // namespace piano::sim
