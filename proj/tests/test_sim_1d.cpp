#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "piano/core/errors.hpp"
#include "piano/core/rng.hpp"
#include "piano/sim/catalogs.hpp"
#include "piano/sim/experiment.hpp"
#include "piano/sim/initial.hpp"
#include "piano/sim/solver1d.hpp"

using namespace piano;
using namespace piano::sim;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("force catalog matches its definitions") {
  CHECK(force_value(0, 1.3) == 0.0);
  CHECK(force_value(1, -0.7) == 1.0);
  CHECK(force_value(2, 0.4) == std::cos(0.4));
  CHECK(force_value(3, 0.4) == std::sin(0.4));
  CHECK(force_value(7, 0.4) == std::sin(0.8));
  CHECK(force_value(13, 0.4) == -std::tanh(3.0 * 0.4));
  CHECK_THROWS_AS(force_value(14, 0.0), ConfigError);
  CHECK_THROWS_AS(force_value(-1, 0.0), ConfigError);
  CHECK(force_name(2) == "cos(x)");
}

TEST_CASE("diffusivity catalog matches its definitions") {
  CHECK(diffusivity_value(0, 2.0) == 1.0);
  CHECK(diffusivity_value(1, 2.0) == 2.0);
  CHECK(diffusivity_value(2, 0.3) == 1.0 + std::cos(0.3));
  CHECK(diffusivity_value(9, 0.3) == 1.0 - std::sin(0.6));
  CHECK_THROWS_AS(diffusivity_value(10, 0.0), ConfigError);
}

TEST_CASE("1d initial condition is deterministic and vanishes at boundaries") {
  auto grid = make_grid_1d(64, -M_PI, M_PI);
  Rng r1(9), r2(9);
  auto u1 = sample_initial_condition_1d(grid, r1);
  auto u2 = sample_initial_condition_1d(grid, r2);
  CHECK(u1 == u2);
  Rng r3(9);
  auto ic = sample_initial_1d(grid, r3);
  CHECK(std::abs(ic.eval(grid.x_min)) < 1e-12);
  CHECK(std::abs(ic.eval(grid.x_max)) < 1e-12);
}

TEST_CASE("zero state with zero force has zero rhs") {
  auto grid = make_grid_1d(64, -M_PI, M_PI);
  std::vector<double> u(64, 0.0), dudt;
  Rhs1DSpec spec;
  spec.variant = Rhs1DVariant::E1_force;
  spec.force_id = 0;
  evaluate_rhs_1d(u, spec, grid, dudt);
  for (double v : dudt) CHECK(v == 0.0);
}

TEST_CASE("zero state with unit force gives rhs 0.1 everywhere") {
  auto grid = make_grid_1d(64, -M_PI, M_PI);
  std::vector<double> u(64, 0.0), dudt;
  Rhs1DSpec spec;
  spec.variant = Rhs1DVariant::E1_force;
  spec.force_id = 1;
  evaluate_rhs_1d(u, spec, grid, dudt);
  for (double v : dudt) CHECK(v == Catch::Approx(0.1).margin(1e-15));
}

TEST_CASE("E2 rhs with unit diffusivity matches the symbolic oracle at second order") {
  // Small amplitude keeps the smooth upwind dissipation far below the
  // central-difference truncation error. sin(x) is exactly odd about both
  // ends of [-pi,pi], so the homogeneous Dirichlet ghosts are consistent.
  const double a = 1e-3;
  auto run = [&](int n) {
    auto grid = make_grid_1d(n, -M_PI, M_PI);
    std::vector<double> u(n), dudt, oracle(n);
    for (int j = 0; j < n; ++j) {
      double x = grid.node(j);
      u[j] = a * std::sin(x);
      // d/dt = -u u_x + 0.1 (D u_x)_x with D = 1
      oracle[j] = -a * a * std::sin(x) * std::cos(x) - 0.1 * a * std::sin(x);
    }
    Rhs1DSpec spec;
    spec.variant = Rhs1DVariant::E2_diffusivity;
    spec.diffusivity_id = 0;
    evaluate_rhs_1d(u, spec, grid, dudt);
    return max_abs_diff(dudt, oracle);
  };
  double e64 = run(64), e128 = run(128);
  CHECK(e64 < 3e-7);
  CHECK(e64 / e128 > 3.2);
  CHECK(e64 / e128 < 4.8);
}

TEST_CASE("E2 linearized diffusion decays like exp(-0.1 t)") {
  const int n = 64;
  auto grid = make_grid_1d(n, -M_PI, M_PI);
  const double a = 1e-6;
  std::vector<double> u0(n), s(n);
  double snorm = 0.0;
  for (int j = 0; j < n; ++j) {
    s[j] = std::sin(grid.node(j));
    u0[j] = a * s[j];
    snorm += s[j] * s[j];
  }
  Rhs1DSpec spec;
  spec.variant = Rhs1DVariant::E2_diffusivity;
  spec.diffusivity_id = 0;
  auto series = integrate_1d(u0, spec, grid, 1e-3, 40, 0.025);
  for (int f = 0; f < 40; ++f) {
    double t = (f + 1) * 0.025;
    double amp = 0.0;
    const double* fr = series.frame(f);
    for (int j = 0; j < n; ++j) amp += fr[j] * s[j];
    amp /= snorm;
    double ref = a * std::exp(-0.1 * t);
    CHECK(std::abs(amp - ref) / ref < 1e-3);
  }
}

TEST_CASE("rk4 self-convergence order is at least 3.5") {
  const int n = 64;
  auto grid = make_grid_1d(n, -M_PI, M_PI);
  Rng rng(21);
  auto u0 = sample_initial_condition_1d(grid, rng);
  Rhs1DSpec spec;
  spec.variant = Rhs1DVariant::E1_force;
  spec.force_id = 3;
  auto solve = [&](double dt) {
    auto s = integrate_1d(u0, spec, grid, dt, 1, 0.5);
    return std::vector<double>(s.frame(0), s.frame(0) + n);
  };
  auto u_a = solve(2e-2), u_b = solve(1e-2), u_c = solve(5e-3);
  double e1 = max_abs_diff(u_a, u_b), e2 = max_abs_diff(u_b, u_c);
  REQUIRE(e2 > 1e-15);
  double order = std::log2(e1 / e2);
  CHECK(order >= 3.5);
}

TEST_CASE("integrator reports blow-up with a step index") {
  const int n = 64;
  auto grid = make_grid_1d(n, -M_PI, M_PI);
  std::vector<double> u0(n);
  for (int j = 0; j < n; ++j) u0[j] = std::sin(grid.node(j));
  Rhs1DSpec spec;
  spec.variant = Rhs1DVariant::E1_force;
  spec.force_id = 0;
  try {
    integrate_1d(u0, spec, grid, 1.0, 100, 1.0);
    FAIL("expected BlowUpError");
  } catch (const BlowUpError& e) {
    CHECK(std::string(e.what()).find("blow-up at step") != std::string::npos);
  }
}

TEST_CASE("integrate_1d rejects incompatible frame spacing") {
  auto grid = make_grid_1d(16, -M_PI, M_PI);
  std::vector<double> u0(16, 0.0);
  Rhs1DSpec spec;
  CHECK_THROWS_AS(integrate_1d(u0, spec, grid, 3e-3, 2, 0.025), ConfigError);
}

TEST_CASE("E3 boundary conditions hold at every stored frame") {
  // Re-derive the discrete boundary operators from the mathematical
  // statements and check the residual of each stored frame. The constant is
  // 0.2 for all four kinds; ghosts come from the solver's formulas, so the
  // residuals verify the discretized condition u satisfies at the walls.
  auto grid = make_grid_1d(64, 0.0, 1.0);
  const double dx = grid.dx();
  const double c = 0.2;
  Rng rng(5);
  auto u0 = sample_initial_condition_1d(grid, rng);
  for (int kind = 0; kind < kNumBoundaryKinds; ++kind) {
    Rhs1DSpec spec;
    spec.variant = Rhs1DVariant::E3_cde;
    spec.boundary = boundary_kind_from_id(kind);
    auto series = integrate_1d(u0, spec, grid, 5e-4, 240, 0.025);
    const int n = 64;
    for (int f = 0; f < 240; ++f) {
      std::vector<double> u(series.frame(f), series.frame(f) + n);
      auto [gl, gr] = ghost_cells(u, grid, spec);
      double res_l = 0.0, res_r = 0.0;
      switch (spec.boundary) {
        case BoundaryKind::dirichlet:
          res_l = 0.5 * (gl + u[0]) - c;
          res_r = 0.5 * (gr + u[n - 1]) - c;
          break;
        case BoundaryKind::neumann:
          res_l = (gl - u[0]) / dx - c;          // -u_x(0) = c
          res_r = (gr - u[n - 1]) / dx - c;      // +u_x(1) = c
          break;
        case BoundaryKind::curvature:
          res_l = (gl - 2.0 * u[0] + u[1]) / (dx * dx) - c;
          res_r = (gr - 2.0 * u[n - 1] + u[n - 2]) / (dx * dx) - c;
          break;
        case BoundaryKind::robin:
          res_l = (gl - u[0]) / dx + 0.5 * (gl + u[0]) - c;
          res_r = (gr - u[n - 1]) / dx + 0.5 * (gr + u[n - 1]) - c;
          break;
      }
      CHECK(std::abs(res_l) < dx * dx);
      CHECK(std::abs(res_r) < dx * dx);
    }
  }
}

TEST_CASE("E3 dirichlet wall value converges at second order") {
  // Quadratic extrapolation of the final frame to x=0 approaches 0.2 as the
  // grid is refined.
  auto run = [&](int n) {
    auto grid = make_grid_1d(n, 0.0, 1.0);
    Rng rng(5);
    auto u0 = sample_initial_condition_1d(grid, rng);
    Rhs1DSpec spec;
    spec.variant = Rhs1DVariant::E3_cde;
    spec.boundary = BoundaryKind::dirichlet;
    auto series = integrate_1d(u0, spec, grid, 2.5e-4, 40, 0.025);
    const double* u = series.frame(39);
    // cells at dx/2, 3dx/2, 5dx/2 -> value at 0
    double p0 = (15.0 * u[0] - 10.0 * u[1] + 3.0 * u[2]) / 8.0;
    return std::abs(p0 - 0.2);
  };
  double e64 = run(64), e128 = run(128);
  CHECK(e64 < 1e-3);
  CHECK(e64 / e128 > 2.5);
}

TEST_CASE("hidden parameters are deterministic functions of the seed") {
  auto s1 = desk_spec(ExperimentId::E1);
  CHECK(*draw_hidden(s1, 30).categorical_label == 30 % 14);
  CHECK(*draw_hidden(s1, 13).categorical_label == 13);
  auto s4 = desk_spec(ExperimentId::E4);
  auto th_a = draw_hidden(s4, 77), th_b = draw_hidden(s4, 77);
  CHECK(th_a.viscosity() == th_b.viscosity());
  CHECK(th_a.viscosity() >= 1e-5);
  CHECK(th_a.viscosity() <= 1e-2);
  auto s5 = desk_spec(ExperimentId::E5);
  auto th5 = draw_hidden(s5, 3);
  REQUIRE(th5.real_values.size() == 2);
  CHECK(th5.real_values[1] >= 0.0);
  CHECK(th5.real_values[1] <= 0.2);
}

TEST_CASE("generate_sample is deterministic and shaped correctly") {
  auto spec = desk_spec(ExperimentId::E1);
  auto a = generate_sample(spec, 11, 200, 5.0);
  auto b = generate_sample(spec, 11, 200, 5.0);
  auto c = generate_sample(spec, 12, 200, 5.0);
  CHECK(a.series.values == b.series.values);
  CHECK(a.theta.categorical_label == b.theta.categorical_label);
  CHECK(a.series.values != c.series.values);
  CHECK(a.series.n_frames == 200);
  CHECK(std::get<Grid1D>(a.series.grid).n_points == 64);
  CHECK(a.series.dt_frame == Catch::Approx(0.025));
}

TEST_CASE("build_dataset produces the requested split shapes") {
  auto spec = desk_spec(ExperimentId::E1);
  auto splits = build_dataset(spec, 2, 1, 1, 0);
  REQUIRE(splits.train.size() == 2);
  REQUIRE(splits.val.size() == 1);
  REQUIRE(splits.test.size() == 1);
  CHECK(splits.train.series(0).n_frames == 200);
  CHECK(splits.test.series(0).n_frames == 240);
  // Disjoint seed blocks per split.
  CHECK(splits.train.sample_seed(0) == 0);
  CHECK(splits.val.sample_seed(0) == 1000000);
  CHECK(splits.test.sample_seed(0) == 2000000);
}

TEST_CASE("build_split reports the offending sample seed on blow-up") {
  auto spec = desk_spec(ExperimentId::E1);
  spec.n_1d = 512;
  spec.dt_solver = 0.0125;  // diffusive stability limit exceeded at n=512
  try {
    build_split(spec, 0, 1, 0, true);
    FAIL("expected BlowUpError");
  } catch (const BlowUpError& e) {
    CHECK(std::string(e.what()).find("sample seed 0") != std::string::npos);
  }
}
