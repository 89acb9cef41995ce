#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "piano/core/errors.hpp"
#include "piano/core/rng.hpp"
#include "piano/field/dataset.hpp"
#include "piano/field/grid.hpp"
#include "piano/field/series.hpp"
#include "piano/sim/catalogs.hpp"
#include "piano/sim/initial.hpp"
#include "piano/sim/nse2d.hpp"
#include "piano/sim/solver1d.hpp"

namespace piano::sim {

struct ExperimentSpec {
  ExperimentId id = ExperimentId::E1;
  int n_1d = 64;
  int n_2d = 64;             // stored 2D grid size
  int downsample_factor = 1;  // generation runs at n_2d * factor
  double dt_solver = 1e-4;
  double t_train = 5.0, t_test = 6.0;
  int n_frames_train = 200, n_frames_test = 240;
  double visc_min = 1e-5, visc_max = 1e-2;
  double amp_min = 0.0, amp_max = 0.2;

  double dt_frame() const { return t_test / n_frames_test; }

  bool is_1d() const { return is_1d_experiment(id); }

  Grid1D grid_1d() const {
    if (id == ExperimentId::E3) return make_grid_1d(n_1d, 0.0, 1.0);
    return make_grid_1d(n_1d, -M_PI, M_PI);
  }
  Grid2D grid_2d_stored() const { return make_grid_2d(n_2d, n_2d); }
  Grid2D grid_2d_gen() const {
    return make_grid_2d(n_2d * downsample_factor, n_2d * downsample_factor);
  }

  void validate() const {
    if (!(dt_solver > 0.0)) throw ConfigError("ExperimentSpec: dt_solver <= 0");
    if (!(t_test > t_train)) throw ConfigError("ExperimentSpec: T_test <= T_train");
    if (downsample_factor < 1)
      throw ConfigError("ExperimentSpec: downsample factor < 1");
    double a = t_train / n_frames_train, b = t_test / n_frames_test;
    if (std::abs(a - b) > 1e-12)
      throw ConfigError("ExperimentSpec: inconsistent frame spacing");
  }
};

// Full-scale settings as used for the published benchmarks.
inline ExperimentSpec paper_spec(ExperimentId id) {
  ExperimentSpec s;
  s.id = id;
  switch (id) {
    case ExperimentId::E1:
    case ExperimentId::E2:
    case ExperimentId::E3:
      s.t_train = 5.0; s.t_test = 6.0;
      break;
    case ExperimentId::E4:
    case ExperimentId::E5:
      s.t_train = 20.0; s.t_test = 24.0;
      s.downsample_factor = 4;
      s.visc_min = 1e-5; s.visc_max = 1e-2;
      break;
    case ExperimentId::E6:
      s.t_train = 20.0; s.t_test = 24.0;
      s.downsample_factor = 4;
      s.visc_min = 1e-4; s.visc_max = 1e-2;
      break;
  }
  return s;
}

// Desk-scale preset: 1D experiments keep the full solver settings; 2D
// experiments are generated directly at 64^2 with a coarser solver step.
inline ExperimentSpec desk_spec(ExperimentId id) {
  ExperimentSpec s = paper_spec(id);
  if (!s.is_1d()) {
    s.downsample_factor = 1;
    s.dt_solver = 5e-3;
  }
  return s;
}

struct SplitSizes {
  int n_train = 1000, n_val = 200, n_test = 200;
};

inline SplitSizes paper_split_sizes(ExperimentId) { return {1000, 200, 200}; }

inline SplitSizes desk_split_sizes(ExperimentId id) {
  if (is_1d_experiment(id)) return {280, 56, 56};
  return {100, 20, 20};
}

// Seed layout: consecutive per split, disjoint blocks between splits.
inline std::int64_t split_seed(std::int64_t base_seed, int split, int index) {
  return base_seed + static_cast<std::int64_t>(split) * 1000000 + index;
}

// Hidden parameter as a deterministic function of the sample seed.
// Categorical labels stratify over consecutive seeds so balanced split
// sizes yield balanced classes.
inline HiddenParameter draw_hidden(const ExperimentSpec& spec,
                                   std::int64_t sample_seed) {
  HiddenParameter th;
  switch (spec.id) {
    case ExperimentId::E1:
      th.kind = HiddenKind::force_id;
      th.categorical_label =
          static_cast<int>(((sample_seed % kNumForces) + kNumForces) %
                           kNumForces);
      break;
    case ExperimentId::E2:
      th.kind = HiddenKind::diffusivity_id;
      th.categorical_label = static_cast<int>(
          ((sample_seed % kNumDiffusivities) + kNumDiffusivities) %
          kNumDiffusivities);
      break;
    case ExperimentId::E3:
      th.kind = HiddenKind::boundary_id;
      th.categorical_label = static_cast<int>(
          ((sample_seed % kNumBoundaryKinds) + kNumBoundaryKinds) %
          kNumBoundaryKinds);
      break;
    case ExperimentId::E4:
    case ExperimentId::E6: {
      th.kind = HiddenKind::viscosity;
      Rng rng = Rng::derive(static_cast<std::uint64_t>(sample_seed), 0x7e7a);
      th.real_values = {rng.log_uniform(spec.visc_min, spec.visc_max)};
      break;
    }
    case ExperimentId::E5: {
      th.kind = HiddenKind::viscosity_and_amplitude;
      Rng rng = Rng::derive(static_cast<std::uint64_t>(sample_seed), 0x7e7a);
      double nu = rng.log_uniform(spec.visc_min, spec.visc_max);
      double a = rng.uniform(spec.amp_min, spec.amp_max);
      th.real_values = {nu, a};
      break;
    }
  }
  return th;
}

inline PdeSample generate_sample(const ExperimentSpec& spec,
                                 std::int64_t sample_seed, int n_frames,
                                 double t_final) {
  spec.validate();
  PdeSample smp;
  smp.experiment_id = spec.id;
  smp.sample_seed = sample_seed;
  smp.theta = draw_hidden(spec, sample_seed);
  (void)t_final;

  Rng ic_rng = Rng::derive(static_cast<std::uint64_t>(sample_seed), 0x1c);
  if (spec.is_1d()) {
    Grid1D grid = spec.grid_1d();
    std::vector<double> u0 = sample_initial_condition_1d(grid, ic_rng);
    Rhs1DSpec rhs;
    switch (spec.id) {
      case ExperimentId::E1:
        rhs.variant = Rhs1DVariant::E1_force;
        rhs.force_id = *smp.theta.categorical_label;
        break;
      case ExperimentId::E2:
        rhs.variant = Rhs1DVariant::E2_diffusivity;
        rhs.diffusivity_id = *smp.theta.categorical_label;
        break;
      default:
        rhs.variant = Rhs1DVariant::E3_cde;
        rhs.boundary = boundary_kind_from_id(*smp.theta.categorical_label);
        break;
    }
    smp.series = integrate_1d(u0, rhs, grid, spec.dt_solver, n_frames,
                              spec.dt_frame());
  } else {
    Grid2D gen_grid = spec.grid_2d_gen();
    std::vector<double> w0 = sample_initial_condition_2d(gen_grid, ic_rng);
    NseSpec nse;
    switch (spec.id) {
      case ExperimentId::E4:
        nse.forcing = NseForcing::fixed_e4;
        nse.viscosity = smp.theta.real_values[0];
        break;
      case ExperimentId::E5:
        nse.forcing = NseForcing::amplitude_e5;
        nse.viscosity = smp.theta.real_values[0];
        nse.amplitude = smp.theta.real_values[1];
        break;
      default:
        nse.forcing = NseForcing::kolmogorov_e6;
        nse.viscosity = smp.theta.real_values[0];
        break;
    }
    FieldSeries fine = integrate_nse(w0, gen_grid, nse, spec.dt_solver,
                                     n_frames, spec.dt_frame());
    if (spec.downsample_factor == 1) {
      smp.series = std::move(fine);
    } else {
      Grid2D stored = spec.grid_2d_stored();
      FieldSeries coarse;
      coarse.n_frames = n_frames;
      coarse.channels = 1;
      coarse.grid = stored;
      coarse.dt_frame = fine.dt_frame;
      coarse.t0 = fine.t0;
      coarse.values.reserve(static_cast<std::size_t>(n_frames) * spec.n_2d *
                            spec.n_2d);
      for (int f = 0; f < n_frames; ++f) {
        std::vector<double> frame(fine.frame(f),
                                  fine.frame(f) + fine.frame_size());
        auto ds = downsample_2d(frame, gen_grid.n_x, gen_grid.n_y,
                                spec.downsample_factor);
        coarse.values.insert(coarse.values.end(), ds.begin(), ds.end());
      }
      smp.series = std::move(coarse);
    }
  }
  quantize_to_f32(smp.series);
  return smp;
}

struct DatasetSplits {
  Dataset train, val, test;
};

inline Dataset build_split(const ExperimentSpec& spec, int split, int count,
                           std::int64_t base_seed, bool is_test) {
  int n_frames = is_test ? spec.n_frames_test : spec.n_frames_train;
  double t_final = is_test ? spec.t_test : spec.t_train;
  std::vector<PdeSample> samples;
  samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    std::int64_t seed = split_seed(base_seed, split, i);
    try {
      samples.push_back(generate_sample(spec, seed, n_frames, t_final));
    } catch (const BlowUpError& e) {
      throw BlowUpError("sample seed " + std::to_string(seed) + ": " +
                        e.what());
    }
  }
  return Dataset(std::move(samples));
}

inline DatasetSplits build_dataset(const ExperimentSpec& spec, int n_train,
                                   int n_val, int n_test,
                                   std::int64_t base_seed) {
  DatasetSplits out;
  out.train = build_split(spec, 0, n_train, base_seed, false);
  out.val = build_split(spec, 1, n_val, base_seed, false);
  out.test = build_split(spec, 2, n_test, base_seed, true);
  return out;
}

}  // namespace piano::sim
