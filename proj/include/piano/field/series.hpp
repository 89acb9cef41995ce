#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "piano/core/errors.hpp"
#include "piano/field/grid.hpp"

namespace piano {

enum class ExperimentId { E1, E2, E3, E4, E5, E6 };

inline std::string to_string(ExperimentId id) {
  switch (id) {
    case ExperimentId::E1: return "e1";
    case ExperimentId::E2: return "e2";
    case ExperimentId::E3: return "e3";
    case ExperimentId::E4: return "e4";
    case ExperimentId::E5: return "e5";
    case ExperimentId::E6: return "e6";
  }
  throw ConfigError("bad experiment id");
}

inline ExperimentId experiment_from_string(const std::string& s) {
  if (s == "e1" || s == "E1") return ExperimentId::E1;
  if (s == "e2" || s == "E2") return ExperimentId::E2;
  if (s == "e3" || s == "E3") return ExperimentId::E3;
  if (s == "e4" || s == "E4") return ExperimentId::E4;
  if (s == "e5" || s == "E5") return ExperimentId::E5;
  if (s == "e6" || s == "E6") return ExperimentId::E6;
  throw ConfigError("unknown experiment id: " + s);
}

inline bool is_1d_experiment(ExperimentId id) {
  return id == ExperimentId::E1 || id == ExperimentId::E2 ||
         id == ExperimentId::E3;
}

// Which hidden parameter a sample carries.
enum class HiddenKind : std::uint32_t {
  force_id = 0,
  diffusivity_id = 1,
  boundary_id = 2,
  viscosity = 3,
  viscosity_and_amplitude = 4,
};

struct HiddenParameter {
  HiddenKind kind = HiddenKind::force_id;
  std::optional<int> categorical_label;
  std::vector<double> real_values;

  bool is_categorical() const {
    return kind == HiddenKind::force_id || kind == HiddenKind::diffusivity_id ||
           kind == HiddenKind::boundary_id;
  }
  double viscosity() const {
    if (real_values.empty()) throw ConfigError("hidden parameter has no reals");
    return real_values[0];
  }
};

// Time-ordered stack of scalar fields: values shape [n_frames, channels,
// spatial...] flattened row-major.
struct FieldSeries {
  std::vector<double> values;
  int n_frames = 0;
  int channels = 1;
  Grid grid;
  double dt_frame = 0.0;
  double t0 = 0.0;

  int frame_size() const { return channels * spatial_size(grid); }
  const double* frame(int k) const {
    if (k < 0 || k >= n_frames)
      throw BoundsError("FieldSeries: frame " + std::to_string(k) +
                        " out of [0," + std::to_string(n_frames) + ")");
    return values.data() + static_cast<std::size_t>(k) * frame_size();
  }
  double* frame(int k) {
    return const_cast<double*>(
        static_cast<const FieldSeries*>(this)->frame(k));
  }
  void validate() const {
    if (n_frames < 1) throw ConfigError("FieldSeries: n_frames must be >= 1");
    if (!(dt_frame > 0.0)) throw ConfigError("FieldSeries: dt_frame must be > 0");
    if (values.size() !=
        static_cast<std::size_t>(n_frames) * frame_size())
      throw ConfigError("FieldSeries: value buffer size mismatch");
    for (double v : values)
      if (!std::isfinite(v)) throw BlowUpError("FieldSeries: non-finite value");
  }
};

struct PdeSample {
  FieldSeries series;
  HiddenParameter theta;  // generation/eval only; training paths never see it
  ExperimentId experiment_id = ExperimentId::E1;
  std::int64_t sample_seed = 0;
};

// Index window per spatial axis, half-open [begin, end).
struct AxisRange {
  int begin = 0, end = 0;
  int size() const { return end - begin; }
};

// Spatiotemporal crop with provenance.
struct Patch {
  std::vector<double> values;  // [t_patch, channels, window...]
  int t_patch = 0;
  int channels = 1;
  std::vector<AxisRange> spatial_window;  // one per axis
  std::int64_t sample_id = -1;
  int time_offset = 0;

  int window_size() const {
    int s = 1;
    for (const auto& r : spatial_window) s *= r.size();
    return s;
  }
};

inline Patch crop_window(const FieldSeries& series, std::int64_t sample_id,
                         int k, int t, const std::vector<AxisRange>& window) {
  if (k < 0 || t < 1 || k + t > series.n_frames)
    throw BoundsError("crop_window: frames [" + std::to_string(k) + "," +
                      std::to_string(k + t) + ") outside [0," +
                      std::to_string(series.n_frames) + ")");
  std::vector<int> extents;
  if (std::holds_alternative<Grid1D>(series.grid)) {
    extents = {std::get<Grid1D>(series.grid).n_points};
  } else {
    const auto& g = std::get<Grid2D>(series.grid);
    extents = {g.n_x, g.n_y};
  }
  if (window.size() != extents.size())
    throw BoundsError("crop_window: window rank mismatch");
  for (std::size_t a = 0; a < window.size(); ++a) {
    if (window[a].begin < 0 || window[a].end > extents[a] ||
        window[a].size() < 1)
      throw BoundsError("crop_window: axis " + std::to_string(a) +
                        " window out of bounds");
  }

  Patch p;
  p.t_patch = t;
  p.channels = series.channels;
  p.spatial_window = window;
  p.sample_id = sample_id;
  p.time_offset = k;
  p.values.reserve(static_cast<std::size_t>(t) * series.channels *
                   p.window_size());
  for (int f = k; f < k + t; ++f) {
    const double* fr = series.frame(f);
    for (int c = 0; c < series.channels; ++c) {
      if (extents.size() == 1) {
        const double* row = fr + static_cast<std::size_t>(c) * extents[0];
        for (int j = window[0].begin; j < window[0].end; ++j)
          p.values.push_back(row[j]);
      } else {
        const double* plane =
            fr + static_cast<std::size_t>(c) * extents[0] * extents[1];
        for (int j = window[0].begin; j < window[0].end; ++j)
          for (int m = window[1].begin; m < window[1].end; ++m)
            p.values.push_back(plane[static_cast<std::size_t>(j) * extents[1] +
                                     m]);
      }
    }
  }
  return p;
}

// Strided subsampling: out[j,k] = in[j*factor, k*factor].
inline std::vector<double> downsample_2d(const std::vector<double>& in, int nx,
                                         int ny, int factor) {
  if (factor < 1) throw ConfigError("downsample_2d: factor must be >= 1");
  if (nx % factor != 0 || ny % factor != 0)
    throw ConfigError("downsample_2d: sizes not divisible by factor");
  int ox = nx / factor, oy = ny / factor;
  std::vector<double> out(static_cast<std::size_t>(ox) * oy);
  for (int j = 0; j < ox; ++j)
    for (int k = 0; k < oy; ++k)
      out[static_cast<std::size_t>(j) * oy + k] =
          in[static_cast<std::size_t>(j) * factor * ny + k * factor];
  return out;
}

}  // namespace piano
