#pragma once

#include <utility>
#include <vector>

#include "piano/core/rng.hpp"
#include "piano/encoder/config.hpp"
#include "piano/field/series.hpp"

namespace piano {

namespace detail {

inline std::vector<int> grid_extents(const FieldSeries& s) {
  if (std::holds_alternative<Grid1D>(s.grid))
    return {std::get<Grid1D>(s.grid).n_points};
  const auto& g = std::get<Grid2D>(s.grid);
  return {g.n_x, g.n_y};
}

inline std::vector<AxisRange> draw_window(const std::vector<int>& extents,
                                          int patch_n, CropStrategy strategy,
                                          Rng& rng) {
  std::vector<AxisRange> w;
  for (std::size_t a = 0; a < extents.size(); ++a) {
    int n = extents[a];
    if (patch_n > n) throw ConfigError("crop: patch larger than domain");
    int start;
    switch (strategy) {
      case CropStrategy::global:
        if (patch_n != n)
          throw ConfigError("crop: global strategy requires patch = domain");
        start = 0;
        break;
      case CropStrategy::boundary:
        if (extents.size() != 1)
          throw ConfigError("crop: boundary strategy is 1D-only");
        // Window touches the first or last cell, side chosen uniformly.
        start = rng.uniform_int(2) == 0 ? 0 : n - patch_n;
        break;
      default:
        start = static_cast<int>(rng.uniform_int(
            static_cast<std::uint64_t>(n - patch_n + 1)));
        break;
    }
    w.push_back({start, start + patch_n});
  }
  return w;
}

}  // namespace detail

// Two homologous patches of one series per the physics-aware strategy:
// spatiotemporal = independent (k, window); temporal = independent k,
// shared window; boundary = independent k, boundary-anchored windows;
// global = full field, independent k.
inline std::pair<Patch, Patch> crop_pair(const FieldSeries& series,
                                         std::int64_t sample_id,
                                         CropStrategy strategy,
                                         const EncoderConfig& cfg, Rng& rng) {
  if (cfg.t_patch > series.n_frames)
    throw ConfigError("crop_pair: patch length exceeds series frames");
  auto extents = detail::grid_extents(series);

  int k1 = static_cast<int>(rng.uniform_int(
      static_cast<std::uint64_t>(series.n_frames - cfg.t_patch + 1)));
  int k2 = static_cast<int>(rng.uniform_int(
      static_cast<std::uint64_t>(series.n_frames - cfg.t_patch + 1)));
  auto w1 = detail::draw_window(extents, cfg.patch_n, strategy, rng);
  auto w2 = strategy == CropStrategy::temporal
                ? w1
                : detail::draw_window(extents, cfg.patch_n, strategy, rng);
  return {crop_window(series, sample_id, k1, cfg.t_patch, w1),
          crop_window(series, sample_id, k2, cfg.t_patch, w2)};
}

}  // namespace piano
