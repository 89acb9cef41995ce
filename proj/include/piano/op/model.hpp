#pragma once

#include <vector>

#include "piano/encoder/encoder.hpp"
#include "piano/field/dataset.hpp"
#include "piano/op/operator.hpp"

namespace piano {

// Tile windows for the split-merge embedding: V disjoint patches covering
// the domain (halves in 1D, quadrants in 2D), ordered along the axes.
inline std::vector<std::vector<AxisRange>> split_tiles(
    const FieldSeries& s, int patch_n) {
  std::vector<std::vector<AxisRange>> tiles;
  if (std::holds_alternative<Grid1D>(s.grid)) {
    int n = std::get<Grid1D>(s.grid).n_points;
    if (n % patch_n != 0)
      throw ConfigError("split_tiles: domain not divisible by patch");
    for (int b = 0; b < n; b += patch_n) tiles.push_back({{b, b + patch_n}});
  } else {
    const auto& g = std::get<Grid2D>(s.grid);
    if (g.n_x % patch_n != 0 || g.n_y % patch_n != 0)
      throw ConfigError("split_tiles: domain not divisible by patch");
    for (int bx = 0; bx < g.n_x; bx += patch_n)
      for (int by = 0; by < g.n_y; by += patch_n)
        tiles.push_back({{bx, bx + patch_n}, {by, by + patch_n}});
  }
  return tiles;
}

// Split-merge embedding of the first t_patch frames: encode each tile and
// concatenate, giving [V * d_h]. Computed once per rollout.
template <int DIM>
std::vector<double> split_merge_embed(EncoderNet<DIM>& enc,
                                      const FieldSeries& s, int k0 = 0) {
  const EncoderConfig& cfg = enc.config();
  auto tiles = split_tiles(s, cfg.patch_n);
  const int V = static_cast<int>(tiles.size());
  const std::size_t patch_sz =
      static_cast<std::size_t>(cfg.t_patch) *
      (DIM == 1 ? cfg.patch_n : cfg.patch_n * cfg.patch_n);
  std::vector<double> X(static_cast<std::size_t>(V) * patch_sz);
  for (int v = 0; v < V; ++v) {
    Patch p = crop_window(s, -1, k0, cfg.t_patch, tiles[v]);
    std::copy(p.values.begin(), p.values.end(),
              X.begin() + static_cast<std::size_t>(v) * patch_sz);
  }
  auto h = enc.forward(X, V);  // [V, d_h], already contiguous
  return h;
}

// Backward companion: distributes gh [V * d_h] through the encoder after a
// matching split_merge_embed call (the encoder cache must still hold it).
template <int DIM>
void split_merge_backward(EncoderNet<DIM>& enc, const std::vector<double>& gh,
                          int n_tiles) {
  enc.backward(gh, n_tiles);
}

// Autoregressive forecast. Seeds with the first t_in true frames of `s` and
// predicts frames [t_in, n_total) in blocks of t_out, feeding predictions
// back in. `a` is the per-sample attention row. Returns the predicted
// frames flattened [n_total - t_in, spatial].
template <int DIM>
std::vector<double> rollout(FnoOperator<DIM>& op, const std::vector<double>& a,
                            const FieldSeries& s, int n_total) {
  const OperatorConfig& cfg = op.config();
  const int sp = spatial_size(s.grid);
  const int N = DIM == 1 ? sp : std::get<Grid2D>(s.grid).n_x;
  if (n_total > s.n_frames || n_total <= cfg.t_in)
    throw ConfigError("rollout: bad frame count");

  std::vector<double> window(static_cast<std::size_t>(cfg.t_in) * sp);
  for (int k = 0; k < cfg.t_in; ++k)
    std::copy(s.frame(k), s.frame(k) + sp,
              window.begin() + static_cast<std::size_t>(k) * sp);

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_total - cfg.t_in) * sp);
  int t = cfg.t_in;
  while (t < n_total) {
    auto pred = op.forward(window, 1, N, a);  // [t_out, sp]
    int take = std::min(cfg.t_out, n_total - t);
    out.insert(out.end(), pred.begin(),
               pred.begin() + static_cast<std::size_t>(take) * sp);
    // Slide the window over the newly predicted frames.
    if (cfg.t_out >= cfg.t_in) {
      std::copy(pred.begin() +
                    static_cast<std::size_t>(cfg.t_out - cfg.t_in) * sp,
                pred.end(), window.begin());
    } else {
      std::move(window.begin() + static_cast<std::size_t>(cfg.t_out) * sp,
                window.end(), window.begin());
      std::copy(pred.begin(), pred.end(),
                window.end() - static_cast<std::size_t>(cfg.t_out) * sp);
    }
    t += take;
  }
  return out;
}

// Uniform attention row for a plain backbone (n_kernels = 1 gives {1}).
inline std::vector<double> uniform_attention(int n_kernels, int batch = 1) {
  return std::vector<double>(static_cast<std::size_t>(batch) * n_kernels,
                             1.0 / n_kernels);
}

}  // namespace piano
