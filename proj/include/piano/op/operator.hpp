#pragma once

#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include "piano/nn/layers.hpp"
#include "piano/nn/spectral.hpp"

namespace piano {

// Fourier neural operator that advances a block of t_in frames to the next
// t_out frames. The first spectral layer's weights are assembled per sample
// as an attention-weighted sum over a bank of n_kernels kernels; with
// n_kernels = 1 the layer degenerates to a static one and the model is the
// plain backbone.
struct OperatorConfig {
  int dim = 1;
  int t_in = 20, t_out = 20;
  int width = 24;
  int modes = 12;
  int n_kernels = 4;
  int d_h = 32;        // encoder embedding dim
  int n_tiles = 2;     // V tiles whose embeddings are concatenated
  int attn_hidden = 64;

  int attn_in() const { return d_h * n_tiles; }
  int in_channels() const { return t_in + dim; }  // frames + coordinates

  void validate() const {
    if (dim != 1 && dim != 2) throw ConfigError("OperatorConfig: dim must be 1 or 2");
    if (t_in < 1 || t_out < 1 || width < 1 || modes < 1)
      throw ConfigError("OperatorConfig: sizes must be positive");
    if (n_kernels < 1)
      throw ConfigError("OperatorConfig: n_kernels must be >= 1");
    if (n_tiles < 1) throw ConfigError("OperatorConfig: n_tiles must be >= 1");
  }
};

inline OperatorConfig default_operator_config(int dim) {
  OperatorConfig c;
  c.dim = dim;
  if (dim == 2) {
    c.width = 16;
    c.modes = 8;
    c.n_tiles = 4;
  }
  return c;
}

// Exact parameter count of the operator body (excludes encoder/attention).
inline std::size_t operator_param_count(const OperatorConfig& c) {
  std::size_t kept = c.dim == 1
                         ? static_cast<std::size_t>(c.modes)
                         : 2 * static_cast<std::size_t>(c.modes) * c.modes;
  std::size_t w = c.width;
  std::size_t n = 0;
  n += w * c.in_channels() + w;                      // lift
  n += 2 * c.n_kernels * w * w * kept;               // dynamic bank
  n += 3 * (2 * w * w * kept);                       // static spectral layers
  n += 4 * (w * w + w);                              // bypasses
  n += 2 * w * w + 2 * w;                            // projection hidden
  n += static_cast<std::size_t>(c.t_out) * 2 * w + c.t_out;
  return n;
}

// Width for a plain backbone (n_kernels = 1) whose parameter count is
// closest to `target`; throws if no width lands within `tol` of it.
inline int plain_width_for_parity(OperatorConfig cfg, std::size_t target,
                                  double tol = 0.10) {
  cfg.n_kernels = 1;
  int best_w = -1;
  double best_rel = 1e9;
  for (int w = 1; w <= 4 * cfg.width + 64; ++w) {
    cfg.width = w;
    std::size_t n = operator_param_count(cfg);
    double rel = std::abs(static_cast<double>(n) - static_cast<double>(target)) /
                 static_cast<double>(target);
    if (rel < best_rel) {
      best_rel = rel;
      best_w = w;
    }
  }
  if (best_rel > tol)
    throw ConfigError("plain_width_for_parity: no width within tolerance");
  return best_w;
}

// h -> attention weights on the kernel bank: two hidden GeLU layers then a
// row softmax.
class AttentionMlp {
 public:
  AttentionMlp(const OperatorConfig& cfg, Rng& rng)
      : K_(cfg.n_kernels),
        f1_("attn.f1", cfg.attn_in(), cfg.attn_hidden, rng),
        f2_("attn.f2", cfg.attn_hidden, cfg.attn_hidden, rng),
        f3_("attn.f3", cfg.attn_hidden, cfg.n_kernels, rng) {}

  // h: [B, attn_in] -> a: [B, K], rows on the simplex.
  std::vector<double> forward(const std::vector<double>& h, int B) {
    auto s = f3_.forward(g2_.forward(f2_.forward(
                             g1_.forward(f1_.forward(h, B)), B)), B);
    a_.resize(s.size());
    for (int bi = 0; bi < B; ++bi) {
      const double* sr = s.data() + static_cast<std::size_t>(bi) * K_;
      double* ar = a_.data() + static_cast<std::size_t>(bi) * K_;
      double mx = sr[0];
      for (int k = 1; k < K_; ++k) mx = std::max(mx, sr[k]);
      double z = 0.0;
      for (int k = 0; k < K_; ++k) z += std::exp(sr[k] - mx);
      for (int k = 0; k < K_; ++k) ar[k] = std::exp(sr[k] - mx) / z;
    }
    return a_;
  }

  std::vector<double> backward(const std::vector<double>& ga, int B) {
    std::vector<double> gs(ga.size());
    for (int bi = 0; bi < B; ++bi) {
      const double* ar = a_.data() + static_cast<std::size_t>(bi) * K_;
      const double* gr = ga.data() + static_cast<std::size_t>(bi) * K_;
      double dot = 0.0;
      for (int k = 0; k < K_; ++k) dot += ar[k] * gr[k];
      double* out = gs.data() + static_cast<std::size_t>(bi) * K_;
      for (int k = 0; k < K_; ++k) out[k] = ar[k] * (gr[k] - dot);
    }
    return f1_.backward(
        g1_.backward(f2_.backward(g2_.backward(f3_.backward(gs, B)), B)), B);
  }

  nn::ParamRefs params() {
    return {&f1_.W, &f1_.b, &f2_.W, &f2_.b, &f3_.W, &f3_.b};
  }

 private:
  int K_;
  nn::Linear f1_, f2_, f3_;
  nn::GeluStage g1_, g2_;
  std::vector<double> a_;
};

template <int DIM>
class FnoOperator {
  static_assert(DIM == 1 || DIM == 2);

 public:
  FnoOperator(const OperatorConfig& cfg, Rng& rng)
      : cfg_(cfg),
        lift_("op.lift", cfg.in_channels(), cfg.width, rng),
        dyn_("op.l1", cfg.width, cfg.width, cfg.modes, cfg.n_kernels, rng),
        by1_("op.by1", cfg.width, cfg.width, rng),
        s2_("op.l2", cfg.width, cfg.width, cfg.modes, rng),
        by2_("op.by2", cfg.width, cfg.width, rng),
        s3_("op.l3", cfg.width, cfg.width, cfg.modes, rng),
        by3_("op.by3", cfg.width, cfg.width, rng),
        s4_("op.l4", cfg.width, cfg.width, cfg.modes, rng),
        by4_("op.by4", cfg.width, cfg.width, rng),
        p1_("op.p1", cfg.width, 2 * cfg.width, rng),
        p2_("op.p2", 2 * cfg.width, cfg.t_out, rng) {
    cfg_.validate();
    if (cfg_.dim != DIM) throw ConfigError("FnoOperator: dim mismatch");
  }

  // x: [B, t_in, spatial], a: [B, n_kernels], N per-axis size.
  // Coordinate channels (normalized grid positions) are appended inside.
  std::vector<double> forward(const std::vector<double>& x, int B, int N,
                              const std::vector<double>& a) {
    const int sp = spatial(N);
    N_ = N;
    if (x.size() != static_cast<std::size_t>(B) * cfg_.t_in * sp)
      throw ConfigError("FnoOperator: input shape mismatch");
    if (a.size() != static_cast<std::size_t>(B) * cfg_.n_kernels)
      throw ConfigError("FnoOperator: attention shape mismatch");

    const int cin = cfg_.in_channels();
    std::vector<double> xc(static_cast<std::size_t>(B) * cin * sp);
    for (int bi = 0; bi < B; ++bi) {
      double* xb = xc.data() + static_cast<std::size_t>(bi) * cin * sp;
      std::copy(x.begin() + static_cast<std::size_t>(bi) * cfg_.t_in * sp,
                x.begin() + static_cast<std::size_t>(bi + 1) * cfg_.t_in * sp,
                xb);
      double* coord = xb + static_cast<std::size_t>(cfg_.t_in) * sp;
      if constexpr (DIM == 1) {
        for (int n = 0; n < N; ++n) coord[n] = static_cast<double>(n) / N;
      } else {
        for (int j = 0; j < N; ++j)
          for (int k = 0; k < N; ++k) {
            coord[static_cast<std::size_t>(j) * N + k] =
                static_cast<double>(j) / N;
            coord[static_cast<std::size_t>(sp) +
                  static_cast<std::size_t>(j) * N + k] =
                static_cast<double>(k) / N;
          }
      }
    }

    auto v = lift_.forward(xc, B, sp);
    auto y = dyn_.forward(v, B, N, a);
    auto by = by1_.forward(v, B, sp);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += by[i];
    y = g1_.forward(std::move(y));

    auto step = [&](nn::SpectralConv<DIM>& s, nn::PointwiseLinear& byp,
                    nn::GeluStage* g, std::vector<double>& in) {
      auto o = s.forward(in, B, N);
      auto b2 = byp.forward(in, B, sp);
      for (std::size_t i = 0; i < o.size(); ++i) o[i] += b2[i];
      if (g) o = g->forward(std::move(o));
      return o;
    };
    auto y2 = step(s2_, by2_, &g2_, y);
    auto y3 = step(s3_, by3_, &g3_, y2);
    auto y4 = step(s4_, by4_, nullptr, y3);

    auto p = g4_.forward(p1_.forward(y4, B, sp));
    return p2_.forward(p, B, sp);
  }

  // Returns the gradient w.r.t. the t_in input frames (coordinate-channel
  // gradients are dropped); writes the attention gradient into ga.
  std::vector<double> backward(const std::vector<double>& gy, int B,
                               std::vector<double>& ga) {
    const int N = N_, sp = spatial(N);
    auto g = p2_.backward(gy, B);
    g = g4_.backward(std::move(g));
    g = p1_.backward(g, B);

    auto unstep = [&](nn::SpectralConv<DIM>& s, nn::PointwiseLinear& byp,
                      nn::GeluStage* gs, std::vector<double>& gin) {
      if (gs) gin = gs->backward(std::move(gin));
      auto gx = s.backward(gin, B);
      auto gb = byp.backward(gin, B);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gb[i];
      return gx;
    };
    // Note the reversed GeLU placement: layer 4 had none.
    auto g3v = unstep(s4_, by4_, nullptr, g);
    g3v = g3_.backward(std::move(g3v));
    auto g2v = unstep(s3_, by3_, nullptr, g3v);
    g2v = g2_.backward(std::move(g2v));
    auto g1v = unstep(s2_, by2_, nullptr, g2v);
    g1v = g1_.backward(std::move(g1v));

    auto gv = dyn_.backward(g1v, B, ga);
    auto gb = by1_.backward(g1v, B);
    for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += gb[i];
    auto gxc = lift_.backward(gv, B);

    const int cin = cfg_.in_channels();
    std::vector<double> gx(static_cast<std::size_t>(B) * cfg_.t_in * sp);
    for (int bi = 0; bi < B; ++bi)
      std::copy(gxc.begin() + static_cast<std::size_t>(bi) * cin * sp,
                gxc.begin() + static_cast<std::size_t>(bi) * cin * sp +
                    static_cast<std::size_t>(cfg_.t_in) * sp,
                gx.begin() + static_cast<std::size_t>(bi) * cfg_.t_in * sp);
    return gx;
  }

  // Effective first-layer weights for a given attention row.
  void assemble_first_layer(const double* a, std::vector<double>& wre,
                            std::vector<double>& wim) const {
    dyn_.assemble(a, wre, wim);
  }

  nn::ParamRefs params() {
    nn::ParamRefs ps = lift_.params();
    for (auto* p : dyn_.params()) ps.push_back(p);
    for (auto* p : by1_.params()) ps.push_back(p);
    for (auto* p : s2_.params()) ps.push_back(p);
    for (auto* p : by2_.params()) ps.push_back(p);
    for (auto* p : s3_.params()) ps.push_back(p);
    for (auto* p : by3_.params()) ps.push_back(p);
    for (auto* p : s4_.params()) ps.push_back(p);
    for (auto* p : by4_.params()) ps.push_back(p);
    for (auto* p : p1_.params()) ps.push_back(p);
    for (auto* p : p2_.params()) ps.push_back(p);
    return ps;
  }

  const OperatorConfig& config() const { return cfg_; }
  std::size_t n_params() { return nn::total_params(params()); }
  nn::DynamicSpectralConv<DIM>& first_layer() { return dyn_; }

 private:
  static int spatial(int N) { return DIM == 1 ? N : N * N; }

  OperatorConfig cfg_;
  nn::PointwiseLinear lift_;
  nn::DynamicSpectralConv<DIM> dyn_;
  nn::PointwiseLinear by1_;
  nn::SpectralConv<DIM> s2_;
  nn::PointwiseLinear by2_;
  nn::SpectralConv<DIM> s3_;
  nn::PointwiseLinear by3_;
  nn::SpectralConv<DIM> s4_;
  nn::PointwiseLinear by4_;
  nn::PointwiseLinear p1_, p2_;
  nn::GeluStage g1_, g2_, g3_, g4_;
  int N_ = 0;
};

using FnoOperator1d = FnoOperator<1>;
using FnoOperator2d = FnoOperator<2>;

}  // namespace piano
