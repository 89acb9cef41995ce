#pragma once

#include <type_traits>
#include <vector>

#include "piano/encoder/config.hpp"
#include "piano/nn/layers.hpp"
#include "piano/nn/spectral.hpp"

namespace piano {

// PI encoder P: spectral x2, strided conv x2, flatten, fully connected x2.
// Input [B, t_patch, patch_n (x patch_n)], output [B, d_h].
template <int DIM>
class EncoderNet {
 public:
  using Conv = std::conditional_t<DIM == 1, nn::Conv1dK3S2, nn::Conv2dK3S2>;

  EncoderNet(const EncoderConfig& cfg, Rng& rng)
      : cfg_(cfg),
        s1_("enc.s1", cfg.t_patch, cfg.spec_width, cfg.modes, rng),
        by1_("enc.by1", cfg.t_patch, cfg.spec_width, rng),
        s2_("enc.s2", cfg.spec_width, cfg.spec_width, cfg.modes, rng),
        by2_("enc.by2", cfg.spec_width, cfg.spec_width, rng),
        c1_("enc.c1", cfg.spec_width, cfg.conv_width, rng),
        c2_("enc.c2", cfg.conv_width, cfg.conv_width, rng),
        f1_("enc.f1", cfg.flat_size(), cfg.fc_hidden, rng),
        f2_("enc.f2", cfg.fc_hidden, cfg.d_h, rng) {
    cfg_.validate();
    if (cfg_.dim != DIM) throw ConfigError("EncoderNet: dim mismatch");
  }

  std::vector<double> forward(const std::vector<double>& x, int B) {
    const int N = cfg_.patch_n;
    const int sp = DIM == 1 ? N : N * N;
    if (x.size() != static_cast<std::size_t>(B) * cfg_.t_patch * sp)
      throw ConfigError("EncoderNet: input shape mismatch");
    auto y = s1_.forward(x, B, N);
    auto by = by1_.forward(x, B, sp);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += by[i];
    y = g1_.forward(std::move(y));

    auto y2 = s2_.forward(y, B, N);
    by = by2_.forward(y, B, sp);
    for (std::size_t i = 0; i < y2.size(); ++i) y2[i] += by[i];
    y2 = g2_.forward(std::move(y2));

    auto y3 = g3_.forward(c1_.forward(y2, B, N));
    const int N2 = N / 2;
    auto y4 = g4_.forward(c2_.forward(y3, B, N2));
    // flatten [B, conv_width * (N/4)^DIM] is a no-op on the flat buffer
    auto y5 = g5_.forward(f1_.forward(y4, B));
    return f2_.forward(y5, B);
  }

  std::vector<double> backward(const std::vector<double>& gh, int B) {
    auto g = f2_.backward(gh, B);
    g = g5_.backward(std::move(g));
    g = f1_.backward(g, B);
    g = g4_.backward(std::move(g));
    g = c2_.backward(g, B);
    g = g3_.backward(std::move(g));
    g = c1_.backward(g, B);
    g = g2_.backward(std::move(g));
    auto gs = s2_.backward(g, B);
    auto gb = by2_.backward(g, B);
    for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += gb[i];
    gs = g1_.backward(std::move(gs));
    auto gx = s1_.backward(gs, B);
    gb = by1_.backward(gs, B);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gb[i];
    return gx;
  }

  nn::ParamRefs params() {
    nn::ParamRefs ps;
    for (auto* p : s1_.params()) ps.push_back(p);
    for (auto* p : by1_.params()) ps.push_back(p);
    for (auto* p : s2_.params()) ps.push_back(p);
    for (auto* p : by2_.params()) ps.push_back(p);
    for (auto* p : c1_.params()) ps.push_back(p);
    for (auto* p : c2_.params()) ps.push_back(p);
    for (auto* p : f1_.params()) ps.push_back(p);
    for (auto* p : f2_.params()) ps.push_back(p);
    return ps;
  }

  const EncoderConfig& config() const { return cfg_; }
  std::size_t n_params() { return nn::total_params(params()); }

 private:
  EncoderConfig cfg_;
  nn::SpectralConv<DIM> s1_;
  nn::PointwiseLinear by1_;
  nn::SpectralConv<DIM> s2_;
  nn::PointwiseLinear by2_;
  Conv c1_, c2_;
  nn::Linear f1_, f2_;
  nn::GeluStage g1_, g2_, g3_, g4_, g5_;
};

// Two-layer projection head g: z = W2 GeLU(W1 h + b1) + b2.
class Projector {
 public:
  Projector(const EncoderConfig& cfg, Rng& rng)
      : f1_("proj.f1", cfg.d_h, cfg.proj_hidden, rng),
        f2_("proj.f2", cfg.proj_hidden, cfg.proj_out, rng) {}

  std::vector<double> forward(const std::vector<double>& h, int B) {
    return f2_.forward(g_.forward(f1_.forward(h, B)), B);
  }
  std::vector<double> backward(const std::vector<double>& gz, int B) {
    return f1_.backward(g_.backward(f2_.backward(gz, B)), B);
  }
  nn::ParamRefs params() { return {&f1_.W, &f1_.b, &f2_.W, &f2_.b}; }

  nn::Linear f1_, f2_;

 private:
  nn::GeluStage g_;
};

}  // namespace piano
