#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "piano/encoder/crop.hpp"
#include "piano/encoder/encoder.hpp"
#include "piano/encoder/simclr.hpp"
#include "piano/field/dataset.hpp"
#include "piano/nn/adam.hpp"

namespace piano {

// Contrastive pre-training of encoder + projection head. Each step draws
// `batch` distinct series, crops a positive pair from each, and runs both
// views through the network as one 2B batch. Returns the per-step loss
// trace. The caller owns the (already constructed) encoder and projector.
template <int DIM>
std::vector<double> pretrain_encoder(EncoderNet<DIM>& enc, Projector& proj,
                                     const DatasetView& data,
                                     CropStrategy strategy,
                                     const ContrastiveConfig& ccfg) {
  ccfg.validate();
  const EncoderConfig& ecfg = enc.config();
  const int B = ccfg.batch;
  if (data.size() < static_cast<std::size_t>(B))
    throw ConfigError("pretrain_encoder: dataset smaller than batch (" +
                      std::to_string(data.size()) + " < " +
                      std::to_string(B) + ")");

  nn::ParamRefs params = enc.params();
  for (auto* p : proj.params()) params.push_back(p);
  nn::Adam opt(params, ccfg.lr);
  opt.set_cosine_schedule(ccfg.steps);
  opt.set_weight_decay(ccfg.weight_decay);

  Rng rng = Rng::derive(ccfg.seed, 0x9e);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t patch_sz = static_cast<std::size_t>(ecfg.t_patch) *
                               (DIM == 1 ? ecfg.patch_n
                                         : ecfg.patch_n * ecfg.patch_n);
  std::vector<double> trace;
  trace.reserve(ccfg.steps);
  std::vector<double> X(2 * static_cast<std::size_t>(B) * patch_sz);

  for (int step = 0; step < ccfg.steps; ++step) {
    rng.shuffle(order);
    for (int bi = 0; bi < B; ++bi) {
      std::size_t idx = order[bi];
      auto [p1, p2] = crop_pair(data.series(idx),
                                static_cast<std::int64_t>(idx), strategy,
                                ecfg, rng);
      if (p1.values.size() != patch_sz || p2.values.size() != patch_sz)
        throw ConfigError("pretrain_encoder: patch size mismatch");
      std::copy(p1.values.begin(), p1.values.end(),
                X.begin() + static_cast<std::size_t>(bi) * patch_sz);
      std::copy(p2.values.begin(), p2.values.end(),
                X.begin() + static_cast<std::size_t>(B + bi) * patch_sz);
    }
    if (ccfg.noise_std > 0.0)
      for (double& v : X) v += rng.normal(0.0, ccfg.noise_std);

    auto h = enc.forward(X, 2 * B);
    auto z = proj.forward(h, 2 * B);
    const int d = static_cast<int>(z.size()) / (2 * B);
    std::vector<double> z1(z.begin(), z.begin() + static_cast<std::size_t>(B) * d);
    std::vector<double> z2(z.begin() + static_cast<std::size_t>(B) * d, z.end());
    auto lg = simclr_loss_grad(z1, z2, B, d, ccfg.tau,
                               ccfg.include_positive_in_denominator);
    if (!std::isfinite(lg.loss))
      throw BlowUpError("pretrain_encoder: non-finite loss at step " +
                        std::to_string(step));
    trace.push_back(lg.loss);

    std::vector<double> gz(z.size());
    std::copy(lg.g1.begin(), lg.g1.end(), gz.begin());
    std::copy(lg.g2.begin(), lg.g2.end(),
              gz.begin() + static_cast<std::size_t>(B) * d);
    nn::zero_grads(params);
    enc.backward(proj.backward(gz, 2 * B), 2 * B);
    opt.step();
  }
  return trace;
}

}  // namespace piano
