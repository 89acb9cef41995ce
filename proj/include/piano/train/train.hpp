#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "piano/encoder/encoder.hpp"
#include "piano/field/dataset.hpp"
#include "piano/nn/adam.hpp"
#include "piano/op/model.hpp"
#include "piano/op/operator.hpp"

namespace piano {

struct TrainConfig {
  int epochs = 100;
  int batch = 20;
  double lr = 1e-3;
  int block_stride = 20;  // offset spacing of teacher-forced blocks
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 1 || batch < 1 || block_stride < 1)
      throw ConfigError("TrainConfig: sizes must be positive");
    if (!(lr > 0.0)) throw ConfigError("TrainConfig: lr must be > 0");
  }
};

namespace detail {

inline int axis_size(const Grid& g) {
  if (std::holds_alternative<Grid1D>(g)) return std::get<Grid1D>(g).n_points;
  return std::get<Grid2D>(g).n_x;
}

struct Block {
  int sample;
  int offset;
};

inline std::vector<Block> make_blocks(const DatasetView& data,
                                      const OperatorConfig& cfg, int stride) {
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < data.size(); ++i) {
    int nf = data.series(i).n_frames;
    for (int k = 0; k + cfg.t_in + cfg.t_out <= nf; k += stride)
      blocks.push_back({static_cast<int>(i), k});
  }
  if (blocks.empty()) throw ConfigError("make_blocks: no training blocks");
  return blocks;
}

inline void copy_frames(const FieldSeries& s, int k0, int count, double* dst) {
  const int sp = spatial_size(s.grid);
  for (int k = 0; k < count; ++k)
    std::copy(s.frame(k0 + k), s.frame(k0 + k) + sp,
              dst + static_cast<std::size_t>(k) * sp);
}

// Mean relative l2 block loss and its gradient w.r.t. pred.
inline double block_loss_grad(const std::vector<double>& pred,
                              const std::vector<double>& tgt, int B,
                              std::size_t block_sz, std::vector<double>& g) {
  g.assign(pred.size(), 0.0);
  double loss = 0.0;
  for (int bi = 0; bi < B; ++bi) {
    const double* p = pred.data() + static_cast<std::size_t>(bi) * block_sz;
    const double* t = tgt.data() + static_cast<std::size_t>(bi) * block_sz;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < block_sz; ++i) {
      double d = p[i] - t[i];
      num += d * d;
      den += t[i] * t[i];
    }
    num = std::sqrt(num);
    den = std::sqrt(den);
    if (!(den > 0.0)) throw ConfigError("block_loss_grad: zero target block");
    loss += num / den;
    if (num > 0.0) {
      double* gb = g.data() + static_cast<std::size_t>(bi) * block_sz;
      double c = 1.0 / (B * num * den);
      for (std::size_t i = 0; i < block_sz; ++i) gb[i] = c * (p[i] - t[i]);
    }
  }
  return loss / B;
}

}  // namespace detail

// Trains the operator on teacher-forced blocks with a frozen conditioning
// embedding. `H` holds one precomputed embedding row per sample and `attn`
// maps it to kernel-bank weights; pass both as null for the plain backbone
// (n_kernels must then be 1). Returns the per-epoch mean loss.
template <int DIM>
std::vector<double> train_operator(FnoOperator<DIM>& op, AttentionMlp* attn,
                                   const std::vector<double>* H,
                                   const DatasetView& data,
                                   const TrainConfig& tcfg) {
  tcfg.validate();
  const OperatorConfig& cfg = op.config();
  if ((attn == nullptr) != (H == nullptr))
    throw ConfigError("train_operator: attn and H must be given together");
  if (!attn && cfg.n_kernels != 1)
    throw ConfigError("train_operator: plain backbone requires n_kernels=1");

  auto blocks = detail::make_blocks(data, cfg, tcfg.block_stride);
  const int sp = spatial_size(data.series(0).grid);
  const int N = detail::axis_size(data.series(0).grid);
  const std::size_t in_sz = static_cast<std::size_t>(cfg.t_in) * sp;
  const std::size_t out_sz = static_cast<std::size_t>(cfg.t_out) * sp;
  const int hin = cfg.attn_in();

  nn::ParamRefs params = op.params();
  if (attn)
    for (auto* p : attn->params()) params.push_back(p);
  nn::Adam opt(params, tcfg.lr);
  long steps_per_epoch =
      (static_cast<long>(blocks.size()) + tcfg.batch - 1) / tcfg.batch;
  opt.set_cosine_schedule(steps_per_epoch * tcfg.epochs);

  Rng rng = Rng::derive(tcfg.seed, 0x0b);
  std::vector<double> trace;
  trace.reserve(tcfg.epochs);
  std::vector<double> x, tgt, hb, gpred, ga;

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    rng.shuffle(blocks);
    double epoch_loss = 0.0;
    long n_steps = 0;
    for (std::size_t s0 = 0; s0 < blocks.size(); s0 += tcfg.batch) {
      int B = static_cast<int>(
          std::min<std::size_t>(tcfg.batch, blocks.size() - s0));
      x.resize(static_cast<std::size_t>(B) * in_sz);
      tgt.resize(static_cast<std::size_t>(B) * out_sz);
      if (attn) hb.resize(static_cast<std::size_t>(B) * hin);
      for (int bi = 0; bi < B; ++bi) {
        const auto& blk = blocks[s0 + bi];
        const auto& s = data.series(blk.sample);
        detail::copy_frames(s, blk.offset, cfg.t_in,
                            x.data() + static_cast<std::size_t>(bi) * in_sz);
        detail::copy_frames(s, blk.offset + cfg.t_in, cfg.t_out,
                            tgt.data() + static_cast<std::size_t>(bi) * out_sz);
        if (attn)
          std::copy(H->begin() + static_cast<std::size_t>(blk.sample) * hin,
                    H->begin() + static_cast<std::size_t>(blk.sample + 1) * hin,
                    hb.begin() + static_cast<std::size_t>(bi) * hin);
      }
      std::vector<double> a = attn ? attn->forward(hb, B)
                                   : uniform_attention(cfg.n_kernels, B);
      auto pred = op.forward(x, B, N, a);
      double loss = detail::block_loss_grad(pred, tgt, B, out_sz, gpred);
      if (!std::isfinite(loss))
        throw BlowUpError("train_operator: non-finite loss at epoch " +
                          std::to_string(epoch));
      epoch_loss += loss;
      ++n_steps;
      nn::zero_grads(params);
      op.backward(gpred, B, ga);
      if (attn) attn->backward(ga, B);  // encoder is frozen; gh is dropped
      opt.step();
    }
    trace.push_back(epoch_loss / n_steps);
  }
  return trace;
}

// Joint training of encoder + attention + operator on the prediction loss
// only (no contrastive term). Samples are processed one at a time with all
// their blocks batched, so the per-layer caches stay coherent through the
// encoder backward pass.
template <int DIM>
std::vector<double> train_joint(EncoderNet<DIM>& enc, AttentionMlp& attn,
                                FnoOperator<DIM>& op, const DatasetView& data,
                                const TrainConfig& tcfg) {
  tcfg.validate();
  const OperatorConfig& cfg = op.config();
  const int sp = spatial_size(data.series(0).grid);
  const int N = detail::axis_size(data.series(0).grid);
  const std::size_t in_sz = static_cast<std::size_t>(cfg.t_in) * sp;
  const std::size_t out_sz = static_cast<std::size_t>(cfg.t_out) * sp;
  const int K = cfg.n_kernels;

  nn::ParamRefs params = enc.params();
  for (auto* p : attn.params()) params.push_back(p);
  for (auto* p : op.params()) params.push_back(p);
  nn::Adam opt(params, tcfg.lr);
  opt.set_cosine_schedule(static_cast<long>(tcfg.epochs) * data.size());

  Rng rng = Rng::derive(tcfg.seed, 0x0c);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<double> trace;
  trace.reserve(tcfg.epochs);
  std::vector<double> x, tgt, gpred, ga;

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t idx : order) {
      const auto& s = data.series(idx);
      auto h = split_merge_embed(enc, s);  // [V, d_h]
      const int V = static_cast<int>(h.size()) / enc.config().d_h;
      auto a1 = attn.forward(h, 1);  // concatenated row, [1, K]

      int nb = 0;
      for (int k = 0; k + cfg.t_in + cfg.t_out <= s.n_frames;
           k += tcfg.block_stride)
        ++nb;
      if (!nb) throw ConfigError("train_joint: series too short for blocks");
      x.resize(static_cast<std::size_t>(nb) * in_sz);
      tgt.resize(static_cast<std::size_t>(nb) * out_sz);
      std::vector<double> a(static_cast<std::size_t>(nb) * K);
      int bi = 0;
      for (int k = 0; k + cfg.t_in + cfg.t_out <= s.n_frames;
           k += tcfg.block_stride, ++bi) {
        detail::copy_frames(s, k, cfg.t_in,
                            x.data() + static_cast<std::size_t>(bi) * in_sz);
        detail::copy_frames(s, k + cfg.t_in, cfg.t_out,
                            tgt.data() + static_cast<std::size_t>(bi) * out_sz);
        std::copy(a1.begin(), a1.end(),
                  a.begin() + static_cast<std::size_t>(bi) * K);
      }

      auto pred = op.forward(x, nb, N, a);
      double loss = detail::block_loss_grad(pred, tgt, nb, out_sz, gpred);
      if (!std::isfinite(loss))
        throw BlowUpError("train_joint: non-finite loss at epoch " +
                          std::to_string(epoch));
      epoch_loss += loss;
      nn::zero_grads(params);
      op.backward(gpred, nb, ga);
      // The shared attention row receives the sum over blocks.
      std::vector<double> ga1(K, 0.0);
      for (int b = 0; b < nb; ++b)
        for (int k = 0; k < K; ++k)
          ga1[k] += ga[static_cast<std::size_t>(b) * K + k];
      auto gh = attn.backward(ga1, 1);
      enc.backward(gh, V);
      opt.step();
    }
    trace.push_back(epoch_loss / data.size());
  }
  return trace;
}

// Per-sample split-merge embeddings with a frozen encoder: [n, V * d_h].
template <int DIM>
std::vector<double> embed_dataset(EncoderNet<DIM>& enc,
                                  const DatasetView& data) {
  std::vector<double> H;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto h = split_merge_embed(enc, data.series(i));
    H.insert(H.end(), h.begin(), h.end());
  }
  return H;
}

}  // namespace piano
