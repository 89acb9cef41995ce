#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "piano/core/binio.hpp"
#include "piano/encoder/pretrain.hpp"
#include "piano/nn/checkpoint.hpp"
#include "piano/op/model.hpp"
#include "piano/report/png.hpp"
#include "piano/sim/experiment.hpp"
#include "piano/train/cluster.hpp"
#include "piano/train/metrics.hpp"
#include "piano/train/probes.hpp"
#include "piano/train/train.hpp"

// Pipeline stages shared by the command-line driver and the acceptance
// harness. Each run_* function reads/writes artifacts under an output
// directory; every artifact embeds (config hash, seed, version).

namespace piano::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "piano-0.1.0";

// ---- small helpers ----

inline void ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
}

inline void require_artifact(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw MissingArtifactError("missing artifact: " + path);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open for writing: " + path);
  out << text;
  if (!out.good()) throw FormatError("write failed: " + path);
}

inline json load_json(const std::string& path) {
  require_artifact(path);
  std::ifstream in(path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return j;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_hash(const json& cfg) {
  return hash_hex(binio::fnv1a(cfg.dump()));
}

inline void write_loss_csv(const std::string& path,
                           const std::vector<double>& trace,
                           const std::string& cfg_hash, std::uint64_t seed) {
  std::string out = "# config_hash=" + cfg_hash +
                    " seed=" + std::to_string(seed) + " version=" + kVersion +
                    "\nstep,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, trace[i]);
    out += buf;
  }
  write_text(path, out);
}

inline double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// ---- config (de)serialization ----

inline json encoder_config_json(const EncoderConfig& c) {
  return {{"dim", c.dim},         {"t_patch", c.t_patch},
          {"patch_n", c.patch_n}, {"d_h", c.d_h},
          {"proj_hidden", c.proj_hidden}, {"proj_out", c.proj_out},
          {"spec_width", c.spec_width},   {"conv_width", c.conv_width},
          {"modes", c.modes},     {"fc_hidden", c.fc_hidden}};
}

inline EncoderConfig encoder_config_from_json(const json& j) {
  EncoderConfig c;
  c.dim = j.at("dim");
  c.t_patch = j.at("t_patch");
  c.patch_n = j.at("patch_n");
  c.d_h = j.at("d_h");
  c.proj_hidden = j.at("proj_hidden");
  c.proj_out = j.at("proj_out");
  c.spec_width = j.at("spec_width");
  c.conv_width = j.at("conv_width");
  c.modes = j.at("modes");
  c.fc_hidden = j.at("fc_hidden");
  c.validate();
  return c;
}

inline json operator_config_json(const OperatorConfig& c) {
  return {{"dim", c.dim},       {"t_in", c.t_in},
          {"t_out", c.t_out},   {"width", c.width},
          {"modes", c.modes},   {"n_kernels", c.n_kernels},
          {"d_h", c.d_h},       {"n_tiles", c.n_tiles},
          {"attn_hidden", c.attn_hidden}};
}

inline OperatorConfig operator_config_from_json(const json& j) {
  OperatorConfig c;
  c.dim = j.at("dim");
  c.t_in = j.at("t_in");
  c.t_out = j.at("t_out");
  c.width = j.at("width");
  c.modes = j.at("modes");
  c.n_kernels = j.at("n_kernels");
  c.d_h = j.at("d_h");
  c.n_tiles = j.at("n_tiles");
  c.attn_hidden = j.at("attn_hidden");
  c.validate();
  return c;
}

inline std::size_t attention_param_count(const OperatorConfig& c) {
  std::size_t h = c.attn_hidden;
  return (static_cast<std::size_t>(c.attn_in()) + 1) * h + (h + 1) * h +
         (h + 1) * c.n_kernels;
}

// ---- gen ----

struct GenOptions {
  ExperimentId experiment = ExperimentId::E1;
  std::string scale = "desk";
  std::string out;
  std::int64_t seed = 0;
  int workers = 1;  // accepted for interface stability; generation is serial
  int n_train = -1, n_val = -1, n_test = -1;  // -1 = preset
};

inline void run_gen(const GenOptions& opt) {
  if (opt.scale != "desk" && opt.scale != "paper")
    throw ConfigError("gen: scale must be desk or paper");
  sim::ExperimentSpec spec = opt.scale == "desk" ? sim::desk_spec(opt.experiment)
                                                 : sim::paper_spec(opt.experiment);
  sim::SplitSizes sizes = opt.scale == "desk"
                              ? sim::desk_split_sizes(opt.experiment)
                              : sim::paper_split_sizes(opt.experiment);
  if (opt.n_train > 0) sizes.n_train = opt.n_train;
  if (opt.n_val > 0) sizes.n_val = opt.n_val;
  if (opt.n_test > 0) sizes.n_test = opt.n_test;
  spec.validate();

  json cfg = {{"command", "gen"},
              {"experiment", to_string(opt.experiment)},
              {"scale", opt.scale},
              {"seed", opt.seed},
              {"n_train", sizes.n_train},
              {"n_val", sizes.n_val},
              {"n_test", sizes.n_test}};
  std::string chash = config_hash(cfg);

  double t0 = now_seconds();
  auto splits = sim::build_dataset(spec, sizes.n_train, sizes.n_val,
                                   sizes.n_test, opt.seed);
  ensure_dir(opt.out);
  std::string ptrain = opt.out + "/train.ds";
  std::string pval = opt.out + "/val.ds";
  std::string ptest = opt.out + "/test.ds";
  write_dataset(splits.train, ptrain);
  write_dataset(splits.val, pval);
  write_dataset(splits.test, ptest);

  json manifest = cfg;
  manifest["config_hash"] = chash;
  manifest["version"] = kVersion;
  manifest["elapsed_s"] = now_seconds() - t0;
  manifest["checksums"] = {{"train.ds", hash_hex(binio::file_checksum(ptrain))},
                           {"val.ds", hash_hex(binio::file_checksum(pval))},
                           {"test.ds", hash_hex(binio::file_checksum(ptest))}};
  switch (opt.experiment) {
    case ExperimentId::E1: {
      json ids = json::array();
      for (int i = 0; i < sim::kNumForces; ++i)
        ids.push_back({{"id", i}, {"force", sim::force_name(i)}});
      manifest["force_ids"] = ids;
      break;
    }
    case ExperimentId::E2:
      manifest["n_diffusivities"] = sim::kNumDiffusivities;
      break;
    case ExperimentId::E3:
      manifest["n_boundary_kinds"] = sim::kNumBoundaryKinds;
      break;
    default:
      manifest["viscosity_range"] = {spec.visc_min, spec.visc_max};
      if (opt.experiment == ExperimentId::E5)
        manifest["amplitude_range"] = {spec.amp_min, spec.amp_max};
      break;
  }
  write_text(opt.out + "/manifest.json", manifest.dump(2) + "\n");
}

// ---- pretrain ----

inline CropStrategy pretrain_strategy(ExperimentId exp,
                                      const std::string& variant) {
  if (variant == "piano") return default_crop_strategy(exp);
  if (variant == "pc") return swapped_crop_strategy(exp);
  if (variant == "sm") return CropStrategy::global;
  throw ConfigError("pretrain: unknown variant: " + variant);
}

namespace detail {

inline int dataset_axis_size(const Dataset& ds) {
  const auto& g = ds.series(0).grid;
  if (std::holds_alternative<Grid1D>(g)) return std::get<Grid1D>(g).n_points;
  return std::get<Grid2D>(g).n_x;
}

template <int DIM>
void pretrain_impl(const json& cfg, const std::string& out,
                   ExperimentId exp) {
  std::string dataset_dir = cfg.at("dataset_dir");
  std::string variant = cfg.value("variant", "piano");
  std::uint64_t seed = cfg.value("seed", 0);

  std::string train_path = dataset_dir + "/train.ds";
  require_artifact(train_path);
  Dataset train = read_dataset(train_path);
  DatasetView view(train);

  EncoderConfig ecfg = default_encoder_config(DIM);
  CropStrategy strategy = pretrain_strategy(exp, variant);
  if (variant == "sm") ecfg.patch_n = dataset_axis_size(train);
  if (cfg.contains("encoder"))
    ecfg = encoder_config_from_json(cfg.at("encoder"));
  ecfg.validate();

  ContrastiveConfig ccfg;
  ccfg.seed = seed;
  ccfg.steps = cfg.value("steps", 3000);
  ccfg.batch = cfg.value("batch", 64);
  ccfg.tau = cfg.value("tau", 0.5);
  ccfg.lr = cfg.value("lr", 1e-3);
  ccfg.weight_decay = cfg.value("weight_decay", 0.0);
  ccfg.noise_std = cfg.value("noise_std", 0.0);
  ccfg.include_positive_in_denominator =
      cfg.value("include_positive_in_denominator", false);
  ccfg.validate();

  std::string chash = config_hash(cfg);
  double t0 = now_seconds();

  Rng init = Rng::derive(seed, 0x5eed);
  EncoderNet<DIM> enc(ecfg, init);
  Projector proj(ecfg, init);
  auto trace = pretrain_encoder(enc, proj, view, strategy, ccfg);

  ensure_dir(out);
  json ckpt_cfg = {{"kind", "encoder"},
                   {"experiment", to_string(exp)},
                   {"variant", variant},
                   {"crop_strategy", to_string(strategy)},
                   {"encoder", encoder_config_json(ecfg)},
                   {"seed", seed},
                   {"config_hash", chash},
                   {"version", kVersion}};
  nn::ParamRefs params = enc.params();
  for (auto* p : proj.params()) params.push_back(p);
  nn::save_checkpoint(out + "/encoder.ckpt", params, ckpt_cfg.dump());
  write_loss_csv(out + "/loss.csv", trace, chash, seed);

  json manifest = {{"command", "pretrain"},
                   {"experiment", to_string(exp)},
                   {"variant", variant},
                   {"seed", seed},
                   {"config_hash", chash},
                   {"version", kVersion},
                   {"encoder_params", enc.n_params()},
                   {"steps", ccfg.steps},
                   {"final_loss", trace.back()},
                   {"elapsed_s", now_seconds() - t0}};
  write_text(out + "/manifest.json", manifest.dump(2) + "\n");
}

}  // namespace detail

inline void run_pretrain(const json& cfg, const std::string& out) {
  ExperimentId exp = experiment_from_string(cfg.at("experiment"));
  if (is_1d_experiment(exp))
    detail::pretrain_impl<1>(cfg, out, exp);
  else
    detail::pretrain_impl<2>(cfg, out, exp);
}

// ---- train ----

namespace detail {

// Loads an encoder checkpoint (kind "encoder": enc + projector arrays, or
// "encoder_raw": enc arrays only) into a fresh network.
template <int DIM>
EncoderConfig load_encoder_checkpoint(const std::string& path,
                                      std::optional<EncoderNet<DIM>>& enc) {
  require_artifact(path);
  json ccfg = json::parse(nn::checkpoint_config(path));
  EncoderConfig ecfg = encoder_config_from_json(ccfg.at("encoder"));
  if (ecfg.dim != DIM)
    throw ConfigError(path + ": encoder dimensionality mismatch");
  Rng dummy(0);
  enc.emplace(ecfg, dummy);
  nn::ParamRefs params = enc->params();
  std::optional<Projector> proj;
  if (ccfg.at("kind") == "encoder") {
    proj.emplace(ecfg, dummy);
    for (auto* p : proj->params()) params.push_back(p);
  } else if (ccfg.at("kind") != "encoder_raw") {
    throw FormatError(path + ": not an encoder checkpoint");
  }
  nn::load_checkpoint(path, params);
  return ecfg;
}

template <int DIM>
void train_impl(const json& cfg, const std::string& out, ExperimentId exp) {
  std::string dataset_dir = cfg.at("dataset_dir");
  std::string variant = cfg.value("variant", "piano");
  std::uint64_t seed = cfg.value("seed", 0);

  std::string train_path = dataset_dir + "/train.ds";
  require_artifact(train_path);
  Dataset train = read_dataset(train_path);
  DatasetView view(train);
  const int domain_n = dataset_axis_size(train);

  TrainConfig tcfg;
  tcfg.seed = seed;
  tcfg.epochs = cfg.value("epochs", 100);
  tcfg.batch = cfg.value("batch", 20);
  tcfg.lr = cfg.value("lr", 1e-3);
  tcfg.block_stride = cfg.value("block_stride", 20);
  tcfg.validate();

  std::string chash = config_hash(cfg);
  double t0 = now_seconds();
  ensure_dir(out);

  OperatorConfig ocfg = default_operator_config(DIM);
  json ckpt_cfg = {{"kind", "model"},
                   {"experiment", to_string(exp)},
                   {"variant", variant},
                   {"seed", seed},
                   {"config_hash", chash},
                   {"version", kVersion}};

  std::vector<double> trace;
  Rng init = Rng::derive(seed, 0x0a11);

  if (variant == "plain") {
    // Parameter-matched static backbone: one kernel, widened to match the
    // dynamic model plus its attention head.
    std::size_t target =
        operator_param_count(ocfg) + attention_param_count(ocfg);
    OperatorConfig pcfg = ocfg;
    pcfg.n_kernels = 1;
    pcfg.width = plain_width_for_parity(ocfg, target);
    FnoOperator<DIM> op(pcfg, init);
    trace = train_operator<DIM>(op, nullptr, nullptr, view, tcfg);
    ckpt_cfg["operator"] = operator_config_json(pcfg);
    nn::save_checkpoint(out + "/model.ckpt", op.params(), ckpt_cfg.dump());
    json manifest = {{"command", "train"},       {"variant", variant},
                     {"experiment", to_string(exp)}, {"seed", seed},
                     {"config_hash", chash},     {"version", kVersion},
                     {"model_params", op.n_params()},
                     {"final_loss", trace.back()},
                     {"elapsed_s", now_seconds() - t0}};
    write_text(out + "/manifest.json", manifest.dump(2) + "\n");
  } else if (variant == "piano") {
    std::string enc_path = cfg.at("encoder_checkpoint");
    std::optional<EncoderNet<DIM>> enc;
    EncoderConfig ecfg = load_encoder_checkpoint<DIM>(enc_path, enc);
    if (domain_n % ecfg.patch_n != 0)
      throw ConfigError("train: domain not divisible by encoder patch");
    int tiles_per_axis = domain_n / ecfg.patch_n;
    ocfg.d_h = ecfg.d_h;
    ocfg.n_tiles = DIM == 1 ? tiles_per_axis : tiles_per_axis * tiles_per_axis;

    auto H = embed_dataset(*enc, view);  // frozen embeddings, one per sample
    AttentionMlp attn(ocfg, init);
    FnoOperator<DIM> op(ocfg, init);
    trace = train_operator<DIM>(op, &attn, &H, view, tcfg);

    ckpt_cfg["operator"] = operator_config_json(ocfg);
    ckpt_cfg["encoder"] = encoder_config_json(ecfg);
    nn::ParamRefs params = enc->params();
    for (auto* p : attn.params()) params.push_back(p);
    for (auto* p : op.params()) params.push_back(p);
    nn::save_checkpoint(out + "/model.ckpt", params, ckpt_cfg.dump());
    // Standalone copy of the (frozen) encoder for probing.
    json enc_cfg = {{"kind", "encoder_raw"},
                    {"experiment", to_string(exp)},
                    {"variant", variant},
                    {"encoder", encoder_config_json(ecfg)},
                    {"seed", seed},
                    {"config_hash", chash},
                    {"version", kVersion}};
    nn::save_checkpoint(out + "/encoder.ckpt", enc->params(), enc_cfg.dump());
    json manifest = {{"command", "train"},       {"variant", variant},
                     {"experiment", to_string(exp)}, {"seed", seed},
                     {"config_hash", chash},     {"version", kVersion},
                     {"model_params",
                      op.n_params() + nn::total_params(attn.params())},
                     {"encoder_params", enc->n_params()},
                     {"final_loss", trace.back()},
                     {"elapsed_s", now_seconds() - t0}};
    write_text(out + "/manifest.json", manifest.dump(2) + "\n");
  } else if (variant == "cl") {
    // Joint training from scratch; no contrastive stage.
    EncoderConfig ecfg = default_encoder_config(DIM);
    if (cfg.contains("encoder"))
      ecfg = encoder_config_from_json(cfg.at("encoder"));
    if (domain_n % ecfg.patch_n != 0)
      throw ConfigError("train: domain not divisible by encoder patch");
    int tiles_per_axis = domain_n / ecfg.patch_n;
    ocfg.d_h = ecfg.d_h;
    ocfg.n_tiles = DIM == 1 ? tiles_per_axis : tiles_per_axis * tiles_per_axis;

    EncoderNet<DIM> enc(ecfg, init);
    AttentionMlp attn(ocfg, init);
    FnoOperator<DIM> op(ocfg, init);
    trace = train_joint<DIM>(enc, attn, op, view, tcfg);

    ckpt_cfg["operator"] = operator_config_json(ocfg);
    ckpt_cfg["encoder"] = encoder_config_json(ecfg);
    nn::ParamRefs params = enc.params();
    for (auto* p : attn.params()) params.push_back(p);
    for (auto* p : op.params()) params.push_back(p);
    nn::save_checkpoint(out + "/model.ckpt", params, ckpt_cfg.dump());
    json enc_cfg = {{"kind", "encoder_raw"},
                    {"experiment", to_string(exp)},
                    {"variant", variant},
                    {"encoder", encoder_config_json(ecfg)},
                    {"seed", seed},
                    {"config_hash", chash},
                    {"version", kVersion}};
    nn::save_checkpoint(out + "/encoder.ckpt", enc.params(), enc_cfg.dump());
    json manifest = {{"command", "train"},       {"variant", variant},
                     {"experiment", to_string(exp)}, {"seed", seed},
                     {"config_hash", chash},     {"version", kVersion},
                     {"model_params",
                      op.n_params() + nn::total_params(attn.params())},
                     {"encoder_params", enc.n_params()},
                     {"final_loss", trace.back()},
                     {"elapsed_s", now_seconds() - t0}};
    write_text(out + "/manifest.json", manifest.dump(2) + "\n");
  } else {
    throw ConfigError("train: unknown variant: " + variant);
  }
  write_loss_csv(out + "/loss.csv", trace, chash, seed);
}

}  // namespace detail

inline void run_train(const json& cfg, const std::string& out) {
  ExperimentId exp = experiment_from_string(cfg.at("experiment"));
  if (is_1d_experiment(exp))
    detail::train_impl<1>(cfg, out, exp);
  else
    detail::train_impl<2>(cfg, out, exp);
}

// ---- eval ----

namespace detail {

template <int DIM>
void eval_impl(const json& cfg, const std::string& out, ExperimentId exp) {
  std::string dataset_dir = cfg.at("dataset_dir");
  std::string model_path = cfg.at("model_checkpoint");
  bool heatmaps = cfg.value("heatmaps", false);
  bool linf_relative = cfg.value("linf_relative", true);

  std::string test_path = dataset_dir + "/test.ds";
  require_artifact(test_path);
  require_artifact(model_path);
  Dataset test = read_dataset(test_path);

  json mcfg = json::parse(nn::checkpoint_config(model_path));
  std::string variant = mcfg.at("variant");
  OperatorConfig ocfg = operator_config_from_json(mcfg.at("operator"));
  if (ocfg.dim != DIM) throw ConfigError(model_path + ": dim mismatch");

  Rng dummy(0);
  std::optional<EncoderNet<DIM>> enc;
  std::optional<AttentionMlp> attn;
  FnoOperator<DIM> op(ocfg, dummy);
  nn::ParamRefs params;
  if (variant != "plain") {
    EncoderConfig ecfg = encoder_config_from_json(mcfg.at("encoder"));
    enc.emplace(ecfg, dummy);
    attn.emplace(ocfg, dummy);
    params = enc->params();
    for (auto* p : attn->params()) params.push_back(p);
  }
  for (auto* p : op.params()) params.push_back(p);
  nn::load_checkpoint(model_path, params);

  const int t_in = ocfg.t_in;
  const int n_total = test.series(0).n_frames;
  const double unit_frames = 1.0 / test.series(0).dt_frame;
  const int n_train_frames =
      static_cast<int>(std::lround(n_total * 200.0 / 240.0));

  std::string chash = config_hash(cfg);
  double t0 = now_seconds();
  ensure_dir(out);

  MetricReport agg;
  json per_sample = json::array();
  json failures = json::array();
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& s = test.series(i);
    try {
      std::vector<double> a;
      if (variant == "plain") {
        a = uniform_attention(ocfg.n_kernels);
      } else {
        auto h = split_merge_embed(*enc, s);
        a = attn->forward(h, 1);
      }
      auto pred = rollout(op, a, s, n_total);
      auto rep = evaluate_forecast(pred, s, t_in, n_train_frames, n_total,
                                   linf_relative);
      agg.add(rep);
      per_sample.push_back({{"sample", i},
                            {"l2_train", rep.l2_train},
                            {"l2_future", rep.l2_future},
                            {"linf_train", rep.linf_train},
                            {"linf_future", rep.linf_future}});
      if (heatmaps && i == 0) {
        const int sp = spatial_size(s.grid);
        for (int t = 4; t <= 24; t += 4) {
          int frame = static_cast<int>(std::lround(t * unit_frames)) - 1;
          if (frame < t_in || frame >= n_total) continue;
          const double* p =
              pred.data() + static_cast<std::size_t>(frame - t_in) * sp;
          int nx = DIM == 1 ? 1 : std::get<Grid2D>(s.grid).n_x;
          int ny = DIM == 1 ? sp : std::get<Grid2D>(s.grid).n_y;
          write_comparison_heatmap(
              out + "/frame_t" + std::to_string(t) + ".png", p,
              s.frame(frame), nx, ny);
        }
      }
    } catch (const BlowUpError& e) {
      failures.push_back({{"sample", i}, {"error", e.what()}});
    }
  }
  agg.finish();

  json report = {{"command", "eval"},
                 {"experiment", to_string(exp)},
                 {"variant", variant},
                 {"model_checkpoint", model_path},
                 {"model_seed", mcfg.value("seed", 0)},
                 {"config_hash", chash},
                 {"version", kVersion},
                 {"n_test", test.size()},
                 {"n_evaluated", agg.n_trajectories},
                 {"linf_relative", linf_relative},
                 {"training_domain",
                  {{"e_l2", agg.l2_train}, {"e_linf", agg.linf_train}}},
                 {"future_domain",
                  {{"e_l2", agg.l2_future}, {"e_linf", agg.linf_future}}},
                 {"per_sample", per_sample},
                 {"failures", failures},
                 {"elapsed_s", now_seconds() - t0}};
  write_text(out + "/report.json", report.dump(2) + "\n");
}

}  // namespace detail

inline void run_eval(const json& cfg, const std::string& out) {
  ExperimentId exp = experiment_from_string(cfg.at("experiment"));
  if (is_1d_experiment(exp))
    detail::eval_impl<1>(cfg, out, exp);
  else
    detail::eval_impl<2>(cfg, out, exp);
}

// ---- probe ----

namespace detail {

template <int DIM>
void probe_impl(const json& cfg, const std::string& out, ExperimentId exp) {
  std::string dataset_dir = cfg.at("dataset_dir");
  std::string enc_path = cfg.at("encoder_checkpoint");

  Dataset train = read_dataset(dataset_dir + "/train.ds");
  Dataset val = read_dataset(dataset_dir + "/val.ds");
  Dataset test = read_dataset(dataset_dir + "/test.ds");

  std::optional<EncoderNet<DIM>> enc;
  load_encoder_checkpoint<DIM>(enc_path, enc);

  DatasetView train_view(train), val_view(val), test_view(test);
  auto Htr = embed_dataset(*enc, train_view);
  auto Hva = embed_dataset(*enc, val_view);
  auto Hte = embed_dataset(*enc, test_view);
  const int n_tr = static_cast<int>(train.size());
  const int n_ho = static_cast<int>(val.size() + test.size());
  const int d = static_cast<int>(Htr.size()) / n_tr;
  std::vector<double> Hho = Hva;
  Hho.insert(Hho.end(), Hte.begin(), Hte.end());

  // Degeneracy: near-zero total variance of the embeddings.
  double var = 0.0;
  {
    std::vector<double> mean(d, 0.0);
    for (int i = 0; i < n_tr; ++i)
      for (int j = 0; j < d; ++j)
        mean[j] += Htr[static_cast<std::size_t>(i) * d + j];
    for (double& m : mean) m /= n_tr;
    for (int i = 0; i < n_tr; ++i)
      for (int j = 0; j < d; ++j) {
        double t = Htr[static_cast<std::size_t>(i) * d + j] - mean[j];
        var += t * t;
      }
    var /= n_tr;
  }
  bool degenerate = var < 1e-12;

  std::string chash = config_hash(cfg);
  double t0 = now_seconds();
  json result = {{"command", "probe"},
                 {"experiment", to_string(exp)},
                 {"encoder_checkpoint", enc_path},
                 {"config_hash", chash},
                 {"version", kVersion},
                 {"embedding_dim", d},
                 {"n_train", n_tr},
                 {"n_holdout", n_ho},
                 {"degenerate", degenerate}};

  std::uint64_t probe_seed = cfg.value("seed", 0);
  Rng rng = Rng::derive(probe_seed, 0x90be);

  if (is_1d_experiment(exp)) {
    auto labels_of = [](const Dataset& ds) {
      std::vector<int> y;
      for (std::size_t i = 0; i < ds.size(); ++i)
        y.push_back(*ds.eval_only_label(i).categorical_label);
      return y;
    };
    auto ytr = labels_of(train);
    auto yho = labels_of(val);
    for (int v : labels_of(test)) yho.push_back(v);
    int k = 1 + *std::max_element(ytr.begin(), ytr.end());

    double acc_tr = 0.0, acc_ho = 0.0;
    if (!degenerate) {
      Standardizer st;
      st.fit(Htr, n_tr, d);
      auto Xtr = st.apply(Htr, n_tr, d);
      auto Xho = st.apply(Hho, n_ho, d);
      LogisticProbe probe;
      probe.fit(Xtr, ytr, n_tr, d, k);
      acc_tr = probe.accuracy(Xtr, ytr, n_tr);
      acc_ho = probe.accuracy(Xho, yho, n_ho);
    }

    // Clustering on the test-set embeddings.
    auto yte = labels_of(test);
    const int n_te = static_cast<int>(test.size());
    json clustering;
    if (degenerate) {
      clustering = {{"degenerate", true}};
    } else {
      auto km = kmeans(Hte, n_te, d, k, rng);
      clustering = {
          {"k", k},
          {"ari", adjusted_rand_index(km.labels, yte)},
          {"nmi", normalized_mutual_information(km.labels, yte)},
          {"fmi", fowlkes_mallows_index(km.labels, yte)},
          {"silhouette", silhouette_score(Hte, n_te, d, km.labels)},
          {"degenerate", false}};
    }
    result["clustering"] = clustering;
    result["probe"] = {{"type", "classification"},
                       {"n_classes", k},
                       {"train_accuracy", acc_tr},
                       {"holdout_accuracy", acc_ho}};
  } else {
    auto targets_of = [](const Dataset& ds) {
      std::vector<double> y;
      for (std::size_t i = 0; i < ds.size(); ++i)
        y.push_back(std::log10(ds.eval_only_label(i).viscosity()));
      return y;
    };
    auto ytr = targets_of(train);
    auto yho = targets_of(val);
    for (double v : targets_of(test)) yho.push_back(v);

    double pearson = 0.0, spearman = 0.0, rel = 0.0;
    if (!degenerate) {
      auto pc1 = pc1_scores(Htr, n_tr, d);
      pearson = std::abs(pearson_correlation(pc1, ytr));
      spearman = std::abs(spearman_correlation(pc1, ytr));
      Standardizer st;
      st.fit(Htr, n_tr, d);
      auto Xtr = st.apply(Htr, n_tr, d);
      auto Xho = st.apply(Hho, n_ho, d);
      RidgeProbe probe;
      probe.fit(Xtr, ytr, n_tr, d);
      rel = probe.rel_error(Xho, yho, n_ho);
    }
    result["pc1_correlation"] = {{"pearson", pearson},
                                 {"spearman", spearman},
                                 {"degenerate", degenerate}};
    result["probe"] = {{"type", "regression"},
                       {"target", "log10_viscosity"},
                       {"holdout_rel_error", rel}};
  }
  result["elapsed_s"] = now_seconds() - t0;
  ensure_dir(out);
  write_text(out + "/probe.json", result.dump(2) + "\n");
}

}  // namespace detail

inline void run_probe(const json& cfg, const std::string& out) {
  ExperimentId exp = experiment_from_string(cfg.at("experiment"));
  if (is_1d_experiment(exp))
    detail::probe_impl<1>(cfg, out, exp);
  else
    detail::probe_impl<2>(cfg, out, exp);
}

// ---- report ----

inline void run_report(const std::vector<std::string>& run_dirs,
                       const std::string& out) {
  struct Row {
    std::string name, variant;
    double l2_train, linf_train, l2_future, linf_future;
  };
  std::vector<Row> rows;
  std::vector<std::string> skipped;
  for (const auto& dir : run_dirs) {
    std::string path = dir + "/report.json";
    try {
      json r = load_json(path);
      rows.push_back({std::filesystem::path(dir).filename().string(),
                      r.at("variant"),
                      r.at("training_domain").at("e_l2"),
                      r.at("training_domain").at("e_linf"),
                      r.at("future_domain").at("e_l2"),
                      r.at("future_domain").at("e_linf")});
    } catch (const std::exception& e) {
      skipped.push_back(path + ": " + e.what());
    }
  }
  if (rows.empty())
    throw MissingArtifactError("report: no readable report files");

  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", 100.0 * v);
    return std::string(buf);
  };

  // Baseline for improvement columns: the unique plain-variant run, if any.
  int base = -1;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].variant == "plain") base = base < 0 ? static_cast<int>(i) : -2;
  bool improvements = base >= 0 && rows.size() > 1;

  std::string md =
      "| run | variant | E_l2 train (%) | E_linf train (%) | E_l2 future (%) "
      "| E_linf future (%) |";
  std::string csv =
      "run,variant,e_l2_train_pct,e_linf_train_pct,e_l2_future_pct,"
      "e_linf_future_pct";
  if (improvements) {
    md += " improv. train (%) | improv. future (%) |";
    csv += ",improvement_train_pct,improvement_future_pct";
  }
  md += "\n|---|---|---|---|---|---|";
  if (improvements) md += "---|---|";
  md += "\n";
  csv += "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    md += "| " + r.name + " | " + r.variant + " | " + pct(r.l2_train) + " | " +
          pct(r.linf_train) + " | " + pct(r.l2_future) + " | " +
          pct(r.linf_future) + " |";
    csv += r.name + "," + r.variant + "," + pct(r.l2_train) + "," +
           pct(r.linf_train) + "," + pct(r.l2_future) + "," +
           pct(r.linf_future);
    if (improvements) {
      if (static_cast<int>(i) == base) {
        md += " - | - |";
        csv += ",,";
      } else {
        auto imp = [&](double v, double b) {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%.3f", (1.0 - v / b) * 100.0);
          return std::string(buf);
        };
        std::string it = imp(r.l2_train, rows[base].l2_train);
        std::string ifu = imp(r.l2_future, rows[base].l2_future);
        md += " " + it + " | " + ifu + " |";
        csv += "," + it + "," + ifu;
      }
    }
    md += "\n";
    csv += "\n";
  }
  if (!skipped.empty()) {
    md += "\nSkipped malformed reports:\n";
    for (const auto& s : skipped) md += "- " + s + "\n";
  }
  ensure_dir(out);
  write_text(out + "/report.md", md);
  write_text(out + "/report.csv", csv);
}

}  // namespace piano::cli
