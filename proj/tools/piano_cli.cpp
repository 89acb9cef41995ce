#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "piano/cli/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBlowUp = 3;
constexpr int kExitMissing = 4;

std::string ablation_to_variant(const std::string& name) {
  if (name.empty()) return "";
  if (name == "plain_backbone" || name == "plain") return "plain";
  if (name == "no_contrastive" || name == "cl") return "cl";
  if (name == "global_crop" || name == "sm") return "sm";
  if (name == "swapped_cropping" || name == "pc") return "pc";
  throw piano::ConfigError("unknown ablation: " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PDE forecasting with parameter-aware neural operators"};
  app.require_subcommand(1);

  // gen
  piano::cli::GenOptions gen_opt;
  std::string gen_experiment = "e1";
  auto* gen = app.add_subcommand("gen", "generate trajectory datasets");
  gen->add_option("--experiment", gen_experiment, "experiment id (e1..e6)")
      ->required();
  gen->add_option("--scale", gen_opt.scale, "preset: desk or paper");
  gen->add_option("--out", gen_opt.out, "output directory")->required();
  gen->add_option("--seed", gen_opt.seed, "base seed");
  gen->add_option("--workers", gen_opt.workers, "worker count (serial run)");
  gen->add_option("--n-train", gen_opt.n_train, "override train sample count");
  gen->add_option("--n-val", gen_opt.n_val, "override val sample count");
  gen->add_option("--n-test", gen_opt.n_test, "override test sample count");

  // config-driven stages
  struct StageArgs {
    std::string config, out, ablation;
  };
  StageArgs pre_args, train_args, eval_args, probe_args;
  auto add_stage = [&](const char* name, const char* desc, StageArgs& a,
                       bool with_ablation) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", a.config, "JSON config file")->required();
    sub->add_option("--out", a.out, "output directory")->required();
    if (with_ablation)
      sub->add_option("--ablation", a.ablation, "ablation variant override");
    return sub;
  };
  auto* pre = add_stage("pretrain", "contrastive encoder pretraining",
                        pre_args, true);
  auto* train = add_stage("train", "operator training", train_args, true);
  auto* eval = add_stage("eval", "forecast evaluation", eval_args, false);
  auto* probe = add_stage("probe", "representation analyses", probe_args,
                          false);

  // report
  std::vector<std::string> report_runs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "comparison table across runs");
  report->add_option("--runs", report_runs, "run directories")->required();
  report->add_option("--out", report_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) {
      gen_opt.experiment = piano::experiment_from_string(gen_experiment);
      piano::cli::run_gen(gen_opt);
    } else if (pre->parsed()) {
      auto cfg = piano::cli::load_json(pre_args.config);
      if (!pre_args.ablation.empty())
        cfg["variant"] = ablation_to_variant(pre_args.ablation);
      piano::cli::run_pretrain(cfg, pre_args.out);
    } else if (train->parsed()) {
      auto cfg = piano::cli::load_json(train_args.config);
      if (!train_args.ablation.empty())
        cfg["variant"] = ablation_to_variant(train_args.ablation);
      piano::cli::run_train(cfg, train_args.out);
    } else if (eval->parsed()) {
      piano::cli::run_eval(piano::cli::load_json(eval_args.config),
                           eval_args.out);
    } else if (probe->parsed()) {
      piano::cli::run_probe(piano::cli::load_json(probe_args.config),
                            probe_args.out);
    } else if (report->parsed()) {
      piano::cli::run_report(report_runs, report_out);
    }
  } catch (const piano::MissingArtifactError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissing;
  } catch (const piano::BlowUpError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
