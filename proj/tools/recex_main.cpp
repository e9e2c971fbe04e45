// Command-line driver for the collaborative-filtering explanation pipeline.
//
// Subcommands: synth, prepare, split, train-gnn, pretrain-lm, train-adapter,
// generate, evaluate, pipeline. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "recex/errors.hpp"
#include "recex/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> work_dir;
  std::optional<std::string> dataset;
  bool no_profiles = false;
  bool no_injection = false;
  bool zero_shot = false;
  std::optional<std::string> backend;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--seed", flags.seed, "master seed (overrides config)");
  cmd->add_option("--work-dir", flags.work_dir, "artifact directory");
  cmd->add_option("--dataset", flags.dataset, "dataset JSONL path");
  cmd->add_flag("--no-profiles", flags.no_profiles,
                "build prompts without user/item profiles");
  cmd->add_flag("--no-injection", flags.no_injection,
                "disable per-layer embedding injection");
  cmd->add_flag("--zero-shot", flags.zero_shot,
                "enable the inference-time embedding rule for unseen users");
  cmd->add_option("--backend", flags.backend, "text backend: template|external");
}

// CLI > file > defaults.
recex::RunConfig resolve_config(const CommonFlags& flags) {
  recex::RunConfig cfg;
  if (!flags.config_path.empty()) cfg = recex::RunConfig::load(flags.config_path);
  if (flags.seed) {
    cfg.seed = *flags.seed;
    // a fresh master seed re-derives the stage seeds
    cfg.synth.seed = cfg.sparsity.seed = cfg.graph.seed = 0;
    cfg.pretrain.seed = cfg.adapter_train.seed = cfg.decode.seed = 0;
  }
  if (flags.work_dir) cfg.work_dir = *flags.work_dir;
  if (flags.dataset) cfg.dataset_path = *flags.dataset;
  if (flags.no_profiles) cfg.include_profiles = false;
  if (flags.no_injection) cfg.injection = false;
  if (flags.zero_shot) cfg.zero_shot = true;
  if (flags.backend) cfg.backend = *flags.backend;
  cfg.resolve();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-collaborative-filtering explanation pipeline"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string pairs_path, out_path, generations_path, report_txt, report_jsonl;

  CLI::App* synth = app.add_subcommand("synth", "generate the synthetic dataset");
  add_common(synth, flags);

  CLI::App* prepare =
      app.add_subcommand("prepare", "generate profiles and distill explanations");
  add_common(prepare, flags);

  CLI::App* split =
      app.add_subcommand("split", "train/val/test + sparsity and zero-shot splits");
  add_common(split, flags);

  CLI::App* train_gnn =
      app.add_subcommand("train-gnn", "train the collaborative tokenizer");
  add_common(train_gnn, flags);

  CLI::App* pretrain = app.add_subcommand("pretrain-lm", "pretrain the language model");
  add_common(pretrain, flags);

  CLI::App* train_adapter =
      app.add_subcommand("train-adapter", "train the mixture-of-experts adapter");
  add_common(train_adapter, flags);

  CLI::App* generate = app.add_subcommand("generate", "generate explanations for pairs");
  add_common(generate, flags);
  generate->add_option("--pairs", pairs_path, "pairs JSONL (default: work dir pairs)");
  generate->add_option("--out", out_path, "output JSONL");

  CLI::App* evaluate = app.add_subcommand("evaluate", "score generations and report");
  add_common(evaluate, flags);
  evaluate->add_option("--generations", generations_path, "generations JSONL");
  evaluate->add_option("--report-txt", report_txt, "human-readable report path");
  evaluate->add_option("--report-jsonl", report_jsonl, "machine-readable report path");

  CLI::App* pipeline = app.add_subcommand("pipeline", "run every stage end to end");
  add_common(pipeline, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const recex::RunConfig cfg = resolve_config(flags);
    const recex::Workspace ws{cfg.work_dir};
    if (synth->parsed()) {
      recex::run_synth(cfg);
    } else if (prepare->parsed()) {
      recex::run_prepare(cfg);
    } else if (split->parsed()) {
      recex::run_split(cfg);
    } else if (train_gnn->parsed()) {
      recex::run_train_gnn(cfg);
    } else if (pretrain->parsed()) {
      recex::run_pretrain_lm(cfg);
    } else if (train_adapter->parsed()) {
      recex::run_train_adapter(cfg);
    } else if (generate->parsed()) {
      if (pairs_path.empty()) {
        pairs_path = ws.pairs();
        recex::write_default_pairs(cfg, pairs_path);
      }
      recex::run_generate(cfg, pairs_path,
                          out_path.empty() ? ws.generations() : out_path);
    } else if (evaluate->parsed()) {
      recex::run_evaluate(
          cfg, generations_path.empty() ? ws.generations() : generations_path,
          report_txt.empty() ? ws.report_txt() : report_txt,
          report_jsonl.empty() ? ws.report_jsonl() : report_jsonl);
    } else if (pipeline->parsed()) {
      recex::run_pipeline(cfg);
    }
  } catch (const recex::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const recex::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const recex::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
