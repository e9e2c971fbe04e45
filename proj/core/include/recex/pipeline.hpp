#pragma once

#include <string>
#include <vector>

#include "recex/config.hpp"
#include "recex/corpus.hpp"
#include "recex/eval.hpp"

namespace recex {

// Artifact layout inside a run's work_dir. Every stage writes the resolved
// config next to its outputs for provenance.
struct Workspace {
  std::string dir;

  std::string dataset() const { return dir + "/dataset.jsonl"; }
  std::string dataset_meta() const { return dir + "/dataset_meta.json"; }
  std::string profiles() const { return dir + "/profiles.jsonl"; }
  std::string explanations() const { return dir + "/explanations.jsonl"; }
  std::string splits_dir() const { return dir + "/splits"; }
  std::string mapping() const { return splits_dir() + "/mapping.json"; }
  std::string split_meta() const { return splits_dir() + "/meta.json"; }
  std::string train_manifest() const { return splits_dir() + "/train.jsonl"; }
  std::string val_manifest() const { return splits_dir() + "/val.jsonl"; }
  std::string bin_manifest(int b) const {
    return splits_dir() + "/tst" + std::to_string(b + 1) + ".jsonl";
  }
  std::string zero_shot_manifest() const { return splits_dir() + "/zero_shot.jsonl"; }
  std::string gnn_ckpt() const { return dir + "/gnn.ckpt"; }
  std::string gnn_log() const { return dir + "/gnn_log.jsonl"; }
  std::string lm_ckpt() const { return dir + "/lm.ckpt"; }
  std::string pretrain_log() const { return dir + "/pretrain_log.jsonl"; }
  std::string unified_ckpt() const { return dir + "/unified.ckpt"; }
  std::string adapter_log() const { return dir + "/adapter_log.jsonl"; }
  std::string pairs() const { return dir + "/pairs.jsonl"; }
  std::string generations() const { return dir + "/generations.jsonl"; }
  std::string report_txt() const { return dir + "/report.txt"; }
  std::string report_jsonl() const { return dir + "/report.jsonl"; }
  std::string config_copy() const { return dir + "/config.json"; }
};

// Id mapping fixed at split time so later stages agree on dense indices.
struct IdMap {
  std::vector<std::string> users;
  std::vector<std::string> items;
  uint32_t user(const std::string& id) const;
  uint32_t item(const std::string& id) const;
  bool has_user(const std::string& id) const;
  bool has_item(const std::string& id) const;

  void save(const std::string& path) const;
  static IdMap load(const std::string& path);
};

// Pipeline stages; each corresponds to a CLI subcommand.
void run_synth(const RunConfig& cfg);
void run_prepare(const RunConfig& cfg);
void run_split(const RunConfig& cfg);
void run_train_gnn(const RunConfig& cfg);
void run_pretrain_lm(const RunConfig& cfg);
void run_train_adapter(const RunConfig& cfg);
void run_generate(const RunConfig& cfg, const std::string& pairs_path,
                  const std::string& out_path);
void run_evaluate(const RunConfig& cfg, const std::string& generations_path,
                  const std::string& report_txt_path,
                  const std::string& report_jsonl_path);

// Writes a pairs file covering the test manifests (and the zero-shot set
// when enabled).
void write_default_pairs(const RunConfig& cfg, const std::string& out_path);

// synth -> prepare -> split -> train-gnn -> pretrain-lm -> train-adapter ->
// generate -> evaluate, all inside cfg.work_dir.
void run_pipeline(const RunConfig& cfg);

}  // namespace recex
