#pragma once

#include <cstdint>
#include <string>

#include "recex/generate.hpp"
#include "recex/gnn_train.hpp"
#include "recex/lm_train.hpp"
#include "recex/minilm.hpp"
#include "recex/moe_adapter.hpp"
#include "recex/sparsity.hpp"
#include "recex/synth.hpp"
#include "recex/textgen.hpp"

namespace recex {

// Resolved run configuration. Every field has a default; a fully-defaulted
// config drives the end-to-end synthetic pipeline inside work_dir. The master
// seed derives all stage seeds (fixed offsets) unless a stage seed is set
// explicitly in the file. Precedence: CLI flags > config file > defaults.
struct RunConfig {
  std::string work_dir = "out";
  std::string dataset_path;  // empty: <work_dir>/dataset.jsonl

  uint64_t seed = 1;

  double train_fraction = 0.8;
  double validation_fraction = 0.1;
  double test_fraction = 0.1;

  // Stage seeds of 0 mean "derive from the master seed" (see resolve()).
  SynthConfig synth{.seed = 0};
  SparsityConfig sparsity{.bins = 5, .zero_shot_fraction = 0.1, .seed = 0};
  GnnTrainConfig graph{.seed = 0};

  // adapter: d_in is the graph dim and d_out the LM hidden dim (derived)
  MoeConfig adapter;
  bool separate_adapters = false;
  AdapterTrainConfig adapter_train{.steps = 300, .batch_size = 8, .lr = 1e-3, .seed = 0};

  LmConfig lm;
  PretrainConfig pretrain{.steps = 200, .batch_size = 8, .lr = 1e-3, .seed = 0};
  DecodeConfig decode;

  bool include_profiles = true;
  bool injection = true;
  bool zero_shot = false;
  uint32_t user_profile_sample = 5;

  std::string backend = "template";  // template | external
  ExternalBackendConfig external;

  // Stage seeds, derived from `seed` by resolve().
  void resolve();

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;

  std::string resolved_dataset_path() const {
    return dataset_path.empty() ? work_dir + "/dataset.jsonl" : dataset_path;
  }
};

}  // namespace recex
