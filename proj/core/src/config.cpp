#include "recex/config.hpp"

#include <fstream>

#include <json.hpp>

#include "recex/errors.hpp"

namespace recex {

using nlohmann::json;

void RunConfig::resolve() {
  // Fixed stage offsets from the master seed; explicit file values win only
  // if they are non-default (the sub-seeds default to 0 in the schema below).
  if (synth.seed == 0) synth.seed = seed + 0x100;
  if (sparsity.seed == 0) sparsity.seed = seed + 0x200;
  if (graph.seed == 0) graph.seed = seed + 0x300;
  if (pretrain.seed == 0) pretrain.seed = seed + 0x400;
  if (adapter_train.seed == 0) adapter_train.seed = seed + 0x500;
  if (decode.seed == 0) decode.seed = seed + 0x600;
  // Adapter bridges graph dim to LM hidden dim.
  adapter.d_in = graph.dim;
  adapter.d_out = lm.hidden;
}

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string RunConfig::to_json() const {
  json j;
  j["work_dir"] = work_dir;
  j["dataset_path"] = dataset_path;
  j["seed"] = seed;
  j["train_fraction"] = train_fraction;
  j["validation_fraction"] = validation_fraction;
  j["test_fraction"] = test_fraction;

  j["synth"] = {{"seed", synth.seed},
                {"num_users", synth.num_users},
                {"num_items", synth.num_items},
                {"groups", synth.groups},
                {"edges_per_user", synth.edges_per_user},
                {"cross_group_prob", synth.cross_group_prob}};
  j["sparsity"] = {{"bins", sparsity.bins},
                   {"zero_shot_fraction", sparsity.zero_shot_fraction},
                   {"seed", sparsity.seed}};
  j["graph"] = {{"dim", graph.dim},
                {"num_layers", graph.num_layers},
                {"lambda", graph.lambda},
                {"lr", graph.lr},
                {"batch_size", graph.batch_size},
                {"patience", graph.patience},
                {"eval_k", graph.eval_k},
                {"max_epochs", graph.max_epochs},
                {"init_std", graph.init_std},
                {"seed", graph.seed}};
  j["adapter"] = {{"num_experts", adapter.num_experts},
                  {"gate_noise", adapter.gate_noise},
                  {"dropout", adapter.dropout}};
  j["separate_adapters"] = separate_adapters;
  j["adapter_train"] = {{"steps", adapter_train.steps},
                        {"batch_size", adapter_train.batch_size},
                        {"lr", adapter_train.lr},
                        {"seed", adapter_train.seed}};
  j["lm"] = {{"hidden", lm.hidden},
             {"layers", lm.layers},
             {"heads", lm.heads},
             {"ffn_mult", lm.ffn_mult},
             {"max_context", lm.max_context},
             {"init_std", lm.init_std}};
  j["pretrain"] = {{"steps", pretrain.steps},
                   {"batch_size", pretrain.batch_size},
                   {"lr", pretrain.lr},
                   {"seed", pretrain.seed}};
  j["decode"] = {{"mode", decode.mode == DecodeConfig::Mode::greedy ? "greedy" : "sampled"},
                 {"temperature", decode.temperature},
                 {"seed", decode.seed},
                 {"max_words", decode.max_words}};
  j["include_profiles"] = include_profiles;
  j["injection"] = injection;
  j["zero_shot"] = zero_shot;
  j["user_profile_sample"] = user_profile_sample;
  j["backend"] = backend;
  j["external"] = {{"base_url", external.base_url},
                   {"path", external.path},
                   {"model", external.model},
                   {"auth_token_env", external.auth_token_env},
                   {"timeout_seconds", external.timeout_seconds},
                   {"max_retries", external.max_retries},
                   {"backoff_initial_ms", external.backoff_initial_ms}};
  return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("config: malformed JSON (") + e.what() + ")");
  }
  RunConfig c;
  // sub-seeds default to 0 = "derive from master" in resolve()
  c.synth.seed = 0;
  c.sparsity.seed = 0;
  c.graph.seed = 0;
  c.pretrain.seed = 0;
  c.adapter_train.seed = 0;
  c.decode.seed = 0;

  get_if(j, "work_dir", c.work_dir);
  get_if(j, "dataset_path", c.dataset_path);
  get_if(j, "seed", c.seed);
  get_if(j, "train_fraction", c.train_fraction);
  get_if(j, "validation_fraction", c.validation_fraction);
  get_if(j, "test_fraction", c.test_fraction);

  if (j.contains("synth")) {
    const json& s = j.at("synth");
    get_if(s, "seed", c.synth.seed);
    get_if(s, "num_users", c.synth.num_users);
    get_if(s, "num_items", c.synth.num_items);
    get_if(s, "groups", c.synth.groups);
    get_if(s, "edges_per_user", c.synth.edges_per_user);
    get_if(s, "cross_group_prob", c.synth.cross_group_prob);
  }
  if (j.contains("sparsity")) {
    const json& s = j.at("sparsity");
    get_if(s, "bins", c.sparsity.bins);
    get_if(s, "zero_shot_fraction", c.sparsity.zero_shot_fraction);
    get_if(s, "seed", c.sparsity.seed);
  }
  if (j.contains("graph")) {
    const json& s = j.at("graph");
    get_if(s, "dim", c.graph.dim);
    get_if(s, "num_layers", c.graph.num_layers);
    get_if(s, "lambda", c.graph.lambda);
    get_if(s, "lr", c.graph.lr);
    get_if(s, "batch_size", c.graph.batch_size);
    get_if(s, "patience", c.graph.patience);
    get_if(s, "eval_k", c.graph.eval_k);
    get_if(s, "max_epochs", c.graph.max_epochs);
    get_if(s, "init_std", c.graph.init_std);
    get_if(s, "seed", c.graph.seed);
  }
  if (j.contains("adapter")) {
    const json& s = j.at("adapter");
    get_if(s, "num_experts", c.adapter.num_experts);
    get_if(s, "gate_noise", c.adapter.gate_noise);
    get_if(s, "dropout", c.adapter.dropout);
  }
  get_if(j, "separate_adapters", c.separate_adapters);
  if (j.contains("adapter_train")) {
    const json& s = j.at("adapter_train");
    get_if(s, "steps", c.adapter_train.steps);
    get_if(s, "batch_size", c.adapter_train.batch_size);
    get_if(s, "lr", c.adapter_train.lr);
    get_if(s, "seed", c.adapter_train.seed);
  }
  if (j.contains("lm")) {
    const json& s = j.at("lm");
    get_if(s, "hidden", c.lm.hidden);
    get_if(s, "layers", c.lm.layers);
    get_if(s, "heads", c.lm.heads);
    get_if(s, "ffn_mult", c.lm.ffn_mult);
    get_if(s, "max_context", c.lm.max_context);
    get_if(s, "init_std", c.lm.init_std);
  }
  if (j.contains("pretrain")) {
    const json& s = j.at("pretrain");
    get_if(s, "steps", c.pretrain.steps);
    get_if(s, "batch_size", c.pretrain.batch_size);
    c.pretrain.lr = s.contains("lr") ? s.at("lr").get<double>() : c.pretrain.lr;
    get_if(s, "seed", c.pretrain.seed);
  }
  if (j.contains("decode")) {
    const json& s = j.at("decode");
    std::string mode = "greedy";
    get_if(s, "mode", mode);
    if (mode == "greedy")
      c.decode.mode = DecodeConfig::Mode::greedy;
    else if (mode == "sampled")
      c.decode.mode = DecodeConfig::Mode::sampled;
    else
      throw DataError("config: decode.mode must be greedy or sampled");
    get_if(s, "temperature", c.decode.temperature);
    get_if(s, "seed", c.decode.seed);
    get_if(s, "max_words", c.decode.max_words);
  }
  get_if(j, "include_profiles", c.include_profiles);
  get_if(j, "injection", c.injection);
  get_if(j, "zero_shot", c.zero_shot);
  get_if(j, "user_profile_sample", c.user_profile_sample);
  get_if(j, "backend", c.backend);
  if (c.backend != "template" && c.backend != "external")
    throw DataError("config: backend must be template or external");
  if (j.contains("external")) {
    const json& s = j.at("external");
    get_if(s, "base_url", c.external.base_url);
    get_if(s, "path", c.external.path);
    get_if(s, "model", c.external.model);
    get_if(s, "auth_token_env", c.external.auth_token_env);
    get_if(s, "timeout_seconds", c.external.timeout_seconds);
    get_if(s, "max_retries", c.external.max_retries);
    get_if(s, "backoff_initial_ms", c.external.backoff_initial_ms);
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

void RunConfig::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open for write: " + path);
  os << to_json();
  if (!os) throw DataError("write failed: " + path);
}

}  // namespace recex
