#include "recex/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "recex/checkpoint.hpp"
#include "recex/errors.hpp"
#include "recex/generate.hpp"
#include "recex/gnn_checkpoint.hpp"
#include "recex/synth.hpp"

namespace recex {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory: " + dir);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open for write: " + path);
  os << text;
  if (!os) throw DataError("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open: " + path);
  return std::string((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
}

void persist_config(const RunConfig& cfg) {
  ensure_dir(cfg.work_dir);
  write_text(Workspace{cfg.work_dir}.config_copy(), cfg.to_json());
}

std::unique_ptr<TextGenBackend> make_backend(const RunConfig& cfg) {
  if (cfg.backend == "external")
    return std::make_unique<ExternalBackend>(cfg.external);
  return std::make_unique<TemplateBackend>();
}

struct PreparedAssets {
  std::map<std::string, std::string> user_profile;  // id -> text
  std::map<std::string, std::string> item_profile;
  std::map<std::pair<std::string, std::string>, std::string> explanation;
};

PreparedAssets load_assets(const Workspace& ws) {
  PreparedAssets assets;
  {
    std::ifstream is(ws.profiles());
    if (!is) throw DataError("missing profiles file (run prepare first): " + ws.profiles());
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      const std::string subject = j.at("subject").get<std::string>();
      const std::string id = j.at("subject_id").get<std::string>();
      const std::string text = j.at("text").get<std::string>();
      if (subject == "user")
        assets.user_profile[id] = text;
      else
        assets.item_profile[id] = text;
    }
  }
  {
    std::ifstream is(ws.explanations());
    if (!is)
      throw DataError("missing explanations file (run prepare first): " + ws.explanations());
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      assets.explanation[{j.at("user_id").get<std::string>(),
                          j.at("item_id").get<std::string>()}] =
          j.at("text").get<std::string>();
    }
  }
  return assets;
}

struct SplitMeta {
  std::vector<std::vector<std::string>> bin_users;
  std::vector<std::string> zero_shot_users;
  int effective_bins = 0;
  bool merged_warning = false;
};

SplitMeta load_split_meta(const Workspace& ws) {
  const json j = json::parse(read_text(ws.split_meta()));
  SplitMeta m;
  m.effective_bins = j.at("effective_bins").get<int>();
  m.merged_warning = j.at("merged_warning").get<bool>();
  for (const auto& bin : j.at("bins"))
    m.bin_users.push_back(bin.get<std::vector<std::string>>());
  m.zero_shot_users = j.at("zero_shot_users").get<std::vector<std::string>>();
  return m;
}

std::vector<DatasetRecord> load_manifest(const std::string& path) {
  return load_dataset(path).records;
}

// Training-time graph: every manifest edge with its split label, zero-shot
// users excluded from the train requirement (they have no edges here at all).
InteractionGraph manifest_graph(const Workspace& ws, const IdMap& ids,
                                const SplitMeta& meta) {
  std::vector<LabeledEdge> edges;
  auto add = [&](const std::string& path, Split s) {
    if (!fs::exists(path)) return;
    for (const auto& r : load_manifest(path))
      edges.push_back({{ids.user(r.user_id), ids.item(r.item_id)}, s});
  };
  add(ws.train_manifest(), Split::train);
  add(ws.val_manifest(), Split::validation);
  for (int b = 0; b < meta.effective_bins; ++b) add(ws.bin_manifest(b), Split::test);

  std::vector<uint32_t> excluded;
  for (const auto& id : meta.zero_shot_users) excluded.push_back(ids.user(id));
  return assemble_graph(edges, static_cast<uint32_t>(ids.users.size()),
                        static_cast<uint32_t>(ids.items.size()), std::move(excluded));
}

PromptInstance make_prompt(const RunConfig& cfg, const PreparedAssets& assets,
                           const std::string& user_id, const std::string& item_id) {
  std::optional<ProfilePair> profiles;
  if (cfg.include_profiles) {
    ProfilePair p;
    const auto u = assets.user_profile.find(user_id);
    const auto i = assets.item_profile.find(item_id);
    p.user_text = u == assets.user_profile.end() ? "no profile" : u->second;
    p.item_text = i == assets.item_profile.end() ? "no profile" : i->second;
    profiles = std::move(p);
  }
  return build_prompt(user_id, item_id, profiles, PromptTemplate::standard());
}

std::vector<AdapterExample> make_examples(const RunConfig& cfg, const IdMap& ids,
                                          const PreparedAssets& assets,
                                          const std::vector<DatasetRecord>& records) {
  std::vector<AdapterExample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto ex = assets.explanation.find({r.user_id, r.item_id});
    if (ex == assets.explanation.end()) continue;  // distillation skipped it
    AdapterExample e;
    e.user_index = ids.user(r.user_id);
    e.item_index = ids.item(r.item_id);
    e.prompt = make_prompt(cfg, assets, r.user_id, r.item_id);
    attach_target(e.prompt, ex->second);
    out.push_back(std::move(e));
  }
  if (out.empty()) throw DataError("no usable training examples");
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// IdMap

uint32_t IdMap::user(const std::string& id) const {
  const auto it = std::lower_bound(users.begin(), users.end(), id);
  if (it == users.end() || *it != id) throw DataError("unknown user id: " + id);
  return static_cast<uint32_t>(it - users.begin());
}
uint32_t IdMap::item(const std::string& id) const {
  const auto it = std::lower_bound(items.begin(), items.end(), id);
  if (it == items.end() || *it != id) throw DataError("unknown item id: " + id);
  return static_cast<uint32_t>(it - items.begin());
}
bool IdMap::has_user(const std::string& id) const {
  return std::binary_search(users.begin(), users.end(), id);
}
bool IdMap::has_item(const std::string& id) const {
  return std::binary_search(items.begin(), items.end(), id);
}

void IdMap::save(const std::string& path) const {
  json j;
  j["users"] = users;
  j["items"] = items;
  write_text(path, j.dump(2) + "\n");
}

IdMap IdMap::load(const std::string& path) {
  const json j = json::parse(read_text(path));
  IdMap m;
  m.users = j.at("users").get<std::vector<std::string>>();
  m.items = j.at("items").get<std::vector<std::string>>();
  return m;
}

// ---------------------------------------------------------------------------
// stages

void run_synth(const RunConfig& cfg) {
  persist_config(cfg);
  const Workspace ws{cfg.work_dir};
  const SynthResult synth = synthesize_dataset(cfg.synth);
  save_dataset(ws.dataset(), synth.records);

  json meta;
  meta["description"] = synth.description;
  meta["user_group"] = synth.user_group;
  meta["item_group"] = synth.item_group;
  meta["aspects"] = synth.aspects;
  meta["adjectives"] = synth.adjectives;
  write_text(ws.dataset_meta(), meta.dump(2) + "\n");
}

void run_prepare(const RunConfig& cfg) {
  persist_config(cfg);
  const Workspace ws{cfg.work_dir};
  const Dataset ds = load_dataset(cfg.resolved_dataset_path());
  auto backend = make_backend(cfg);

  // item profiles
  const std::vector<ItemView> views = collect_item_views(ds);
  std::map<std::string, Profile> item_profiles;
  std::string profile_lines;
  for (std::size_t i = 0; i < views.size(); ++i) {
    const Profile p = generate_item_profile(*backend, views[i], item_profile_prompt(),
                                            cfg.seed + 0x700 + i);
    json j;
    j["subject"] = "item";
    j["subject_id"] = p.subject_id;
    j["text"] = p.text;
    j["provenance"] = p.provenance == Provenance::external ? "external" : "template";
    profile_lines += j.dump() + "\n";
    item_profiles[p.subject_id] = p;
  }

  // user profiles from the profiles of their interacted items
  std::map<std::string, std::vector<Profile>> per_user;
  for (const auto& r : ds.records)
    per_user[r.user_id].push_back(item_profiles.at(r.item_id));
  std::size_t ui = 0;
  for (const auto& [user_id, profiles] : per_user) {
    const Profile p =
        generate_user_profile(*backend, user_id, profiles, user_profile_prompt(),
                              cfg.user_profile_sample, cfg.seed + 0x800 + ui++);
    json j;
    j["subject"] = "user";
    j["subject_id"] = p.subject_id;
    j["text"] = p.text;
    j["provenance"] = p.provenance == Provenance::external ? "external" : "template";
    profile_lines += j.dump() + "\n";
  }
  write_text(ws.profiles(), profile_lines);

  // ground-truth explanations from the raw reviews
  const DistillBatchResult distilled =
      distill_batch(*backend, ds.records, distill_prompt(), cfg.decode.max_words,
                    cfg.backend == "external" ? 4 : 1);
  std::string expl_lines;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    if (!distilled.explanations[i]) continue;
    json j;
    j["user_id"] = ds.records[i].user_id;
    j["item_id"] = ds.records[i].item_id;
    j["text"] = *distilled.explanations[i];
    j["provenance"] = cfg.backend;
    expl_lines += j.dump() + "\n";
  }
  write_text(ws.explanations(), expl_lines);

  if (distilled.failures > 0) {
    std::string log;
    for (const auto& note : distilled.failure_log) {
      json j;
      j["event"] = "distill_skip";
      j["note"] = note;
      log += j.dump() + "\n";
    }
    write_text(cfg.work_dir + "/prepare_log.jsonl", log);
  }
}

void run_split(const RunConfig& cfg) {
  persist_config(cfg);
  const Workspace ws{cfg.work_dir};
  const Dataset ds = load_dataset(cfg.resolved_dataset_path());
  ensure_dir(ws.splits_dir());

  IdMap ids{ds.users, ds.items};
  ids.save(ws.mapping());

  SplitSpec spec{cfg.train_fraction, cfg.validation_fraction, cfg.test_fraction,
                 cfg.seed};
  const SparsitySplits splits = sparsity_split(ds, spec, cfg.sparsity);

  auto subset = [&](const std::vector<std::size_t>& idx) {
    std::vector<DatasetRecord> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(ds.records[i]);
    return out;
  };
  save_dataset(ws.train_manifest(), subset(splits.train_records));
  save_dataset(ws.val_manifest(), subset(splits.val_records));
  for (int b = 0; b < splits.effective_bins; ++b)
    save_dataset(ws.bin_manifest(b), subset(splits.bin_test_records[b]));
  save_dataset(ws.zero_shot_manifest(), subset(splits.zero_shot_records));

  json meta;
  meta["bins"] = splits.bin_users;
  meta["zero_shot_users"] = splits.zero_shot_users;
  meta["effective_bins"] = splits.effective_bins;
  meta["merged_warning"] = splits.merged_warning;
  write_text(ws.split_meta(), meta.dump(2) + "\n");
}

void run_train_gnn(const RunConfig& cfg) {
  persist_config(cfg);
  const Workspace ws{cfg.work_dir};
  const IdMap ids = IdMap::load(ws.mapping());
  const SplitMeta meta = load_split_meta(ws);
  const InteractionGraph g = manifest_graph(ws, ids, meta);

  const GnnTrainResult result = train_tokenizer(g, cfg.graph);

  GnnCheckpoint ckpt;
  ckpt.epoch = result.best_epoch;
  ckpt.rng_state = result.rng_state;
  ckpt.table = result.table;
  save_gnn_checkpoint(ws.gnn_ckpt(), ckpt);

  std::string log;
  for (const auto& e : result.log) {
    json j;
    j["epoch"] = e.epoch;
    j["loss"] = e.loss;
    j["recall"] = e.recall;
    log += j.dump() + "\n";
  }
  write_text(ws.gnn_log(), log);
}

namespace {

// Prompt+target token sequences for LM pretraining, built from the train
// manifest with the original special-token embeddings (no replacement).
std::vector<std::vector<int>> pretrain_sequences(const RunConfig& cfg,
                                                 const PreparedAssets& assets,
                                                 const std::vector<DatasetRecord>& records) {
  std::vector<std::vector<int>> seqs;
  seqs.reserve(records.size());
  for (const auto& r : records) {
    const auto ex = assets.explanation.find({r.user_id, r.item_id});
    if (ex == assets.explanation.end()) continue;
    PromptInstance p = make_prompt(cfg, assets, r.user_id, r.item_id);
    attach_target(p, ex->second);
    seqs.push_back(std::move(p.tokens));
  }
  if (seqs.empty()) throw DataError("pretrain: no sequences");
  return seqs;
}

}  // namespace

void run_pretrain_lm(const RunConfig& cfg) {
  persist_config(cfg);
  const Workspace ws{cfg.work_dir};
  const PreparedAssets assets = load_assets(ws);
  const auto records = load_manifest(ws.train_manifest());
  const auto sequences = pretrain_sequences(cfg, assets, records);

  Rng rng(cfg.seed + 0x900);
  MiniLm lm = MiniLm::init(cfg.lm, rng);
  const auto log = pretrain_lm(lm, sequences, cfg.pretrain);
  lm.frozen = true;
  save_lm_checkpoint(ws.lm_ckpt(), lm);

  std::string lines;
  for (const auto& e : log) {
    json j;
    j["step"] = e.step;
    j["loss"] = e.loss;
    lines += j.dump() + "\n";
  }
  write_text(ws.pretrain_log(), lines);
}

void run_train_adapter(const RunConfig& cfg) {
  persist_config(cfg);
  const Workspace ws{cfg.work_dir};
  const IdMap ids = IdMap::load(ws.mapping());
  const SplitMeta meta = load_split_meta(ws);
  const PreparedAssets assets = load_assets(ws);

  // collaborative finals from the tokenizer checkpoint
  const InteractionGraph g = manifest_graph(ws, ids, meta);
  GnnCheckpoint gnn = load_gnn_checkpoint(ws.gnn_ckpt());
  refresh_finals(g, gnn.table);

  MiniLm lm = load_lm_checkpoint(ws.lm_ckpt());
  if (!lm.frozen) throw DataError("train-adapter: LM checkpoint is not frozen");

  Rng rng(cfg.adapter_train.seed);
  MoeConfig moe = cfg.adapter;
  moe.d_in = gnn.table.dim;
  moe.d_out = lm.cfg.hidden;
  MoeAdapter adapter_user = MoeAdapter::init(moe, rng);
  std::optional<MoeAdapter> adapter_item;
  if (cfg.separate_adapters) adapter_item = MoeAdapter::init(moe, rng);

  const auto records = load_manifest(ws.train_manifest());
  const auto examples = make_examples(cfg, ids, assets, records);

  AdapterTrainConfig train_cfg = cfg.adapter_train;
  train_cfg.inject = cfg.injection;

  const uint64_t lm_hash_before = lm.param_hash();
  const uint64_t gnn_hash_before = finals_hash(gnn.table.final_user, gnn.table.final_item);
  const uint64_t adapter_hash_before = adapter_user.param_hash();

  const auto log = train_adapter(lm, adapter_user,
                                 adapter_item ? &*adapter_item : nullptr,
                                 gnn.table.final_user, gnn.table.final_item,
                                 examples, train_cfg);

  if (lm.param_hash() != lm_hash_before)
    throw NumericError("frozen parameter modified: LM hash changed during adapter training");
  if (finals_hash(gnn.table.final_user, gnn.table.final_item) != gnn_hash_before)
    throw NumericError("frozen parameter modified: collaborative embeddings changed");
  if (adapter_user.param_hash() == adapter_hash_before)
    throw NumericError("adapter training did not change the adapter parameters");

  UnifiedCheckpoint ckpt;
  ckpt.lm = std::move(lm);
  ckpt.adapter_user = std::move(adapter_user);
  ckpt.adapter_item = std::move(adapter_item);
  ckpt.gnn_finals_hash = gnn_hash_before;
  ckpt.config_json = cfg.to_json();
  save_unified_checkpoint(ws.unified_ckpt(), ckpt);

  std::string lines;
  {
    json j;
    j["event"] = "config";
    j["injection"] = cfg.injection;
    j["include_profiles"] = cfg.include_profiles;
    j["steps"] = train_cfg.steps;
    lines += j.dump() + "\n";
  }
  for (const auto& e : log) {
    json j;
    j["step"] = e.step;
    j["loss"] = e.loss;
    lines += j.dump() + "\n";
  }
  write_text(ws.adapter_log(), lines);
}

void write_default_pairs(const RunConfig& cfg, const std::string& out_path) {
  const Workspace ws{cfg.work_dir};
  const SplitMeta meta = load_split_meta(ws);
  std::string lines;
  auto add = [&](const std::string& path) {
    if (!fs::exists(path)) return;
    for (const auto& r : load_manifest(path)) {
      json j;
      j["user_id"] = r.user_id;
      j["item_id"] = r.item_id;
      lines += j.dump() + "\n";
    }
  };
  for (int b = 0; b < meta.effective_bins; ++b) add(ws.bin_manifest(b));
  if (cfg.zero_shot) add(ws.zero_shot_manifest());
  write_text(out_path, lines);
}

void run_generate(const RunConfig& cfg, const std::string& pairs_path,
                  const std::string& out_path) {
  persist_config(cfg);
  const Workspace ws{cfg.work_dir};
  const IdMap ids = IdMap::load(ws.mapping());
  const SplitMeta meta = load_split_meta(ws);
  const PreparedAssets assets = load_assets(ws);

  const InteractionGraph g = manifest_graph(ws, ids, meta);
  GnnCheckpoint gnn = load_gnn_checkpoint(ws.gnn_ckpt());
  refresh_finals(g, gnn.table);

  const UnifiedCheckpoint ckpt = load_unified_checkpoint(ws.unified_ckpt());
  require_matching_finals(ckpt, gnn.table.final_user, gnn.table.final_item);

  MoeAdapter adapter_user = ckpt.adapter_user;
  adapter_user.mode = AdapterMode::inference;
  MoeAdapter adapter_item = ckpt.adapter_item ? *ckpt.adapter_item : ckpt.adapter_user;
  adapter_item.mode = AdapterMode::inference;

  std::set<std::string> zero_shot(meta.zero_shot_users.begin(),
                                  meta.zero_shot_users.end());
  // test-time items of each zero-shot user, for the inference embedding rule
  std::map<std::string, std::vector<uint32_t>> zs_items;
  if (fs::exists(ws.zero_shot_manifest()))
    for (const auto& r : load_manifest(ws.zero_shot_manifest()))
      zs_items[r.user_id].push_back(ids.item(r.item_id));

  Rng unused(0);
  std::string out_lines;
  {
    json j;
    j["event"] = "config";
    j["seed"] = cfg.decode.seed;
    j["mode"] = cfg.decode.mode == DecodeConfig::Mode::greedy ? "greedy" : "sampled";
    j["max_words"] = cfg.decode.max_words;
    j["injection"] = cfg.injection;
    out_lines += j.dump() + "\n";
  }

  std::ifstream pairs(pairs_path);
  if (!pairs) throw DataError("cannot open pairs file: " + pairs_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(pairs, line)) {
    ++line_no;
    if (line.empty()) continue;
    json jp;
    try {
      jp = json::parse(line);
    } catch (const json::parse_error&) {
      throw DataError("pairs file line " + std::to_string(line_no) + ": malformed JSON");
    }
    const std::string user_id = jp.at("user_id").get<std::string>();
    const std::string item_id = jp.at("item_id").get<std::string>();

    json out;
    out["user_id"] = user_id;
    out["item_id"] = item_id;
    try {
      if (!ids.has_item(item_id)) throw DataError("unknown item id: " + item_id);
      std::vector<double> e_user;
      if (zero_shot.count(user_id)) {
        if (!cfg.zero_shot)
          throw DataError("zero-shot user (enable the zero-shot rule): " + user_id);
        e_user = zero_shot_user_embedding(g, gnn.table.final_item,
                                          zs_items.at(user_id));
      } else if (ids.has_user(user_id)) {
        const auto row = gnn.table.final_user.row(ids.user(user_id));
        e_user.assign(row.begin(), row.end());
      } else {
        throw DataError("unknown user id: " + user_id);
      }
      const std::vector<double> a_u = adapt(adapter_user, e_user, unused);
      const auto item_row = gnn.table.final_item.row(ids.item(item_id));
      const std::vector<double> a_i =
          adapt(adapter_item, std::vector<double>(item_row.begin(), item_row.end()),
                unused);

      PromptInstance prompt = make_prompt(cfg, assets, user_id, item_id);
      DecodeConfig decode = cfg.decode;
      const std::string text =
          generate(ckpt.lm, prompt, a_u, a_i, cfg.injection, decode);
      out["text"] = text;
      out["words"] = word_count(text);
    } catch (const Error& e) {
      out["error"] = e.what();
    }
    out_lines += out.dump() + "\n";
  }
  write_text(out_path, out_lines);
}

void run_evaluate(const RunConfig& cfg, const std::string& generations_path,
                  const std::string& report_txt_path,
                  const std::string& report_jsonl_path) {
  persist_config(cfg);
  const Workspace ws{cfg.work_dir};
  const PreparedAssets assets = load_assets(ws);
  const SplitMeta meta = load_split_meta(ws);

  struct Generation {
    std::string user_id, item_id, text;
  };
  std::vector<Generation> gens;
  {
    std::ifstream is(generations_path);
    if (!is) throw DataError("cannot open generations: " + generations_path);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (j.contains("event")) continue;  // header
      if (j.contains("error")) continue;  // per-pair failure entries
      gens.push_back({j.at("user_id").get<std::string>(),
                      j.at("item_id").get<std::string>(),
                      j.at("text").get<std::string>()});
    }
  }
  if (gens.empty()) throw DataError("evaluate: no generations");

  // key alignment against the references
  std::vector<std::string> missing;
  for (const auto& g : gens)
    if (!assets.explanation.count({g.user_id, g.item_id}))
      missing.push_back("(" + g.user_id + ", " + g.item_id + ")");
  if (!missing.empty()) {
    std::string msg = "evaluate: missing reference keys:";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }

  // split membership by user: tst bins, zero-shot, plus overall
  std::map<std::string, int> bin_of_user;
  for (std::size_t b = 0; b < meta.bin_users.size(); ++b)
    for (const auto& u : meta.bin_users[b]) bin_of_user[u] = static_cast<int>(b);
  std::set<std::string> zs(meta.zero_shot_users.begin(), meta.zero_shot_users.end());

  TokenOverlapScorer scorer;
  Report report;
  auto evaluate_subset = [&](const std::string& name,
                             const std::vector<std::size_t>& idx) {
    if (idx.empty()) return;
    std::vector<std::string> texts;
    std::vector<ScoredPair> pairs;
    for (std::size_t i : idx) {
      const auto& g = gens[i];
      texts.push_back(g.text);
      pairs.push_back({g.user_id, g.item_id,
                       assets.explanation.at({g.user_id, g.item_id}), g.text});
    }
    SplitReport sr;
    sr.split_name = name;
    sr.pairs = idx.size();
    sr.usr_value = usr(texts);
    sr.stats = aggregate(score_set(scorer, pairs));
    report.splits.push_back(std::move(sr));
  };

  std::vector<std::size_t> all(gens.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  evaluate_subset("overall", all);

  for (std::size_t b = 0; b < meta.bin_users.size(); ++b) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < gens.size(); ++i) {
      const auto it = bin_of_user.find(gens[i].user_id);
      if (it != bin_of_user.end() && it->second == static_cast<int>(b)) idx.push_back(i);
    }
    evaluate_subset("tst" + std::to_string(b + 1), idx);
  }
  {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < gens.size(); ++i)
      if (zs.count(gens[i].user_id)) idx.push_back(i);
    evaluate_subset("zero_shot", idx);
  }

  write_text(report_txt_path, report.human_readable());
  write_text(report_jsonl_path, report.machine_readable());
}

void run_pipeline(const RunConfig& cfg) {
  run_synth(cfg);
  run_prepare(cfg);
  run_split(cfg);
  run_train_gnn(cfg);
  run_pretrain_lm(cfg);
  run_train_adapter(cfg);
  const Workspace ws{cfg.work_dir};
  write_default_pairs(cfg, ws.pairs());
  run_generate(cfg, ws.pairs(), ws.generations());
  run_evaluate(cfg, ws.generations(), ws.report_txt(), ws.report_jsonl());
}

}  // namespace recex
