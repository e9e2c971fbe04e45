#include "recex/checkpoint.hpp"

#include <fstream>

#include "recex/binio.hpp"
#include "recex/errors.hpp"

namespace recex {

namespace {

constexpr char kUnifiedMagic[5] = "RXUC";
constexpr char kLmMagic[5] = "RXLM";
constexpr uint32_t kVersion = 1;

void write_lm_config(std::ostream& os, const LmConfig& cfg) {
  binio::write_u32(os, cfg.vocab);
  binio::write_u32(os, cfg.hidden);
  binio::write_u32(os, cfg.layers);
  binio::write_u32(os, cfg.heads);
  binio::write_u32(os, cfg.ffn_mult);
  binio::write_u32(os, cfg.max_context);
}

LmConfig read_lm_config(std::istream& is) {
  LmConfig cfg;
  cfg.vocab = binio::read_u32(is);
  cfg.hidden = binio::read_u32(is);
  cfg.layers = binio::read_u32(is);
  cfg.heads = binio::read_u32(is);
  cfg.ffn_mult = binio::read_u32(is);
  cfg.max_context = binio::read_u32(is);
  return cfg;
}

void write_vocab_pins(std::ostream& os) {
  binio::write_u32(os, Vocabulary::kSize);
  binio::write_u32(os, Vocabulary::kPad);
  binio::write_u32(os, Vocabulary::kBos);
  binio::write_u32(os, Vocabulary::kEos);
  binio::write_u32(os, Vocabulary::kUserEmbed);
  binio::write_u32(os, Vocabulary::kItemEmbed);
  binio::write_u32(os, Vocabulary::kExplainPos);
}

void check_vocab_pins(std::istream& is) {
  const uint32_t expect[] = {Vocabulary::kSize,      Vocabulary::kPad,
                             Vocabulary::kBos,       Vocabulary::kEos,
                             Vocabulary::kUserEmbed, Vocabulary::kItemEmbed,
                             Vocabulary::kExplainPos};
  for (uint32_t e : expect)
    if (binio::read_u32(is) != e)
      throw DataError("checkpoint: vocabulary special-token ids do not match");
}

void write_lm_params(std::ostream& os, const MiniLm& lm) {
  for (const auto& s : lm.param_spans()) binio::write_doubles(os, s);
}

void read_lm_params(std::istream& is, MiniLm& lm) {
  for (auto s : lm.param_spans()) binio::read_doubles(is, s);
}

void write_adapter(std::ostream& os, const MoeAdapter& a) {
  binio::write_u32(os, a.cfg.num_experts);
  binio::write_u32(os, a.cfg.d_in);
  binio::write_u32(os, a.cfg.d_out);
  os.write(reinterpret_cast<const char*>(&a.cfg.gate_noise), sizeof(double));
  os.write(reinterpret_cast<const char*>(&a.cfg.dropout), sizeof(double));
  for (const auto& w : a.experts) binio::write_doubles(os, w.v);
  binio::write_doubles(os, a.gate.v);
}

MoeAdapter read_adapter(std::istream& is) {
  MoeConfig cfg;
  cfg.num_experts = binio::read_u32(is);
  cfg.d_in = binio::read_u32(is);
  cfg.d_out = binio::read_u32(is);
  is.read(reinterpret_cast<char*>(&cfg.gate_noise), sizeof(double));
  is.read(reinterpret_cast<char*>(&cfg.dropout), sizeof(double));
  if (!is) throw DataError("checkpoint: truncated adapter section");
  MoeAdapter a;
  a.cfg = cfg;
  a.experts.assign(cfg.num_experts, DenseMatrix(cfg.d_out, cfg.d_in));
  for (auto& w : a.experts) binio::read_doubles(is, w.v);
  a.gate = DenseMatrix(cfg.num_experts, cfg.d_in);
  binio::read_doubles(is, a.gate.v);
  return a;
}

MiniLm allocate_lm(const LmConfig& cfg) {
  // Build the exact tensor layout without touching a random stream.
  Rng zero(0);
  MiniLm lm = MiniLm::init(cfg, zero);
  return lm;
}

}  // namespace

uint64_t finals_hash(const DenseMatrix& final_user, const DenseMatrix& final_item) {
  return content_hash(final_item, content_hash(final_user));
}

void save_lm_checkpoint(const std::string& path, const MiniLm& lm) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open for write: " + path);
  os.write(kLmMagic, 4);
  binio::write_u32(os, kVersion);
  write_vocab_pins(os);
  write_lm_config(os, lm.cfg);
  binio::write_u32(os, lm.frozen ? 1 : 0);
  write_lm_params(os, lm);
  if (!os) throw DataError("write failed: " + path);
}

MiniLm load_lm_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path);
  binio::expect_magic(is, kLmMagic);
  if (binio::read_u32(is) != kVersion) throw DataError("lm checkpoint: unsupported version");
  check_vocab_pins(is);
  const LmConfig cfg = read_lm_config(is);
  MiniLm lm = allocate_lm(cfg);
  lm.frozen = binio::read_u32(is) != 0;
  read_lm_params(is, lm);
  return lm;
}

void save_unified_checkpoint(const std::string& path, const UnifiedCheckpoint& ckpt) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open for write: " + path);
  os.write(kUnifiedMagic, 4);
  binio::write_u32(os, kVersion);
  write_vocab_pins(os);
  write_lm_config(os, ckpt.lm.cfg);
  binio::write_u32(os, ckpt.lm.frozen ? 1 : 0);
  write_lm_params(os, ckpt.lm);
  binio::write_u32(os, ckpt.adapter_item.has_value() ? 2 : 1);
  write_adapter(os, ckpt.adapter_user);
  if (ckpt.adapter_item) write_adapter(os, *ckpt.adapter_item);
  binio::write_u64(os, ckpt.gnn_finals_hash);
  binio::write_string(os, ckpt.config_json);
  if (!os) throw DataError("write failed: " + path);
}

UnifiedCheckpoint load_unified_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path);
  binio::expect_magic(is, kUnifiedMagic);
  if (binio::read_u32(is) != kVersion)
    throw DataError("unified checkpoint: unsupported version");
  check_vocab_pins(is);

  UnifiedCheckpoint ckpt;
  const LmConfig cfg = read_lm_config(is);
  ckpt.lm = allocate_lm(cfg);
  ckpt.lm.frozen = binio::read_u32(is) != 0;
  read_lm_params(is, ckpt.lm);
  const uint32_t adapters = binio::read_u32(is);
  if (adapters != 1 && adapters != 2)
    throw DataError("unified checkpoint: corrupt adapter count");
  ckpt.adapter_user = read_adapter(is);
  if (adapters == 2) ckpt.adapter_item = read_adapter(is);
  ckpt.gnn_finals_hash = binio::read_u64(is);
  ckpt.config_json = binio::read_string(is);
  return ckpt;
}

void require_matching_finals(const UnifiedCheckpoint& ckpt,
                             const DenseMatrix& final_user,
                             const DenseMatrix& final_item) {
  if (finals_hash(final_user, final_item) != ckpt.gnn_finals_hash)
    throw DataError(
        "unified checkpoint: collaborative embedding hash mismatch (checkpoint "
        "was trained against different finals)");
}

}  // namespace recex
