#include "recex/gnn_checkpoint.hpp"

#include <fstream>

#include "recex/binio.hpp"
#include "recex/errors.hpp"

namespace recex {

namespace {
constexpr char kMagic[5] = "RXGC";
constexpr uint32_t kVersion = 1;
}  // namespace

void save_gnn_checkpoint(const std::string& path, const GnnCheckpoint& ckpt) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open for write: " + path);
  os.write(kMagic, 4);
  binio::write_u32(os, kVersion);
  binio::write_u32(os, ckpt.table.dim);
  binio::write_u32(os, ckpt.table.num_layers);
  binio::write_u32(os, static_cast<uint32_t>(ckpt.table.user0.rows));
  binio::write_u32(os, static_cast<uint32_t>(ckpt.table.item0.rows));
  binio::write_u32(os, ckpt.epoch);
  binio::write_u64(os, ckpt.rng_state);
  binio::write_doubles(os, ckpt.table.user0.v);
  binio::write_doubles(os, ckpt.table.item0.v);
  if (!os) throw DataError("write failed: " + path);
}

GnnCheckpoint load_gnn_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path);
  binio::expect_magic(is, kMagic);
  const uint32_t version = binio::read_u32(is);
  if (version != kVersion)
    throw DataError("gnn checkpoint: unsupported version " + std::to_string(version));

  GnnCheckpoint ckpt;
  ckpt.table.dim = binio::read_u32(is);
  ckpt.table.num_layers = binio::read_u32(is);
  const uint32_t m = binio::read_u32(is);
  const uint32_t n = binio::read_u32(is);
  ckpt.epoch = binio::read_u32(is);
  ckpt.rng_state = binio::read_u64(is);
  ckpt.table.user0 = DenseMatrix(m, ckpt.table.dim);
  ckpt.table.item0 = DenseMatrix(n, ckpt.table.dim);
  binio::read_doubles(is, ckpt.table.user0.v);
  binio::read_doubles(is, ckpt.table.item0.v);
  return ckpt;
}

}  // namespace recex
