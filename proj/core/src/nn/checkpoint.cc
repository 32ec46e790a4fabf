// core/src/nn/checkpoint.cc
#include "revoice/nn/checkpoint.h"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "revoice/base/error.h"

namespace revoice::nn {

namespace {

constexpr char kMagic[4] = {'R', 'V', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

uint64_t read_u64(std::istream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_mat(std::ostream& out, const Mat& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.size())));
}

void read_mat(std::istream& in, Mat& m) {
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.size())));
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& meta_json,
                     const ParamStore& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write checkpoint: " + path);

  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u64(out, meta_json.size());
  out.write(meta_json.data(), static_cast<std::streamsize>(meta_json.size()));

  const auto all = params.all();
  write_u64(out, all.size());
  for (const Param* p : all) {
    write_u64(out, p->name.size());
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_u64(out, static_cast<uint64_t>(p->value.rows()));
    write_u64(out, static_cast<uint64_t>(p->value.cols()));
    write_u32(out, p->trainable ? 1u : 0u);
    write_mat(out, p->value);
    write_mat(out, p->m);
    write_mat(out, p->v);
  }
  if (!out) throw ModelError("checkpoint write failure: " + path);
}

std::string load_checkpoint(const std::string& path, ParamStore& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open checkpoint: " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ModelError("not a checkpoint file: " + path);
  }
  const uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw ModelError("unsupported checkpoint version " + std::to_string(version) + ": " + path);
  }
  const uint64_t meta_len = read_u64(in);
  std::string meta(meta_len, '\0');
  in.read(meta.data(), static_cast<std::streamsize>(meta_len));

  const uint64_t count = read_u64(in);
  for (uint64_t i = 0; i < count; ++i) {
    const uint64_t name_len = read_u64(in);
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    const int64_t rows = static_cast<int64_t>(read_u64(in));
    const int64_t cols = static_cast<int64_t>(read_u64(in));
    const bool trainable = read_u32(in) != 0;
    Param& p = params.create(name, rows, cols, trainable);
    read_mat(in, p.value);
    read_mat(in, p.m);
    read_mat(in, p.v);
    if (!in) throw ModelError("truncated checkpoint: " + path);
  }
  return meta;
}

std::string peek_checkpoint_meta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ModelError("not a checkpoint file: " + path);
  }
  read_u32(in);
  const uint64_t meta_len = read_u64(in);
  std::string meta(meta_len, '\0');
  in.read(meta.data(), static_cast<std::streamsize>(meta_len));
  if (!in) throw ModelError("truncated checkpoint: " + path);
  return meta;
}

}  // namespace revoice::nn
