#include "somnnet/checkpoint.hpp"

#include <limits>

#include "somnnet/binio.hpp"
#include "somnnet/error.hpp"

namespace somnnet {

namespace {
constexpr char kMagic[] = "SOMNCKPT";  // 8 bytes, no terminator written
constexpr uint32_t kVersion = 1;
constexpr uint8_t kDtypeF32 = 0;
}  // namespace

std::string encode_checkpoint(const CheckpointMeta& meta,
                              const ParameterStore& params) {
  std::string b;
  b.append(kMagic, 8);
  bin::put_u32(b, kVersion);
  bin::put_u64(b, meta.digest);
  bin::put_u32(b, meta.epochs_run);
  bin::put_u32(b, meta.best_epoch);
  bin::put_f64(b, meta.best_val_accuracy);
  bin::put_u64(b, meta.seed);
  bin::put_u8(b, meta.binarized ? 1 : 0);
  bin::put_f64(b, meta.target_sparsity);

  bin::put_u32(b, static_cast<uint32_t>(params.count()));
  for (const auto& [name, a] : params.items) {
    if (name.size() > std::numeric_limits<uint16_t>::max())
      throw ParameterError("checkpoint: array name too long: " + name);
    bin::put_u16(b, static_cast<uint16_t>(name.size()));
    b.append(name);
    bin::put_u8(b, kDtypeF32);
    bin::put_u8(b, static_cast<uint8_t>(a.shape.size()));
    for (int d : a.shape) bin::put_u32(b, static_cast<uint32_t>(d));
    for (double v : a.v) bin::put_f32(b, static_cast<float>(v));
  }
  return b;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  bin::Reader r(bytes);
  if (r.bytes(8) != std::string(kMagic, 8))
    throw ParseError("checkpoint: bad magic, not a checkpoint file");
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw ParseError("checkpoint: unsupported format version " +
                     std::to_string(version));

  Checkpoint c;
  c.meta.digest = r.u64();
  c.meta.epochs_run = r.u32();
  c.meta.best_epoch = r.u32();
  c.meta.best_val_accuracy = r.f64();
  c.meta.seed = r.u64();
  c.meta.binarized = r.u8() != 0;
  c.meta.target_sparsity = r.f64();

  const uint32_t count = r.u32();
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = r.u16();
    const std::string name = r.bytes(name_len);
    const uint8_t dtype = r.u8();
    if (dtype != kDtypeF32)
      throw ParseError("checkpoint: unknown dtype " + std::to_string(dtype) +
                       " for " + name);
    const uint8_t rank = r.u8();
    std::vector<int> shape;
    long long n = 1;
    for (uint8_t d = 0; d < rank; ++d) {
      const uint32_t dim = r.u32();
      if (dim == 0 || dim > (1u << 28))
        throw ParseError("checkpoint: bad dimension for " + name);
      shape.push_back(static_cast<int>(dim));
      n *= dim;
    }
    Array a = Array::zeros(shape);
    for (long long j = 0; j < n; ++j) a.v[static_cast<size_t>(j)] = r.f32();
    c.params.add(name, std::move(a));
  }
  if (!r.done())
    throw ParseError("checkpoint: " +
                     std::to_string(bytes.size() - r.off) +
                     " trailing bytes");
  return c;
}

void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const ParameterStore& params) {
  bin::write_file(path, encode_checkpoint(meta, params));
}

Checkpoint load_checkpoint(const std::string& path) {
  return decode_checkpoint(bin::read_file(path));
}

void require_digest(const Checkpoint& ckpt, uint64_t expected) {
  if (ckpt.meta.digest != expected)
    throw ConfigError(
        "checkpoint was trained on a different architecture (digest " +
        std::to_string(ckpt.meta.digest) + ", expected " +
        std::to_string(expected) + ")");
}

}  // namespace somnnet
