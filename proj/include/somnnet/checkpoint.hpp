#pragma once

#include <cstdint>
#include <string>

#include "somnnet/params.hpp"

namespace somnnet {

// Model checkpoint on disk: "SOMNCKPT", format version, the architecture
// digest the weights belong to, training metadata, then every array as f32
// little-endian. Values are trained in double precision and narrowed to f32
// at rest. Array order is preserved, so save(load(f)) reproduces f byte for
// byte.
struct CheckpointMeta {
  uint64_t digest = 0;
  uint32_t epochs_run = 0;
  uint32_t best_epoch = 0;
  double best_val_accuracy = 0.0;
  uint64_t seed = 0;
  bool binarized = false;
  double target_sparsity = 0.0;
};

struct Checkpoint {
  CheckpointMeta meta;
  ParameterStore params;
};

std::string encode_checkpoint(const CheckpointMeta& meta,
                              const ParameterStore& params);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const ParameterStore& params);
Checkpoint load_checkpoint(const std::string& path);

// Throws ConfigError when the checkpoint was trained on a different
// architecture than the one about to consume it.
void require_digest(const Checkpoint& ckpt, uint64_t expected);

}  // namespace somnnet
