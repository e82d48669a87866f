#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "somnnet/params.hpp"

namespace somnnet {

// Cubic sparsity ramp: 0 at begin_step, final_sparsity at end_step, with
// s(t) = final * (1 - (1 - t)^3) in between. Steps count optimizer updates.
struct PruneSchedule {
  double final_sparsity = 0.0;
  long long begin_step = 0;
  long long end_step = 0;

  void validate() const;
  double sparsity_at(long long step) const;
};

// Keep/drop flags for every prunable array, aligned with store order.
// keep[i] == 0 marks a pruned value.
struct SparsityMask {
  double target_sparsity = 0.0;
  std::vector<std::pair<std::string, std::vector<uint8_t>>> keep;

  long long value_count() const;
  long long zero_count() const;
  const std::vector<uint8_t>* find(const std::string& name) const;
};

long long prunable_value_count(const ParameterStore& store);

// Ranks all prunable values globally by |value| and drops the smallest
// llround(target * N). Ties resolve by store position then flat index, so
// the mask is a pure function of the store. target must lie in [0, 0.95].
SparsityMask compute_prune_mask(const ParameterStore& store, double target);

// Zeroes masked positions in any store whose prunable arrays match the mask
// shapes; used on parameters and on gradients alike.
void apply_mask(ParameterStore& store, const SparsityMask& mask);

// Real-valued shadow copies of prunable arrays. During binarized training
// the optimizer updates these while the live store holds their signs.
struct LatentWeights {
  std::vector<std::pair<std::string, Array>> items;

  Array* find(const std::string& name);
  const Array* find(const std::string& name) const;
};

// Copies prunable arrays out of the store. With `only` given, restricted to
// the named arrays (which must exist and be prunable).
LatentWeights make_latent(const ParameterStore& store,
                          const std::vector<std::string>* only = nullptr);

void clip_latent(LatentWeights& latent, double lo = -1.0, double hi = 1.0);

// sign with sign(0) = +1, so binarized weights are exactly +-1.
double sign_pm1(double x);

// store[name] <- sign(latent[name]) for every latent array.
void binarize_from_latent(ParameterStore& store, const LatentWeights& latent);

// One-shot in-place binarization: every prunable array becomes its sign and
// conv/dense bias arrays are removed from the store. Normalization
// parameters stay real. Returns the number of values removed with the
// biases.
long long binarize_weights(ParameterStore& store);

}  // namespace somnnet
