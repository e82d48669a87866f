#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "somnnet/compress.hpp"
#include "somnnet/metrics.hpp"
#include "somnnet/network.hpp"

namespace somnnet {

// The per-second apnea classifier: an 88-sample oxygen-saturation window
// (11 s at 8 Hz) through three same-padded conv blocks into a two-way
// softmax.
//
//   input-norm -> conv 6x25 -> relu -> conv 50x10 -> relu -> pool/2
//   -> conv 30x15 -> relu -> pool/2 -> flatten(660) -> dropout 0.25
//   -> dense 2 -> softmax
NetworkConfig reference_config();
Network build_reference_network();

// Index of the winning class; exact ties resolve to the lower index, so a
// 50/50 output reads as non-apneic.
int predict_label(std::span<const double> probs);

// True when the store still carries conv/dense bias arrays (they are
// removed by weight binarization).
bool store_has_biases(const Network& net, const ParameterStore& params);

struct LabeledSet {
  std::vector<std::vector<double>> x;
  std::vector<int> y;

  size_t size() const { return x.size(); }
};

struct FitOptions {
  int epochs = 100;
  int batch_size = 128;
  uint64_t seed = 1;
  double learning_rate = 1e-3;
  double l2_lambda = 1e-3;

  bool prune = false;
  PruneSchedule schedule;  // consulted only when prune is set

  bool binarize = false;
  // Restrict binarization to these weight arrays; empty means all of them.
  std::vector<std::string> binarize_only;

  std::ostream* log = nullptr;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double sparsity = 0.0;  // scheduled sparsity after the epoch's last step
  MetricsReport val;
};

struct FitResult {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;  // 1-based, earliest epoch with the best val accuracy
  double best_val_accuracy = 0.0;

  // State captured at the best epoch. For binarized runs `params` holds the
  // sign weights (biases removed) and `latents` the clipped real-valued
  // shadows under "<name>.latent". For pruned runs `mask` records the keep
  // flags in force at that epoch.
  ParameterStore params;
  ParameterStore latents;
  SparsityMask mask;

  bool pruned = false;
  bool binarized = false;
  long long steps = 0;
};

// Optimizer steps in one epoch over n samples: ceil(n / batch), with a
// trailing singleton folded into the previous batch because train-mode
// normalization needs at least two samples.
long long steps_per_epoch(long long n, int batch_size);

// Minibatch training with ADAM. Model selection is by validation accuracy;
// when pruning, only epochs that finish at the schedule's final sparsity
// are eligible (falling back to the last epoch if none are). Deterministic
// for a fixed seed.
FitResult fit(const Network& net, ParameterStore params,
              const LabeledSet& train, const LabeledSet& val,
              const FitOptions& opt);

MetricsReport evaluate(const Network& net, const ParameterStore& params,
                       const LabeledSet& data, const EngineOptions& eopt = {});

}  // namespace somnnet
