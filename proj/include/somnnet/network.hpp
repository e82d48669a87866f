#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "somnnet/kernels.hpp"
#include "somnnet/params.hpp"
#include "somnnet/rng.hpp"
#include "somnnet/tensor.hpp"

namespace somnnet {

enum class LayerKind {
  InputNorm,
  Conv1d,
  Relu,
  MaxPool,
  Flatten,
  Dropout,
  Dense,
  Softmax
};

const char* layer_kind_name(LayerKind k);

struct LayerSpec {
  LayerKind kind;
  int kernel_length = 0;    // conv
  int filter_count = 0;     // conv filters / dense out units
  int pool_size = 0;        // maxpool
  double dropout_rate = 0;  // dropout

  static LayerSpec input_norm() { return {LayerKind::InputNorm}; }
  static LayerSpec conv1d(int filters, int kernel_length) {
    LayerSpec s{LayerKind::Conv1d};
    s.filter_count = filters;
    s.kernel_length = kernel_length;
    return s;
  }
  static LayerSpec relu() { return {LayerKind::Relu}; }
  static LayerSpec maxpool(int pool) {
    LayerSpec s{LayerKind::MaxPool};
    s.pool_size = pool;
    return s;
  }
  static LayerSpec flatten() { return {LayerKind::Flatten}; }
  static LayerSpec dropout(double rate) {
    LayerSpec s{LayerKind::Dropout};
    s.dropout_rate = rate;
    return s;
  }
  static LayerSpec dense(int out_units) {
    LayerSpec s{LayerKind::Dense};
    s.filter_count = out_units;
    return s;
  }
  static LayerSpec softmax() { return {LayerKind::Softmax}; }
};

struct NetworkConfig {
  int input_channels = 1;
  int input_length = 88;
  int class_count = 2;
  double norm_epsilon = 1e-3;
  double norm_momentum = 0.99;
  std::vector<LayerSpec> layers;

  // Canonical serialization; the digest over it gates checkpoint loading.
  std::string canonical() const;
  uint64_t digest() const;
};

struct LayerShape {
  int channels = 0;
  int length = 0;
};

struct ForwardStats {
  // Filled when a stats pointer is passed to forward_infer: every conv
  // kernel and dense weight the pass reads is inspected.
  bool weights_all_pm1 = true;
  long long prunable_weights_seen = 0;
  double min_abs_weight = 0.0;
  double max_abs_weight = 0.0;
};

struct EngineOptions {
  bool use_bias = true;      // false for the binarized model
  double l2_lambda = 0.0;    // L2 on the output dense weights
};

// Validated network: per-layer input shapes resolved from the config.
class Network {
 public:
  static Network build(const NetworkConfig& config);

  const NetworkConfig& config() const { return config_; }
  // shape entering layer i; shape(layer_count()) is the stack output
  const LayerShape& shape(int i) const { return shapes_[i]; }
  int layer_count() const { return static_cast<int>(config_.layers.size()); }
  int flatten_dim() const;  // in-dimension of the final dense layer
  int output_dim() const { return config_.class_count; }
  int last_dense_index() const { return last_dense_; }

  std::string param_name(int layer, const char* what) const;
  // Fresh parameters: scaled uniform fan-in kernels/weights, zero biases,
  // identity normalization.
  ParameterStore init_params(uint64_t seed) const;
  long long trainable_count(const ParameterStore& params) const;

 private:
  NetworkConfig config_;
  std::vector<LayerShape> shapes_;
  int last_dense_ = -1;
};

// Single-sample inference. Dropout is the identity; normalization uses
// moving statistics. Pure function of (params, window).
std::vector<double> forward_infer(const Network& net,
                                  const ParameterStore& params,
                                  std::span<const double> window,
                                  const EngineOptions& opt = {},
                                  ForwardStats* stats = nullptr);

struct BatchResult {
  double mean_loss = 0.0;
  ParameterStore grads;  // mean gradients for every trainable array
};

// Train-mode batch pass: forward + backward, gradients averaged over the
// batch. rng feeds dropout draws; update_moving controls whether the pass
// writes normalization moving statistics back into params.
BatchResult train_batch(const Network& net, ParameterStore& params,
                        const std::vector<std::span<const double>>& windows,
                        const std::vector<int>& labels, Rng& rng,
                        const EngineOptions& opt, bool update_moving);

// Train-mode forward only (loss, no gradients, no moving-statistic update).
// Consumes rng identically to train_batch; used by the gradient checker.
double batch_loss(const Network& net, const ParameterStore& params,
                  const std::vector<std::span<const double>>& windows,
                  const std::vector<int>& labels, Rng& rng,
                  const EngineOptions& opt);

}  // namespace somnnet
