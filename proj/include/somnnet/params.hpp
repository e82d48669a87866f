#pragma once

#include <string>
#include <utility>
#include <vector>

namespace somnnet {

// Shaped named array. Shapes are informational for IO and counting; the
// kernels index flat storage directly.
struct Array {
  std::vector<int> shape;
  std::vector<double> v;

  Array() = default;
  Array(std::vector<int> s, std::vector<double> data)
      : shape(std::move(s)), v(std::move(data)) {}

  static Array zeros(std::vector<int> s);

  long long size() const { return static_cast<long long>(v.size()); }
  bool same_shape(const Array& o) const { return shape == o.shape; }
};

// Ordered collection of named arrays. Order is the definition order of the
// network's layers and is preserved through checkpoints, so repeated runs
// serialize identically.
struct ParameterStore {
  std::vector<std::pair<std::string, Array>> items;

  Array* find(const std::string& name);
  const Array* find(const std::string& name) const;
  Array& at(const std::string& name);
  const Array& at(const std::string& name) const;
  bool has(const std::string& name) const { return find(name) != nullptr; }
  void add(const std::string& name, Array a);
  bool erase(const std::string& name);
  size_t count() const { return items.size(); }
};

// Prunable arrays are conv kernels and dense weights; biases and
// normalization parameters are never masked.
bool is_prunable_name(const std::string& name);

// Moving statistics are updated by forward passes, not by the optimizer.
bool is_trainable_name(const std::string& name);

long long total_value_count(const ParameterStore& store);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long long step_count = 0;
  // per-array first/second moments, keyed like the store
  std::vector<std::pair<std::string, std::pair<std::vector<double>,
                                               std::vector<double>>>>
      moments;

  static AdamState init_for(const ParameterStore& params,
                            double learning_rate = 1e-3);
  std::pair<std::vector<double>, std::vector<double>>* find(
      const std::string& name);
};

// Standard ADAM update with bias correction over every array present in
// grads. Arrays in grads must exist in params with identical shapes.
void adam_step(ParameterStore& params, const ParameterStore& grads,
               AdamState& state);

}  // namespace somnnet
