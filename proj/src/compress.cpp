#include "somnnet/compress.hpp"

#include <algorithm>
#include <cmath>

#include "somnnet/error.hpp"

namespace somnnet {

void PruneSchedule::validate() const {
  if (final_sparsity < 0.0 || final_sparsity > 0.95)
    throw ParameterError("prune schedule: final sparsity must be in [0, 0.95]");
  if (begin_step < 0)
    throw ParameterError("prune schedule: begin_step must be >= 0");
  if (begin_step >= end_step)
    throw ParameterError("prune schedule: begin_step must precede end_step");
}

double PruneSchedule::sparsity_at(long long step) const {
  validate();
  double t = static_cast<double>(step - begin_step) /
             static_cast<double>(end_step - begin_step);
  t = std::clamp(t, 0.0, 1.0);
  const double u = 1.0 - t;
  return final_sparsity * (1.0 - u * u * u);
}

long long SparsityMask::value_count() const {
  long long n = 0;
  for (const auto& [name, k] : keep) n += static_cast<long long>(k.size());
  return n;
}

long long SparsityMask::zero_count() const {
  long long n = 0;
  for (const auto& [name, k] : keep)
    for (uint8_t b : k)
      if (!b) ++n;
  return n;
}

const std::vector<uint8_t>* SparsityMask::find(const std::string& name) const {
  for (const auto& [n, k] : keep)
    if (n == name) return &k;
  return nullptr;
}

long long prunable_value_count(const ParameterStore& store) {
  long long n = 0;
  for (const auto& [name, a] : store.items)
    if (is_prunable_name(name)) n += a.size();
  return n;
}

SparsityMask compute_prune_mask(const ParameterStore& store, double target) {
  if (target < 0.0 || target > 0.95)
    throw ParameterError("prune: target sparsity must be in [0, 0.95]");

  struct Entry {
    double mag;
    uint32_t item;
    uint32_t flat;
  };
  std::vector<Entry> order;
  SparsityMask mask;
  mask.target_sparsity = target;

  uint32_t item_idx = 0;
  for (const auto& [name, a] : store.items) {
    if (!is_prunable_name(name)) {
      ++item_idx;
      continue;
    }
    mask.keep.emplace_back(name, std::vector<uint8_t>(a.v.size(), 1));
    for (size_t j = 0; j < a.v.size(); ++j)
      order.push_back({std::abs(a.v[j]), item_idx,
                       static_cast<uint32_t>(j)});
    ++item_idx;
  }

  const long long total = static_cast<long long>(order.size());
  if (total == 0) throw ParameterError("prune: store has no prunable arrays");
  const long long k = std::llround(target * static_cast<double>(total));
  if (k == 0) return mask;

  std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                   [](const Entry& a, const Entry& b) {
                     if (a.mag != b.mag) return a.mag < b.mag;
                     if (a.item != b.item) return a.item < b.item;
                     return a.flat < b.flat;
                   });
  std::sort(order.begin(), order.begin() + k,
            [](const Entry& a, const Entry& b) {
              if (a.item != b.item) return a.item < b.item;
              return a.flat < b.flat;
            });

  // keep entries were appended in store order; map item index back to the
  // position inside mask.keep.
  std::vector<int> item_to_mask;
  {
    int pos = 0;
    uint32_t idx = 0;
    for (const auto& [name, a] : store.items) {
      item_to_mask.push_back(is_prunable_name(name) ? pos++ : -1);
      (void)a;
      ++idx;
    }
  }
  for (long long j = 0; j < k; ++j) {
    const Entry& e = order[static_cast<size_t>(j)];
    mask.keep[static_cast<size_t>(item_to_mask[e.item])].second[e.flat] = 0;
  }
  return mask;
}

void apply_mask(ParameterStore& store, const SparsityMask& mask) {
  for (const auto& [name, keep] : mask.keep) {
    Array* a = store.find(name);
    if (!a) continue;  // grads may omit frozen arrays
    if (a->v.size() != keep.size())
      throw ShapeError("prune: mask shape mismatch for " + name);
    for (size_t j = 0; j < keep.size(); ++j)
      if (!keep[j]) a->v[j] = 0.0;
  }
}

Array* LatentWeights::find(const std::string& name) {
  for (auto& [n, a] : items)
    if (n == name) return &a;
  return nullptr;
}

const Array* LatentWeights::find(const std::string& name) const {
  for (const auto& [n, a] : items)
    if (n == name) return &a;
  return nullptr;
}

LatentWeights make_latent(const ParameterStore& store,
                          const std::vector<std::string>* only) {
  LatentWeights latent;
  if (only) {
    for (const std::string& name : *only) {
      const Array* a = store.find(name);
      if (!a) throw ParameterError("binarize: no such array: " + name);
      if (!is_prunable_name(name))
        throw ParameterError("binarize: " + name + " is not a weight array");
      latent.items.emplace_back(name, *a);
    }
    return latent;
  }
  for (const auto& [name, a] : store.items)
    if (is_prunable_name(name)) latent.items.emplace_back(name, a);
  return latent;
}

void clip_latent(LatentWeights& latent, double lo, double hi) {
  for (auto& [name, a] : latent.items)
    for (double& x : a.v) x = std::clamp(x, lo, hi);
}

double sign_pm1(double x) { return x < 0.0 ? -1.0 : 1.0; }

void binarize_from_latent(ParameterStore& store, const LatentWeights& latent) {
  for (const auto& [name, a] : latent.items) {
    Array& dst = store.at(name);
    if (!dst.same_shape(a))
      throw ShapeError("binarize: latent shape mismatch for " + name);
    for (size_t j = 0; j < a.v.size(); ++j) dst.v[j] = sign_pm1(a.v[j]);
  }
}

long long binarize_weights(ParameterStore& store) {
  long long removed = 0;
  std::vector<std::string> bias_names;
  for (auto& [name, a] : store.items) {
    if (is_prunable_name(name)) {
      for (double& x : a.v) x = sign_pm1(x);
    } else if (name.size() > 5 &&
               name.compare(name.size() - 5, 5, ".bias") == 0) {
      removed += a.size();
      bias_names.push_back(name);
    }
  }
  for (const std::string& name : bias_names) store.erase(name);
  return removed;
}

}  // namespace somnnet
