#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace somnnet {

uint64_t fnv1a64(const void* data, size_t n,
                 uint64_t h = 14695981039346656037ULL);
uint64_t fnv1a64(const std::string& s, uint64_t h = 14695981039346656037ULL);

// mt19937_64 with explicit value derivations. The standard pins the engine's
// output sequence but not the distributions, so uniform/normal are derived
// here to keep every seeded run bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), eng_(seed) {}

  uint64_t seed() const { return seed_; }
  uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  uint64_t uniform_int(uint64_t n);

  double normal();

  // Independent stream derived from (seed, tag); used for per-epoch shuffles.
  Rng fork(uint64_t tag) const;

 private:
  uint64_t seed_ = 0;
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

template <typename T>
void shuffle_indices(std::vector<T>& idx, Rng& rng) {
  for (size_t i = idx.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng.uniform_int(i));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace somnnet
