#include "somnnet/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace somnnet {

uint64_t fnv1a64(const void* data, size_t n, uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t fnv1a64(const std::string& s, uint64_t h) {
  return fnv1a64(s.data(), s.size(), h);
}

uint64_t Rng::uniform_int(uint64_t n) {
  if (n == 0) return 0;
  // rejection sampling over the top range to avoid modulo bias
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u clamped away from 0 so log stays finite
  double u = uniform();
  if (u < 1e-300) u = 1e-300;
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  const double theta = 6.283185307179586476925286766559 * v;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Rng Rng::fork(uint64_t tag) const {
  uint64_t buf[2] = {seed_, tag};
  return Rng(fnv1a64(buf, sizeof(buf)));
}

}  // namespace somnnet
