#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace somnnet {

// A channels x length grid of reals; values stored row-major per channel.
struct FeatureMap {
  int channels = 0;
  int length = 0;
  std::vector<double> v;

  FeatureMap() = default;
  FeatureMap(int c, int l)
      : channels(c), length(l), v(static_cast<size_t>(c) * l, 0.0) {}

  double& at(int c, int t) { return v[static_cast<size_t>(c) * length + t]; }
  double at(int c, int t) const {
    return v[static_cast<size_t>(c) * length + t];
  }

  size_t size() const { return v.size(); }

  bool finite() const {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }
};

}  // namespace somnnet
