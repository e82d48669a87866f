#pragma once

// Independent reference implementations the tests compare the library
// against. These are written for clarity, not speed, and deliberately share
// no code with the implementations under test.

#include <cmath>
#include <vector>

#include "somnnet/annotations.hpp"
#include "somnnet/params.hpp"
#include "somnnet/rng.hpp"
#include "somnnet/tensor.hpp"

namespace oracles {

// Same-padded valid-region convolution, one output value at a time.
inline double conv_ref(const somnnet::FeatureMap& in, const somnnet::Array& k,
                       const somnnet::Array* biases, int f, int t) {
  const int channels = k.shape[1];
  const int klen = k.shape[2];
  const int pad_left = (klen - 1) / 2;
  double acc = biases ? biases->v[static_cast<size_t>(f)] : 0.0;
  for (int c = 0; c < channels; ++c) {
    for (int j = 0; j < klen; ++j) {
      const int src = t + j - pad_left;
      if (src < 0 || src >= in.length) continue;
      acc += in.at(c, src) *
             k.v[static_cast<size_t>((f * channels + c) * klen + j)];
    }
  }
  return acc;
}

// Slow per-second coverage test straight from the labeling rule.
inline bool second_covered(const std::vector<somnnet::AnnotationEvent>& events,
                           long long t0) {
  for (const auto& e : events) {
    if (!somnnet::is_apneic_event_type(e.type)) continue;
    if (e.onset <= static_cast<double>(t0) &&
        static_cast<double>(t0) < e.onset + e.duration)
      return true;
  }
  return false;
}

inline somnnet::FeatureMap random_map(int c, int l, somnnet::Rng& rng,
                                      double lo = -1.0, double hi = 1.0) {
  somnnet::FeatureMap m(c, l);
  for (double& v : m.v) v = rng.uniform(lo, hi);
  return m;
}

inline somnnet::Array random_array(std::vector<int> shape, somnnet::Rng& rng,
                                   double lo = -1.0, double hi = 1.0) {
  somnnet::Array a = somnnet::Array::zeros(std::move(shape));
  for (double& v : a.v) v = rng.uniform(lo, hi);
  return a;
}

// Central finite difference of a scalar functional with respect to *x.
template <typename F>
double fd_central(F&& f, double* x, double h) {
  const double saved = *x;
  *x = saved + h;
  const double plus = f();
  *x = saved - h;
  const double minus = f();
  *x = saved;
  return (plus - minus) / (2.0 * h);
}

}  // namespace oracles
