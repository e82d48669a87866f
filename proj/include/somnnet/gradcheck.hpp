#pragma once

#include <string>
#include <vector>

#include "somnnet/network.hpp"

namespace somnnet {

// Scale-guarded relative difference between an analytic and a
// finite-difference gradient value. The 0.01 floor keeps near-zero
// gradients from blowing the ratio up on rounding noise.
double max_relative_error(double analytic, double numeric);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  long long worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  long long values_checked = 0;
};

// Central finite differences over every trainable value, compared against
// the batch gradient. Each loss evaluation reseeds the dropout stream from
// rng_seed so stochastic layers see identical masks. Refuses networks with
// 5000 or more trainable values; the quadratic cost is meant for toy stacks.
GradCheckReport gradient_check(const Network& net,
                               const std::vector<std::vector<double>>& windows,
                               const std::vector<int>& labels,
                               const ParameterStore& params,
                               const EngineOptions& opt, uint64_t rng_seed,
                               double fd_step = 1e-4);

}  // namespace somnnet
