#include "somnnet/gradcheck.hpp"

#include <cmath>
#include <span>

#include "somnnet/error.hpp"

namespace somnnet {

double max_relative_error(double analytic, double numeric) {
  const double denom =
      std::max(std::abs(analytic) + std::abs(numeric), 0.01);
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport gradient_check(const Network& net,
                               const std::vector<std::vector<double>>& windows,
                               const std::vector<int>& labels,
                               const ParameterStore& params,
                               const EngineOptions& opt, uint64_t rng_seed,
                               double fd_step) {
  if (fd_step <= 0.0)
    throw ParameterError("gradient_check: fd_step must be positive");
  const long long trainable = net.trainable_count(params);
  if (trainable >= 5000)
    throw ParameterError("gradient_check: " + std::to_string(trainable) +
                         " trainable values; limit is 4999");

  ParameterStore work = params;
  std::vector<std::span<const double>> spans;
  spans.reserve(windows.size());
  for (const auto& w : windows) spans.emplace_back(w);

  Rng grad_rng(rng_seed);
  BatchResult analytic = train_batch(net, work, spans, labels, grad_rng, opt,
                                     /*update_moving=*/false);

  GradCheckReport report;
  for (auto& [name, grad] : analytic.grads.items) {
    Array& value = work.at(name);
    for (size_t j = 0; j < value.v.size(); ++j) {
      const double saved = value.v[j];
      value.v[j] = saved + fd_step;
      Rng plus_rng(rng_seed);
      const double loss_plus =
          batch_loss(net, work, spans, labels, plus_rng, opt);
      value.v[j] = saved - fd_step;
      Rng minus_rng(rng_seed);
      const double loss_minus =
          batch_loss(net, work, spans, labels, minus_rng, opt);
      value.v[j] = saved;

      const double numeric = (loss_plus - loss_minus) / (2.0 * fd_step);
      const double rel = max_relative_error(grad.v[j], numeric);
      ++report.values_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = name;
        report.worst_index = static_cast<long long>(j);
        report.worst_analytic = grad.v[j];
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace somnnet
