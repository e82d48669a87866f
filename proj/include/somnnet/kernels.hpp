#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "somnnet/params.hpp"
#include "somnnet/rng.hpp"
#include "somnnet/tensor.hpp"

namespace somnnet {

// Same padding for stride-1 convolution. For even kernel lengths the extra
// zero goes on the right: pad_left = floor((K-1)/2), pad_right = ceil((K-1)/2).
int same_pad_left(int kernel_length);

// kernels shape [filters, in_channels, kernel_length]; biases shape [filters]
// (pass nullptr for a bias-free layer). Output length equals input length.
FeatureMap conv1d_forward(const FeatureMap& input, const Array& kernels,
                          const Array* biases);

struct Conv1dGrads {
  FeatureMap d_input;
  Array d_kernels;
  Array d_biases;  // empty when the forward ran bias-free
};

Conv1dGrads conv1d_backward(const FeatureMap& upstream,
                            const FeatureMap& cached_input,
                            const Array& kernels, bool use_bias);

struct MaxPoolResult {
  FeatureMap output;
  // flat input index of the max per output element, [c][t_out] row-major
  std::vector<int> argmax;
};

// Output length floor(input.length / pool_size); trailing remainder dropped.
MaxPoolResult maxpool1d_forward(const FeatureMap& input, int pool_size);

FeatureMap maxpool1d_backward(const FeatureMap& upstream,
                              const std::vector<int>& argmax, int in_channels,
                              int in_length);

// weights shape [out, in]; biases shape [out]
std::vector<double> dense_forward(std::span<const double> input,
                                  const Array& weights, const Array* biases);

struct DenseGrads {
  std::vector<double> d_input;
  Array d_weights;
  Array d_biases;
};

DenseGrads dense_backward(std::span<const double> upstream,
                          std::span<const double> cached_input,
                          const Array& weights, bool use_bias);

void relu_forward(std::span<double> x);
// d_input = upstream where the cached pre-activation input was > 0
void relu_backward(std::span<double> upstream, std::span<const double> input);

// Numerically stable softmax (max subtraction); output sums to 1.
std::vector<double> softmax(std::span<const double> logits);

// General VJP through softmax: d_logits = s .* (upstream - dot(upstream, s)).
std::vector<double> softmax_backward(std::span<const double> upstream,
                                     std::span<const double> softmax_output);

struct BceResult {
  double loss = 0.0;
  std::vector<double> d_logits;  // gradient wrt pre-softmax logits
};

// loss = -ln(max(p[label], 1e-12)) + l2_lambda * sum(output_weights^2).
// d_logits uses the fused softmax cross-entropy identity p - onehot(label).
BceResult bce_loss(std::span<const double> probabilities, int label,
                   double l2_lambda, const Array* output_weights);

struct BatchNormCache {
  int batch = 0;
  int features = 0;
  std::vector<double> xhat;     // [b][f] row-major
  std::vector<double> inv_std;  // per feature
};

// x is [batch][features] row-major and normalized in place. Batch statistics
// use the biased variance (divide by batch). Moving statistics update as
// moving <- momentum * moving + (1 - momentum) * batch_stat when requested.
// Train mode requires batch >= 2.
void batchnorm_forward_train(std::vector<double>& x, int batch, int features,
                             const Array& gamma, const Array& beta, double eps,
                             BatchNormCache& cache, Array* moving_mean,
                             Array* moving_var, double momentum,
                             bool update_moving);

void batchnorm_forward_infer(std::vector<double>& x, int batch, int features,
                             const Array& gamma, const Array& beta,
                             const Array& moving_mean, const Array& moving_var,
                             double eps);

struct BatchNormGrads {
  std::vector<double> d_x;
  Array d_gamma;
  Array d_beta;
};

BatchNormGrads batchnorm_backward(const std::vector<double>& d_y,
                                  const BatchNormCache& cache,
                                  const Array& gamma);

// Inverted dropout: train mode zeroes each element with probability rate and
// scales survivors by 1/(1-rate); infer mode is the identity.
std::vector<uint8_t> dropout_mask(size_t n, double rate, Rng& rng);
void dropout_apply(std::span<double> x, const std::vector<uint8_t>& keep,
                   double rate);

}  // namespace somnnet
