#include "somnnet/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "somnnet/error.hpp"

namespace somnnet {

int same_pad_left(int kernel_length) { return (kernel_length - 1) / 2; }

static void check_conv_shapes(const FeatureMap& input, const Array& kernels,
                              const Array* biases) {
  if (kernels.shape.size() != 3)
    throw ShapeError("conv1d: kernels must be [filters, channels, length]");
  const int filters = kernels.shape[0];
  const int in_ch = kernels.shape[1];
  if (input.channels <= 0 || input.length <= 0)
    throw ShapeError("conv1d: zero-length input");
  if (in_ch != input.channels)
    throw ShapeError("conv1d: kernel channels " + std::to_string(in_ch) +
                     " do not match input channels " +
                     std::to_string(input.channels));
  if (biases && biases->size() != filters)
    throw ShapeError("conv1d: bias count does not match filter count");
}

FeatureMap conv1d_forward(const FeatureMap& input, const Array& kernels,
                          const Array* biases) {
  check_conv_shapes(input, kernels, biases);
  const int filters = kernels.shape[0];
  const int in_ch = kernels.shape[1];
  const int klen = kernels.shape[2];
  const int len = input.length;
  const int pad_left = same_pad_left(klen);

  FeatureMap out(filters, len);
  for (int f = 0; f < filters; ++f) {
    double* o = &out.v[static_cast<size_t>(f) * len];
    if (biases) {
      const double b = biases->v[f];
      for (int t = 0; t < len; ++t) o[t] = b;
    }
    for (int c = 0; c < in_ch; ++c) {
      const double* x = &input.v[static_cast<size_t>(c) * len];
      const double* w =
          &kernels.v[(static_cast<size_t>(f) * in_ch + c) * klen];
      for (int k = 0; k < klen; ++k) {
        const double wk = w[k];
        const int shift = k - pad_left;  // input index = t + shift
        const int t_lo = std::max(0, -shift);
        const int t_hi = std::min(len, len - shift);
        const double* xs = x + shift;
        for (int t = t_lo; t < t_hi; ++t) o[t] += wk * xs[t];
      }
    }
  }
  return out;
}

Conv1dGrads conv1d_backward(const FeatureMap& upstream,
                            const FeatureMap& cached_input,
                            const Array& kernels, bool use_bias) {
  check_conv_shapes(cached_input, kernels, nullptr);
  const int filters = kernels.shape[0];
  const int in_ch = kernels.shape[1];
  const int klen = kernels.shape[2];
  const int len = cached_input.length;
  if (upstream.channels != filters || upstream.length != len)
    throw ShapeError("conv1d backward: upstream gradient shape mismatch");

  Conv1dGrads g;
  g.d_input = FeatureMap(in_ch, len);
  g.d_kernels = Array::zeros(kernels.shape);
  if (use_bias) g.d_biases = Array::zeros({filters});

  const int pad_left = same_pad_left(klen);
  for (int f = 0; f < filters; ++f) {
    const double* up = &upstream.v[static_cast<size_t>(f) * len];
    if (use_bias) {
      double s = 0.0;
      for (int t = 0; t < len; ++t) s += up[t];
      g.d_biases.v[f] = s;
    }
    for (int c = 0; c < in_ch; ++c) {
      const double* x = &cached_input.v[static_cast<size_t>(c) * len];
      double* dx = &g.d_input.v[static_cast<size_t>(c) * len];
      const double* w =
          &kernels.v[(static_cast<size_t>(f) * in_ch + c) * klen];
      double* dw =
          &g.d_kernels.v[(static_cast<size_t>(f) * in_ch + c) * klen];
      for (int k = 0; k < klen; ++k) {
        const int shift = k - pad_left;
        const int t_lo = std::max(0, -shift);
        const int t_hi = std::min(len, len - shift);
        const double* xs = x + shift;
        double* dxs = dx + shift;
        const double wk = w[k];
        double acc = 0.0;
        for (int t = t_lo; t < t_hi; ++t) {
          acc += xs[t] * up[t];
          dxs[t] += wk * up[t];
        }
        dw[k] += acc;
      }
    }
  }
  return g;
}

MaxPoolResult maxpool1d_forward(const FeatureMap& input, int pool_size) {
  if (pool_size <= 0)
    throw ParameterError("maxpool: pool_size must be >= 1");
  const int out_len = input.length / pool_size;
  MaxPoolResult r;
  r.output = FeatureMap(input.channels, out_len);
  r.argmax.assign(static_cast<size_t>(input.channels) * out_len, 0);
  for (int c = 0; c < input.channels; ++c) {
    const double* x = &input.v[static_cast<size_t>(c) * input.length];
    for (int t = 0; t < out_len; ++t) {
      int best = t * pool_size;
      double best_v = x[best];
      for (int k = 1; k < pool_size; ++k) {
        const int i = t * pool_size + k;
        if (x[i] > best_v) {
          best_v = x[i];
          best = i;
        }
      }
      r.output.at(c, t) = best_v;
      r.argmax[static_cast<size_t>(c) * out_len + t] =
          c * input.length + best;
    }
  }
  return r;
}

FeatureMap maxpool1d_backward(const FeatureMap& upstream,
                              const std::vector<int>& argmax, int in_channels,
                              int in_length) {
  if (argmax.size() != upstream.size())
    throw ShapeError("maxpool backward: argmax/upstream size mismatch");
  FeatureMap d_in(in_channels, in_length);
  for (size_t i = 0; i < argmax.size(); ++i) d_in.v[argmax[i]] += upstream.v[i];
  return d_in;
}

std::vector<double> dense_forward(std::span<const double> input,
                                  const Array& weights, const Array* biases) {
  if (weights.shape.size() != 2)
    throw ShapeError("dense: weights must be [out, in]");
  const int out_n = weights.shape[0];
  const int in_n = weights.shape[1];
  if (static_cast<int>(input.size()) != in_n)
    throw ShapeError("dense: input length " + std::to_string(input.size()) +
                     " does not match weight in-dimension " +
                     std::to_string(in_n));
  if (biases && biases->size() != out_n)
    throw ShapeError("dense: bias count does not match out-dimension");
  std::vector<double> out(out_n, 0.0);
  for (int j = 0; j < out_n; ++j) {
    const double* w = &weights.v[static_cast<size_t>(j) * in_n];
    double acc = biases ? biases->v[j] : 0.0;
    for (int i = 0; i < in_n; ++i) acc += w[i] * input[i];
    out[j] = acc;
  }
  return out;
}

DenseGrads dense_backward(std::span<const double> upstream,
                          std::span<const double> cached_input,
                          const Array& weights, bool use_bias) {
  const int out_n = weights.shape[0];
  const int in_n = weights.shape[1];
  if (static_cast<int>(upstream.size()) != out_n)
    throw ShapeError("dense backward: upstream size mismatch");
  if (static_cast<int>(cached_input.size()) != in_n)
    throw ShapeError("dense backward: cached input size mismatch");
  DenseGrads g;
  g.d_input.assign(in_n, 0.0);
  g.d_weights = Array::zeros(weights.shape);
  if (use_bias) g.d_biases = Array::zeros({out_n});
  for (int j = 0; j < out_n; ++j) {
    const double u = upstream[j];
    const double* w = &weights.v[static_cast<size_t>(j) * in_n];
    double* dw = &g.d_weights.v[static_cast<size_t>(j) * in_n];
    for (int i = 0; i < in_n; ++i) {
      dw[i] += u * cached_input[i];
      g.d_input[i] += u * w[i];
    }
    if (use_bias) g.d_biases.v[j] = u;
  }
  return g;
}

void relu_forward(std::span<double> x) {
  for (double& e : x) e = e > 0.0 ? e : 0.0;
}

void relu_backward(std::span<double> upstream, std::span<const double> input) {
  if (upstream.size() != input.size())
    throw ShapeError("relu backward: size mismatch");
  for (size_t i = 0; i < upstream.size(); ++i) {
    if (input[i] <= 0.0) upstream[i] = 0.0;
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  double mx = logits[0];
  for (double x : logits) mx = std::max(mx, x);
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

std::vector<double> softmax_backward(std::span<const double> upstream,
                                     std::span<const double> softmax_output) {
  if (upstream.size() != softmax_output.size())
    throw ShapeError("softmax backward: size mismatch");
  double dot = 0.0;
  for (size_t i = 0; i < upstream.size(); ++i)
    dot += upstream[i] * softmax_output[i];
  std::vector<double> d(upstream.size());
  for (size_t i = 0; i < upstream.size(); ++i)
    d[i] = softmax_output[i] * (upstream[i] - dot);
  return d;
}

BceResult bce_loss(std::span<const double> probabilities, int label,
                   double l2_lambda, const Array* output_weights) {
  if (label < 0 || label >= static_cast<int>(probabilities.size()))
    throw ParameterError("bce: label out of range");
  BceResult r;
  const double p = std::max(probabilities[label], 1e-12);
  r.loss = -std::log(p);
  if (output_weights && l2_lambda != 0.0) {
    double s2 = 0.0;
    for (double w : output_weights->v) s2 += w * w;
    r.loss += l2_lambda * s2;
  }
  r.d_logits.assign(probabilities.begin(), probabilities.end());
  r.d_logits[label] -= 1.0;
  return r;
}

void batchnorm_forward_train(std::vector<double>& x, int batch, int features,
                             const Array& gamma, const Array& beta, double eps,
                             BatchNormCache& cache, Array* moving_mean,
                             Array* moving_var, double momentum,
                             bool update_moving) {
  if (batch < 2)
    throw ParameterError("batchnorm: train mode requires batch size >= 2");
  if (gamma.size() != features || beta.size() != features)
    throw ShapeError("batchnorm: gamma/beta size mismatch");
  if (x.size() != static_cast<size_t>(batch) * features)
    throw ShapeError("batchnorm: input size mismatch");

  cache.batch = batch;
  cache.features = features;
  cache.xhat.resize(x.size());
  cache.inv_std.resize(features);

  for (int f = 0; f < features; ++f) {
    double mean = 0.0;
    for (int b = 0; b < batch; ++b) mean += x[static_cast<size_t>(b) * features + f];
    mean /= batch;
    double var = 0.0;
    for (int b = 0; b < batch; ++b) {
      const double d = x[static_cast<size_t>(b) * features + f] - mean;
      var += d * d;
    }
    var /= batch;
    const double inv = 1.0 / std::sqrt(var + eps);
    cache.inv_std[f] = inv;
    for (int b = 0; b < batch; ++b) {
      const size_t i = static_cast<size_t>(b) * features + f;
      const double xh = (x[i] - mean) * inv;
      cache.xhat[i] = xh;
      x[i] = gamma.v[f] * xh + beta.v[f];
    }
    if (update_moving && moving_mean && moving_var) {
      moving_mean->v[f] = momentum * moving_mean->v[f] + (1.0 - momentum) * mean;
      moving_var->v[f] = momentum * moving_var->v[f] + (1.0 - momentum) * var;
    }
  }
}

void batchnorm_forward_infer(std::vector<double>& x, int batch, int features,
                             const Array& gamma, const Array& beta,
                             const Array& moving_mean, const Array& moving_var,
                             double eps) {
  if (gamma.size() != features || beta.size() != features ||
      moving_mean.size() != features || moving_var.size() != features)
    throw ShapeError("batchnorm: parameter size mismatch");
  for (int f = 0; f < features; ++f) {
    const double inv = 1.0 / std::sqrt(moving_var.v[f] + eps);
    const double scale = gamma.v[f] * inv;
    const double shift = beta.v[f] - moving_mean.v[f] * scale;
    for (int b = 0; b < batch; ++b) {
      const size_t i = static_cast<size_t>(b) * features + f;
      x[i] = scale * x[i] + shift;
    }
  }
}

BatchNormGrads batchnorm_backward(const std::vector<double>& d_y,
                                  const BatchNormCache& cache,
                                  const Array& gamma) {
  const int batch = cache.batch;
  const int features = cache.features;
  if (d_y.size() != cache.xhat.size())
    throw ShapeError("batchnorm backward: upstream size mismatch");
  BatchNormGrads g;
  g.d_x.assign(d_y.size(), 0.0);
  g.d_gamma = Array::zeros({features});
  g.d_beta = Array::zeros({features});
  for (int f = 0; f < features; ++f) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int b = 0; b < batch; ++b) {
      const size_t i = static_cast<size_t>(b) * features + f;
      sum_dy += d_y[i];
      sum_dy_xhat += d_y[i] * cache.xhat[i];
    }
    g.d_gamma.v[f] = sum_dy_xhat;
    g.d_beta.v[f] = sum_dy;
    const double scale = gamma.v[f] * cache.inv_std[f] / batch;
    for (int b = 0; b < batch; ++b) {
      const size_t i = static_cast<size_t>(b) * features + f;
      g.d_x[i] = scale * (batch * d_y[i] - sum_dy - cache.xhat[i] * sum_dy_xhat);
    }
  }
  return g;
}

std::vector<uint8_t> dropout_mask(size_t n, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw ParameterError("dropout: rate must be in [0, 1)");
  std::vector<uint8_t> keep(n, 1);
  if (rate == 0.0) return keep;
  for (size_t i = 0; i < n; ++i) keep[i] = rng.uniform() >= rate ? 1 : 0;
  return keep;
}

void dropout_apply(std::span<double> x, const std::vector<uint8_t>& keep,
                   double rate) {
  if (x.size() != keep.size())
    throw ShapeError("dropout: mask size mismatch");
  if (rate == 0.0) return;
  const double scale = 1.0 / (1.0 - rate);
  for (size_t i = 0; i < x.size(); ++i) x[i] = keep[i] ? x[i] * scale : 0.0;
}

}  // namespace somnnet
