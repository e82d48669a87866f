#include "somnnet/network.hpp"

#include <cmath>
#include <sstream>

#include "somnnet/error.hpp"

namespace somnnet {

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::InputNorm: return "input-norm";
    case LayerKind::Conv1d: return "conv1d";
    case LayerKind::Relu: return "relu";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::Dense: return "dense";
    case LayerKind::Softmax: return "softmax";
  }
  return "?";
}

std::string NetworkConfig::canonical() const {
  std::ostringstream os;
  os << "v1;in=" << input_channels << "x" << input_length
     << ";cls=" << class_count << ";eps=" << norm_epsilon
     << ";mom=" << norm_momentum << ";L=";
  for (size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& s = layers[i];
    if (i) os << "|";
    os << layer_kind_name(s.kind);
    switch (s.kind) {
      case LayerKind::Conv1d:
        os << ":" << s.filter_count << ":" << s.kernel_length << ":same";
        break;
      case LayerKind::Dense:
        os << ":" << s.filter_count;
        break;
      case LayerKind::MaxPool:
        os << ":" << s.pool_size;
        break;
      case LayerKind::Dropout:
        os << ":" << s.dropout_rate;
        break;
      default:
        break;
    }
  }
  return os.str();
}

uint64_t NetworkConfig::digest() const { return fnv1a64(canonical()); }

Network Network::build(const NetworkConfig& config) {
  if (config.layers.empty())
    throw ConfigError("network: empty layer stack");
  if (config.input_channels < 1 || config.input_length < 1)
    throw ShapeError("network: input shape must be positive");
  if (config.layers.back().kind != LayerKind::Softmax)
    throw ConfigError("network: stack must end with softmax");

  Network net;
  net.config_ = config;
  net.shapes_.resize(config.layers.size() + 1);
  LayerShape cur{config.input_channels, config.input_length};
  net.shapes_[0] = cur;

  for (size_t i = 0; i < config.layers.size(); ++i) {
    const LayerSpec& s = config.layers[i];
    switch (s.kind) {
      case LayerKind::InputNorm:
        if (i != 0)
          throw ConfigError("network: input-norm allowed only as layer 0");
        break;
      case LayerKind::Conv1d:
        if (s.filter_count < 1 || s.kernel_length < 1)
          throw ConfigError("network: conv needs filters >= 1, kernel >= 1");
        cur = {s.filter_count, cur.length};
        break;
      case LayerKind::Relu:
        break;
      case LayerKind::MaxPool: {
        if (s.pool_size <= 0)
          throw ParameterError("network: pool_size must be >= 1");
        const int out_len = cur.length / s.pool_size;
        if (out_len < 1)
          throw ShapeError("network: maxpool output would be empty");
        cur = {cur.channels, out_len};
        break;
      }
      case LayerKind::Flatten:
        cur = {1, cur.channels * cur.length};
        break;
      case LayerKind::Dropout:
        if (s.dropout_rate < 0.0 || s.dropout_rate >= 1.0)
          throw ParameterError("network: dropout rate must be in [0, 1)");
        break;
      case LayerKind::Dense:
        if (cur.channels != 1)
          throw ShapeError("network: dense requires a flattened input");
        if (s.filter_count < 1)
          throw ConfigError("network: dense needs out units >= 1");
        net.last_dense_ = static_cast<int>(i);
        cur = {1, s.filter_count};
        break;
      case LayerKind::Softmax:
        if (i + 1 != config.layers.size())
          throw ConfigError("network: softmax allowed only as the last layer");
        break;
    }
    net.shapes_[i + 1] = cur;
  }
  if (net.last_dense_ < 0)
    throw ConfigError("network: stack needs a dense output layer");
  if (cur.channels != 1 || cur.length != config.class_count)
    throw ShapeError("network: output dimension does not match class count");
  return net;
}

int Network::flatten_dim() const { return shapes_[last_dense_].length; }

std::string Network::param_name(int layer, const char* what) const {
  return "L" + std::to_string(layer) + "." + what;
}

ParameterStore Network::init_params(uint64_t seed) const {
  Rng rng(seed);
  ParameterStore store;
  for (int i = 0; i < layer_count(); ++i) {
    const LayerSpec& s = config_.layers[i];
    const LayerShape& in = shapes_[i];
    switch (s.kind) {
      case LayerKind::InputNorm: {
        const int f = in.channels * in.length;
        Array gamma = Array::zeros({f});
        for (double& x : gamma.v) x = 1.0;
        Array var = gamma;
        store.add(param_name(i, "gamma"), gamma);
        store.add(param_name(i, "beta"), Array::zeros({f}));
        store.add(param_name(i, "mmean"), Array::zeros({f}));
        store.add(param_name(i, "mvar"), var);
        break;
      }
      case LayerKind::Conv1d: {
        Array k = Array::zeros({s.filter_count, in.channels, s.kernel_length});
        const double limit =
            std::sqrt(6.0 / (static_cast<double>(in.channels) * s.kernel_length));
        for (double& x : k.v) x = rng.uniform(-limit, limit);
        store.add(param_name(i, "kernel"), std::move(k));
        store.add(param_name(i, "bias"), Array::zeros({s.filter_count}));
        break;
      }
      case LayerKind::Dense: {
        Array w = Array::zeros({s.filter_count, in.length});
        const double limit = std::sqrt(6.0 / in.length);
        for (double& x : w.v) x = rng.uniform(-limit, limit);
        store.add(param_name(i, "weight"), std::move(w));
        store.add(param_name(i, "bias"), Array::zeros({s.filter_count}));
        break;
      }
      default:
        break;
    }
  }
  return store;
}

long long Network::trainable_count(const ParameterStore& params) const {
  long long n = 0;
  for (const auto& [name, a] : params.items) {
    if (is_trainable_name(name)) n += a.size();
  }
  return n;
}

namespace {

struct LayerCaches {
  std::vector<FeatureMap> acts;          // acts[i] = input to layer i
  std::vector<std::vector<int>> argmax;  // per layer
  std::vector<std::vector<uint8_t>> keep;  // dropout masks per layer
};

// Forward from layer `start` for one sample; fills caches when given.
std::vector<double> forward_from(const Network& net,
                                 const ParameterStore& params,
                                 FeatureMap input, int start, bool train,
                                 Rng* rng, const EngineOptions& opt,
                                 LayerCaches* cache, ForwardStats* stats) {
  const int L = net.layer_count();
  if (cache) {
    cache->acts.assign(L + 1, FeatureMap());
    cache->argmax.assign(L, {});
    cache->keep.assign(L, {});
  }
  FeatureMap act = std::move(input);
  std::vector<double> probs;
  for (int i = start; i < L; ++i) {
    if (cache) cache->acts[i] = act;
    const LayerSpec& s = net.config().layers[i];
    switch (s.kind) {
      case LayerKind::InputNorm:
        throw ConfigError("network: input-norm encountered mid-stack");
      case LayerKind::Conv1d: {
        const Array& k = params.at(net.param_name(i, "kernel"));
        const Array* b =
            opt.use_bias ? &params.at(net.param_name(i, "bias")) : nullptr;
        if (stats) {
          stats->prunable_weights_seen += k.size();
          for (double w : k.v) {
            const double a = std::abs(w);
            if (a != 1.0) stats->weights_all_pm1 = false;
            if (stats->min_abs_weight == 0.0 && stats->max_abs_weight == 0.0)
              stats->min_abs_weight = stats->max_abs_weight = a;
            stats->min_abs_weight = std::min(stats->min_abs_weight, a);
            stats->max_abs_weight = std::max(stats->max_abs_weight, a);
          }
        }
        act = conv1d_forward(act, k, b);
        break;
      }
      case LayerKind::Relu:
        relu_forward(act.v);
        break;
      case LayerKind::MaxPool: {
        MaxPoolResult r = maxpool1d_forward(act, s.pool_size);
        if (cache) cache->argmax[i] = std::move(r.argmax);
        act = std::move(r.output);
        break;
      }
      case LayerKind::Flatten: {
        FeatureMap flat(1, act.channels * act.length);
        flat.v = std::move(act.v);
        act = std::move(flat);
        break;
      }
      case LayerKind::Dropout: {
        if (train && s.dropout_rate > 0.0) {
          auto keep = dropout_mask(act.v.size(), s.dropout_rate, *rng);
          dropout_apply(act.v, keep, s.dropout_rate);
          if (cache) cache->keep[i] = std::move(keep);
        }
        break;
      }
      case LayerKind::Dense: {
        const Array& w = params.at(net.param_name(i, "weight"));
        const Array* b =
            opt.use_bias ? &params.at(net.param_name(i, "bias")) : nullptr;
        if (stats) {
          stats->prunable_weights_seen += w.size();
          for (double x : w.v) {
            const double a = std::abs(x);
            if (a != 1.0) stats->weights_all_pm1 = false;
            stats->min_abs_weight = std::min(stats->min_abs_weight, a);
            stats->max_abs_weight = std::max(stats->max_abs_weight, a);
          }
        }
        std::vector<double> out = dense_forward(act.v, w, b);
        FeatureMap fm(1, static_cast<int>(out.size()));
        fm.v = std::move(out);
        act = std::move(fm);
        break;
      }
      case LayerKind::Softmax:
        probs = softmax(act.v);
        break;
    }
  }
  if (cache) {
    FeatureMap fm(1, static_cast<int>(probs.size()));
    fm.v = probs;
    cache->acts[L] = std::move(fm);
  }
  return probs;
}

// Backward from the pre-softmax gradient down to layer `stop` (exclusive).
// Returns the gradient wrt the input of layer `stop`.
std::vector<double> backward_to(const Network& net,
                                const ParameterStore& params,
                                const LayerCaches& cache,
                                std::vector<double> d, int stop,
                                const EngineOptions& opt,
                                ParameterStore& grads) {
  const int L = net.layer_count();
  for (int i = L - 2; i >= stop; --i) {
    const LayerSpec& s = net.config().layers[i];
    switch (s.kind) {
      case LayerKind::Dense: {
        const Array& w = params.at(net.param_name(i, "weight"));
        DenseGrads g = dense_backward(d, cache.acts[i].v, w, opt.use_bias);
        Array& dw = grads.at(net.param_name(i, "weight"));
        for (size_t j = 0; j < dw.v.size(); ++j) dw.v[j] += g.d_weights.v[j];
        if (opt.use_bias) {
          Array& db = grads.at(net.param_name(i, "bias"));
          for (size_t j = 0; j < db.v.size(); ++j) db.v[j] += g.d_biases.v[j];
        }
        d = std::move(g.d_input);
        break;
      }
      case LayerKind::Dropout:
        if (!cache.keep[i].empty())
          dropout_apply(d, cache.keep[i], s.dropout_rate);
        break;
      case LayerKind::Flatten:
        break;  // pure reshape
      case LayerKind::MaxPool: {
        const FeatureMap& in = cache.acts[i];
        FeatureMap up(in.channels, static_cast<int>(d.size()) / in.channels);
        up.v = std::move(d);
        FeatureMap din =
            maxpool1d_backward(up, cache.argmax[i], in.channels, in.length);
        d = std::move(din.v);
        break;
      }
      case LayerKind::Relu:
        relu_backward(d, cache.acts[i].v);
        break;
      case LayerKind::Conv1d: {
        const Array& k = params.at(net.param_name(i, "kernel"));
        const FeatureMap& in = cache.acts[i];
        FeatureMap up(k.shape[0], in.length);
        up.v = std::move(d);
        Conv1dGrads g = conv1d_backward(up, in, k, opt.use_bias);
        Array& dk = grads.at(net.param_name(i, "kernel"));
        for (size_t j = 0; j < dk.v.size(); ++j) dk.v[j] += g.d_kernels.v[j];
        if (opt.use_bias) {
          Array& db = grads.at(net.param_name(i, "bias"));
          for (size_t j = 0; j < db.v.size(); ++j) db.v[j] += g.d_biases.v[j];
        }
        d = std::move(g.d_input.v);
        break;
      }
      case LayerKind::InputNorm:
      case LayerKind::Softmax:
        throw ConfigError("network: unexpected layer in backward walk");
    }
  }
  return d;
}

ParameterStore make_grad_store(const ParameterStore& params,
                               const EngineOptions& opt) {
  ParameterStore g;
  for (const auto& [name, a] : params.items) {
    if (!is_trainable_name(name)) continue;
    if (!opt.use_bias && name.size() > 5 &&
        name.compare(name.size() - 5, 5, ".bias") == 0)
      continue;
    g.add(name, Array::zeros(a.shape));
  }
  return g;
}

void check_window(const Network& net, std::span<const double> w) {
  const size_t want = static_cast<size_t>(net.config().input_channels) *
                      net.config().input_length;
  if (w.size() != want)
    throw ShapeError("network: window length " + std::to_string(w.size()) +
                     " does not match input size " + std::to_string(want));
}

std::string locate_nonfinite(const Network& net, const LayerCaches& cache,
                             int start) {
  for (int i = start; i <= net.layer_count(); ++i) {
    if (!cache.acts[i].finite()) {
      const int layer = i == 0 ? 0 : i - 1;
      return net.param_name(layer, "") +
             std::string(layer_kind_name(net.config().layers[layer].kind));
    }
  }
  return "loss";
}

// Shared train-mode batch pass.
double run_batch(const Network& net, ParameterStore& params,
                 const std::vector<std::span<const double>>& windows,
                 const std::vector<int>& labels, Rng& rng,
                 const EngineOptions& opt, bool want_grads,
                 ParameterStore* grads_out, bool update_moving) {
  if (windows.empty()) throw ParameterError("network: empty batch");
  if (windows.size() != labels.size())
    throw ParameterError("network: window/label count mismatch");
  for (const auto& w : windows) check_window(net, w);

  const int B = static_cast<int>(windows.size());
  const bool has_norm = net.config().layers[0].kind == LayerKind::InputNorm;
  const int start = has_norm ? 1 : 0;
  const int features =
      net.config().input_channels * net.config().input_length;

  ParameterStore grads;
  if (want_grads) grads = make_grad_store(params, opt);

  // Input normalization couples the batch; every other layer is per-sample.
  std::vector<double> x;
  BatchNormCache bn_cache;
  if (has_norm) {
    x.resize(static_cast<size_t>(B) * features);
    for (int b = 0; b < B; ++b)
      std::copy(windows[b].begin(), windows[b].end(),
                x.begin() + static_cast<size_t>(b) * features);
    batchnorm_forward_train(
        x, B, features, params.at(net.param_name(0, "gamma")),
        params.at(net.param_name(0, "beta")), net.config().norm_epsilon,
        bn_cache, params.find(net.param_name(0, "mmean")),
        params.find(net.param_name(0, "mvar")), net.config().norm_momentum,
        update_moving);
  }

  const Array* out_w =
      opt.l2_lambda != 0.0
          ? &params.at(net.param_name(net.last_dense_index(), "weight"))
          : nullptr;

  double loss_sum = 0.0;
  std::vector<double> d_norm_out;  // gradient wrt normalized batch
  if (want_grads && has_norm)
    d_norm_out.assign(static_cast<size_t>(B) * features, 0.0);

  for (int b = 0; b < B; ++b) {
    FeatureMap in(net.config().input_channels, net.config().input_length);
    if (has_norm) {
      std::copy(x.begin() + static_cast<size_t>(b) * features,
                x.begin() + static_cast<size_t>(b + 1) * features,
                in.v.begin());
    } else {
      std::copy(windows[b].begin(), windows[b].end(), in.v.begin());
    }
    LayerCaches cache;
    std::vector<double> probs =
        forward_from(net, params, std::move(in), start, /*train=*/true, &rng,
                     opt, want_grads ? &cache : nullptr, nullptr);
    if (!want_grads) {
      // still need probs for the loss
    }
    BceResult r = bce_loss(probs, labels[b], opt.l2_lambda, out_w);
    if (!std::isfinite(r.loss)) {
      if (want_grads)
        throw TrainingError("non-finite loss: first offending layer " +
                            locate_nonfinite(net, cache, start));
      throw TrainingError("non-finite loss");
    }
    loss_sum += r.loss;
    if (want_grads) {
      std::vector<double> d =
          backward_to(net, params, cache, std::move(r.d_logits), start, opt,
                      grads);
      if (has_norm)
        std::copy(d.begin(), d.end(),
                  d_norm_out.begin() + static_cast<size_t>(b) * features);
    }
  }

  if (want_grads) {
    if (has_norm) {
      BatchNormGrads g = batchnorm_backward(
          d_norm_out, bn_cache, params.at(net.param_name(0, "gamma")));
      Array& dg = grads.at(net.param_name(0, "gamma"));
      Array& db = grads.at(net.param_name(0, "beta"));
      for (size_t j = 0; j < dg.v.size(); ++j) {
        dg.v[j] += g.d_gamma.v[j];
        db.v[j] += g.d_beta.v[j];
      }
    }
    const double inv_b = 1.0 / B;
    for (auto& [name, a] : grads.items)
      for (double& v : a.v) v *= inv_b;
    // L2 term is counted once per sample and averaged, so its gradient
    // contributes at full strength.
    if (out_w) {
      Array& dw = grads.at(net.param_name(net.last_dense_index(), "weight"));
      for (size_t j = 0; j < dw.v.size(); ++j)
        dw.v[j] += 2.0 * opt.l2_lambda * out_w->v[j];
    }
    *grads_out = std::move(grads);
  }
  return loss_sum / B;
}

}  // namespace

std::vector<double> forward_infer(const Network& net,
                                  const ParameterStore& params,
                                  std::span<const double> window,
                                  const EngineOptions& opt,
                                  ForwardStats* stats) {
  check_window(net, window);
  const bool has_norm = net.config().layers[0].kind == LayerKind::InputNorm;
  FeatureMap in(net.config().input_channels, net.config().input_length);
  std::copy(window.begin(), window.end(), in.v.begin());
  int start = 0;
  if (has_norm) {
    const int features = static_cast<int>(in.v.size());
    batchnorm_forward_infer(in.v, 1, features,
                            params.at(net.param_name(0, "gamma")),
                            params.at(net.param_name(0, "beta")),
                            params.at(net.param_name(0, "mmean")),
                            params.at(net.param_name(0, "mvar")),
                            net.config().norm_epsilon);
    start = 1;
  }
  return forward_from(net, params, std::move(in), start, /*train=*/false,
                      nullptr, opt, nullptr, stats);
}

BatchResult train_batch(const Network& net, ParameterStore& params,
                        const std::vector<std::span<const double>>& windows,
                        const std::vector<int>& labels, Rng& rng,
                        const EngineOptions& opt, bool update_moving) {
  BatchResult r;
  r.mean_loss = run_batch(net, params, windows, labels, rng, opt,
                          /*want_grads=*/true, &r.grads, update_moving);
  return r;
}

double batch_loss(const Network& net, const ParameterStore& params,
                  const std::vector<std::span<const double>>& windows,
                  const std::vector<int>& labels, Rng& rng,
                  const EngineOptions& opt) {
  // const_cast is confined here: want_grads=false and update_moving=false
  // leave params untouched.
  return run_batch(net, const_cast<ParameterStore&>(params), windows, labels,
                   rng, opt, /*want_grads=*/false, nullptr,
                   /*update_moving=*/false);
}

}  // namespace somnnet
