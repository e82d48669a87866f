#include "somnnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <span>

#include "somnnet/error.hpp"

namespace somnnet {

NetworkConfig reference_config() {
  NetworkConfig c;
  c.input_channels = 1;
  c.input_length = 88;
  c.class_count = 2;
  c.layers = {
      LayerSpec::input_norm(),   LayerSpec::conv1d(6, 25),
      LayerSpec::relu(),         LayerSpec::conv1d(50, 10),
      LayerSpec::relu(),         LayerSpec::maxpool(2),
      LayerSpec::conv1d(30, 15), LayerSpec::relu(),
      LayerSpec::maxpool(2),     LayerSpec::flatten(),
      LayerSpec::dropout(0.25),  LayerSpec::dense(2),
      LayerSpec::softmax(),
  };
  return c;
}

Network build_reference_network() { return Network::build(reference_config()); }

int predict_label(std::span<const double> probs) {
  if (probs.empty()) throw ParameterError("predict: empty probability vector");
  int best = 0;
  for (int j = 1; j < static_cast<int>(probs.size()); ++j)
    if (probs[j] > probs[best]) best = j;
  return best;
}

bool store_has_biases(const Network& net, const ParameterStore& params) {
  return params.has(net.param_name(net.last_dense_index(), "bias"));
}

long long steps_per_epoch(long long n, int batch_size) {
  if (n <= 0 || batch_size <= 0)
    throw ParameterError("steps_per_epoch: need n > 0 and batch_size > 0");
  long long nb = (n + batch_size - 1) / batch_size;
  if (nb >= 2 && n % batch_size == 1) --nb;
  return nb;
}

MetricsReport evaluate(const Network& net, const ParameterStore& params,
                       const LabeledSet& data, const EngineOptions& eopt) {
  if (data.x.size() != data.y.size())
    throw ParameterError("evaluate: window/label count mismatch");
  MetricsReport m;
  for (size_t i = 0; i < data.x.size(); ++i) {
    const std::vector<double> probs =
        forward_infer(net, params, data.x[i], eopt);
    m.tally(predict_label(probs), data.y[i]);
  }
  return m;
}

namespace {

std::vector<std::string> collect_binarize_names(const Network& net,
                                                const ParameterStore& params,
                                                const FitOptions& opt) {
  if (!opt.binarize_only.empty()) {
    for (const std::string& name : opt.binarize_only) {
      if (!params.has(name))
        throw ParameterError("binarize: no such array: " + name);
      if (!is_prunable_name(name))
        throw ParameterError("binarize: " + name + " is not a weight array");
    }
    return opt.binarize_only;
  }
  std::vector<std::string> names;
  for (const auto& [name, a] : params.items) {
    (void)a;
    if (is_prunable_name(name)) names.push_back(name);
  }
  (void)net;
  return names;
}

void clip_named(ParameterStore& store, const std::vector<std::string>& names) {
  for (const std::string& name : names)
    for (double& x : store.at(name).v) x = std::clamp(x, -1.0, 1.0);
}

void sign_named(ParameterStore& store, const std::vector<std::string>& names) {
  for (const std::string& name : names)
    for (double& x : store.at(name).v) x = sign_pm1(x);
}

}  // namespace

FitResult fit(const Network& net, ParameterStore params,
              const LabeledSet& train, const LabeledSet& val,
              const FitOptions& opt) {
  if (train.x.size() != train.y.size() || val.x.size() != val.y.size())
    throw ParameterError("fit: window/label count mismatch");
  if (train.size() < 2)
    throw ParameterError("fit: need at least 2 training windows");
  if (val.size() == 0)
    throw ParameterError("fit: need a non-empty validation set");
  if (opt.epochs < 1 || opt.batch_size < 1)
    throw ParameterError("fit: epochs and batch_size must be >= 1");
  if (opt.prune && opt.binarize)
    throw ParameterError("fit: pruning and binarization are exclusive modes");
  if (opt.prune) opt.schedule.validate();

  const bool bin = opt.binarize;
  EngineOptions eopt;
  eopt.use_bias = !bin;
  eopt.l2_lambda = opt.l2_lambda;

  std::vector<std::string> bin_names;
  if (bin) {
    bin_names = collect_binarize_names(net, params, opt);
    // Sign weights carry no scale, so biases come out too.
    std::vector<std::string> bias_names;
    for (const auto& [name, a] : params.items) {
      (void)a;
      if (name.size() > 5 && name.compare(name.size() - 5, 5, ".bias") == 0)
        bias_names.push_back(name);
    }
    for (const std::string& name : bias_names) params.erase(name);
    clip_named(params, bin_names);
  }

  // Prime the inference normalization stats with the population statistics
  // of the training inputs; the moving average then tracks drift from
  // there. Left at their zero-mean unit-var init they would need thousands
  // of steps to catch up with momentum 0.99, and until then every
  // inference-mode forward pass is miscalibrated.
  if (net.config().layers[0].kind == LayerKind::InputNorm) {
    Array& mmean = params.at(net.param_name(0, "mmean"));
    Array& mvar = params.at(net.param_name(0, "mvar"));
    const size_t features = mmean.v.size();
    std::fill(mmean.v.begin(), mmean.v.end(), 0.0);
    for (const auto& w : train.x) {
      if (w.size() != features)
        throw ShapeError("fit: window length does not match the input size");
      for (size_t j = 0; j < features; ++j) mmean.v[j] += w[j];
    }
    const double inv_n = 1.0 / static_cast<double>(train.size());
    for (double& m : mmean.v) m *= inv_n;
    std::fill(mvar.v.begin(), mvar.v.end(), 0.0);
    for (const auto& w : train.x)
      for (size_t j = 0; j < features; ++j) {
        const double d = w[j] - mmean.v[j];
        mvar.v[j] += d * d;
      }
    for (double& v : mvar.v) v *= inv_n;
  }

  // `params` is the master store: latent weights when binarizing, live
  // weights otherwise. The forward pass always sees deployable values.
  AdamState adam = AdamState::init_for(params, opt.learning_rate);
  Rng drop_rng = Rng(opt.seed).fork(7);

  const long long per_epoch =
      steps_per_epoch(static_cast<long long>(train.size()), opt.batch_size);

  FitResult result;
  result.pruned = opt.prune;
  result.binarized = bin;

  std::vector<size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), size_t{0});

  SparsityMask mask;
  long long step = 0;
  bool have_best = false;

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    Rng shuffle_rng = Rng(opt.seed).fork(1000 + static_cast<uint64_t>(epoch));
    shuffle_indices(idx, shuffle_rng);

    double loss_sum = 0.0;
    size_t cursor = 0;
    for (long long b = 0; b < per_epoch; ++b) {
      size_t take = std::min(static_cast<size_t>(opt.batch_size),
                             train.size() - cursor);
      // Fold a trailing singleton into this batch.
      if (b + 1 == per_epoch) take = train.size() - cursor;
      std::vector<std::span<const double>> windows;
      std::vector<int> labels;
      windows.reserve(take);
      labels.reserve(take);
      for (size_t j = 0; j < take; ++j) {
        windows.emplace_back(train.x[idx[cursor + j]]);
        labels.push_back(train.y[idx[cursor + j]]);
      }
      cursor += take;

      if (opt.prune) {
        mask = compute_prune_mask(params, opt.schedule.sparsity_at(step));
        apply_mask(params, mask);
      }

      ParameterStore live;
      ParameterStore* fwd = &params;
      if (bin) {
        live = params;
        sign_named(live, bin_names);
        fwd = &live;
      }
      BatchResult r = train_batch(net, *fwd, windows, labels, drop_rng, eopt,
                                  /*update_moving=*/true);
      if (bin && net.config().layers[0].kind == LayerKind::InputNorm) {
        // Moving stats advanced in the live copy; carry them back.
        params.at(net.param_name(0, "mmean")) =
            live.at(net.param_name(0, "mmean"));
        params.at(net.param_name(0, "mvar")) =
            live.at(net.param_name(0, "mvar"));
      }
      if (opt.prune) apply_mask(r.grads, mask);
      adam_step(params, r.grads, adam);
      if (opt.prune) apply_mask(params, mask);
      if (bin) clip_named(params, bin_names);

      loss_sum += r.mean_loss;
      ++step;
    }

    ParameterStore deploy = params;
    if (bin) sign_named(deploy, bin_names);

    EpochStats es;
    es.epoch = epoch + 1;
    es.train_loss = loss_sum / static_cast<double>(per_epoch);
    es.sparsity = opt.prune ? mask.target_sparsity : 0.0;
    es.val = evaluate(net, deploy, val, eopt);
    result.epochs.push_back(es);

    if (opt.log) {
      std::ostream& os = *opt.log;
      os << "epoch " << es.epoch << "/" << opt.epochs << "  loss "
         << std::fixed << std::setprecision(4) << es.train_loss
         << "  val_acc " << std::setprecision(4)
         << (es.val.has_accuracy() ? es.val.accuracy() : 0.0);
      if (opt.prune)
        os << "  sparsity " << std::setprecision(3) << es.sparsity;
      os << "\n" << std::defaultfloat;
    }

    const bool eligible =
        !opt.prune || mask.target_sparsity == opt.schedule.final_sparsity;
    const double acc = es.val.has_accuracy() ? es.val.accuracy() : 0.0;
    const bool snapshot =
        (eligible && (!have_best || acc > result.best_val_accuracy)) ||
        (epoch + 1 == opt.epochs && !have_best);
    if (snapshot) {
      have_best = eligible;
      result.best_epoch = es.epoch;
      result.best_val_accuracy = acc;
      result.params = deploy;
      result.mask = mask;
      result.latents = ParameterStore{};
      if (bin)
        for (const std::string& name : bin_names)
          result.latents.add(name + ".latent", params.at(name));
    }
  }
  result.steps = step;
  return result;
}

}  // namespace somnnet
