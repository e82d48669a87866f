#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "somnnet/checkpoint.hpp"
#include "somnnet/error.hpp"
#include "somnnet/model.hpp"
#include "somnnet/rng.hpp"

using namespace somnnet;

namespace {

// Tiny but learnable task: windows around 96 are negative, dipped windows
// around 88 are positive. Mirrors the saturation-dip structure of the real
// signal closely enough for a couple of epochs to separate.
LabeledSet make_toy_set(uint64_t seed, int count) {
  LabeledSet s;
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const int label = static_cast<int>(rng.uniform_int(2));
    const double base = label ? 88.0 : 96.5;
    std::vector<double> w(88);
    for (double& v : w) v = base + rng.normal() * 0.6;
    s.x.push_back(std::move(w));
    s.y.push_back(label);
  }
  return s;
}

}  // namespace

TEST_CASE("the reference stack has the published shape chain") {
  Network net = build_reference_network();
  REQUIRE(net.layer_count() == 13);

  const auto expect = [&](int layer, int channels, int length) {
    CHECK(net.shape(layer).channels == channels);
    CHECK(net.shape(layer).length == length);
  };
  expect(0, 1, 88);   // into input-norm
  expect(1, 1, 88);   // into conv 6x25
  expect(2, 6, 88);   // into relu
  expect(3, 6, 88);   // into conv 50x10
  expect(4, 50, 88);  // into relu
  expect(5, 50, 88);  // into pool
  expect(6, 50, 44);  // into conv 30x15
  expect(7, 30, 44);  // into relu
  expect(8, 30, 44);  // into pool
  expect(9, 30, 22);  // into flatten
  CHECK(net.flatten_dim() == 660);
  CHECK(net.output_dim() == 2);
}

TEST_CASE("the config digest tracks every architectural knob") {
  const NetworkConfig base = reference_config();
  const uint64_t d = base.digest();
  CHECK(d == reference_config().digest());  // stable across calls

  NetworkConfig changed = base;
  changed.input_length = 96;
  CHECK(changed.digest() != d);

  changed = base;
  changed.layers[1].filter_count = 7;
  CHECK(changed.digest() != d);

  changed = base;
  changed.norm_epsilon = 1e-2;
  CHECK(changed.digest() != d);
}

TEST_CASE("parameter initialization is seeded and shaped") {
  Network net = build_reference_network();
  const ParameterStore a = net.init_params(7);
  const ParameterStore b = net.init_params(7);
  const ParameterStore c = net.init_params(8);
  REQUIRE(a.count() == b.count());
  bool any_diff = false;
  for (size_t i = 0; i < a.items.size(); ++i) {
    CHECK(a.items[i].first == b.items[i].first);
    CHECK(a.items[i].second.v == b.items[i].second.v);
    if (a.items[i].second.v != c.items[i].second.v) any_diff = true;
  }
  CHECK(any_diff);

  // He-uniform bound for the first conv: fan_in = 1 * 25.
  const Array& k1 = a.at("L1.kernel");
  const double bound = std::sqrt(6.0 / 25.0);
  for (double v : k1.v) {
    CHECK(std::abs(v) <= bound);
  }
  for (double v : a.at("L1.bias").v) CHECK(v == 0.0);
  for (double v : a.at("L0.gamma").v) CHECK(v == 1.0);
  for (double v : a.at("L0.mvar").v) CHECK(v == 1.0);
}

TEST_CASE("prediction breaks ties toward the non-apneic class") {
  CHECK(predict_label(std::vector<double>{0.5, 0.5}) == 0);
  CHECK(predict_label(std::vector<double>{0.2, 0.8}) == 1);
  CHECK(predict_label(std::vector<double>{0.8, 0.2}) == 0);
}

TEST_CASE("steps per epoch folds a trailing singleton") {
  CHECK(steps_per_epoch(10, 5) == 2);
  CHECK(steps_per_epoch(11, 5) == 2);   // 5+5+1: the 1 joins the second batch
  CHECK(steps_per_epoch(12, 5) == 3);   // 5+5+2 stays three batches
  CHECK(steps_per_epoch(6, 5) == 1);    // 5+1 folds to one batch of 6
  CHECK(steps_per_epoch(5, 5) == 1);
  CHECK(steps_per_epoch(1, 5) == 1);    // nothing earlier to fold into
  CHECK(steps_per_epoch(128, 128) == 1);
  CHECK(steps_per_epoch(129, 128) == 1);
  CHECK(steps_per_epoch(130, 128) == 2);
}

TEST_CASE("fit is deterministic and selects the earliest best epoch") {
  Network net = build_reference_network();
  const LabeledSet train = make_toy_set(100, 64);
  const LabeledSet val = make_toy_set(200, 24);

  FitOptions opt;
  opt.epochs = 2;
  opt.batch_size = 16;
  opt.seed = 5;

  const FitResult r1 = fit(net, net.init_params(5), train, val, opt);
  const FitResult r2 = fit(net, net.init_params(5), train, val, opt);
  REQUIRE(r1.params.count() == r2.params.count());
  for (size_t i = 0; i < r1.params.items.size(); ++i)
    CHECK(r1.params.items[i].second.v == r2.params.items[i].second.v);
  CHECK(r1.best_epoch == r2.best_epoch);
  CHECK(r1.best_val_accuracy == r2.best_val_accuracy);
  CHECK(r1.steps == steps_per_epoch(64, 16) * 2);
  REQUIRE(r1.epochs.size() == 2);
  CHECK(r1.epochs[0].epoch == 1);

  // The toy task separates immediately; if both epochs tie, the earliest
  // must have been kept.
  if (r1.epochs[0].val.accuracy() == r1.epochs[1].val.accuracy())
    CHECK(r1.best_epoch == 1);
}

TEST_CASE("fit validates its inputs") {
  Network net = build_reference_network();
  const LabeledSet train = make_toy_set(1, 8);
  const LabeledSet val = make_toy_set(2, 4);
  FitOptions opt;
  opt.epochs = 1;

  LabeledSet tiny;
  tiny.x.push_back(std::vector<double>(88, 95.0));
  tiny.y.push_back(0);
  CHECK_THROWS_AS(fit(net, net.init_params(1), tiny, val, opt),
                  ParameterError);

  LabeledSet empty_val;
  CHECK_THROWS_AS(fit(net, net.init_params(1), train, empty_val, opt),
                  ParameterError);

  FitOptions both = opt;
  both.prune = true;
  both.schedule.final_sparsity = 0.5;
  both.schedule.begin_step = 0;
  both.schedule.end_step = 4;
  both.binarize = true;
  CHECK_THROWS_AS(fit(net, net.init_params(1), train, val, both),
                  ParameterError);
}

TEST_CASE("training separates the toy task and evaluate matches a hand tally") {
  Network net = build_reference_network();
  const LabeledSet train = make_toy_set(300, 96);
  const LabeledSet val = make_toy_set(301, 32);
  const LabeledSet test = make_toy_set(302, 40);

  FitOptions opt;
  opt.epochs = 3;
  opt.batch_size = 16;
  opt.seed = 9;
  const FitResult r = fit(net, net.init_params(9), train, val, opt);
  CHECK(r.best_val_accuracy >= 0.9);

  const MetricsReport m = evaluate(net, r.params, test);
  MetricsReport hand;
  for (size_t i = 0; i < test.size(); ++i) {
    const std::vector<double> p = forward_infer(net, r.params, test.x[i]);
    hand.tally(predict_label(p), test.y[i]);
  }
  CHECK(m.tp == hand.tp);
  CHECK(m.tn == hand.tn);
  CHECK(m.fp == hand.fp);
  CHECK(m.fn == hand.fn);
  CHECK(m.accuracy() >= 0.9);
  CHECK(m.total() == 40);
}

TEST_CASE("metrics format reports absent rates as n/a") {
  MetricsReport m;
  m.tn = 5;
  m.fp = 1;
  const std::string s = format_metrics(m);
  CHECK(s.find("n/a") != std::string::npos);        // no positives seen
  CHECK(s.find("specificity") != std::string::npos);
  CHECK(s.find("0.8333") != std::string::npos);     // 5/6 accuracy

  MetricsReport empty;
  CHECK(!empty.has_accuracy());
  CHECK(format_metrics(empty).find("n/a") != std::string::npos);
}

TEST_CASE("checkpoints round-trip parameters and metadata exactly") {
  Network net = build_reference_network();
  const ParameterStore params = net.init_params(3);

  CheckpointMeta meta;
  meta.digest = net.config().digest();
  meta.epochs_run = 4;
  meta.best_epoch = 2;
  meta.best_val_accuracy = 0.9375;
  meta.seed = 3;
  meta.binarized = false;
  meta.target_sparsity = 0.5;

  const std::string path = "/tmp/somnnet-test-model.ckpt";
  save_checkpoint(path, meta, params);
  const Checkpoint ck = load_checkpoint(path);

  CHECK(ck.meta.digest == meta.digest);
  CHECK(ck.meta.epochs_run == 4);
  CHECK(ck.meta.best_epoch == 2);
  CHECK(ck.meta.best_val_accuracy == meta.best_val_accuracy);
  CHECK(ck.meta.binarized == false);
  CHECK(ck.meta.target_sparsity == 0.5);
  REQUIRE(ck.params.count() == params.count());
  for (size_t i = 0; i < params.items.size(); ++i) {
    CHECK(ck.params.items[i].first == params.items[i].first);
    const Array& a = params.items[i].second;
    const Array& b = ck.params.items[i].second;
    REQUIRE(a.shape == b.shape);
    for (size_t j = 0; j < a.v.size(); ++j)
      CHECK(b.v[j] == static_cast<double>(static_cast<float>(a.v[j])));
  }

  // Saving the loaded state reproduces the file byte for byte.
  const std::string good = encode_checkpoint(meta, params);
  CHECK(encode_checkpoint(ck.meta, ck.params) == good);

  CHECK_NOTHROW(require_digest(ck, net.config().digest()));
  CHECK_THROWS_AS(require_digest(ck, net.config().digest() + 1), ConfigError);

  // Truncated and corrupted files fail loudly.
  CHECK_THROWS_AS(decode_checkpoint(good.substr(0, good.size() / 2)),
                  ParseError);
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad_magic), ParseError);
  CHECK_THROWS_AS(decode_checkpoint(good + "x"), ParseError);
}
