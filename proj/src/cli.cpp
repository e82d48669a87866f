#include "somnnet/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "somnnet/binio.hpp"
#include "somnnet/checkpoint.hpp"
#include "somnnet/config.hpp"
#include "somnnet/costs.hpp"
#include "somnnet/dataset.hpp"
#include "somnnet/edf.hpp"
#include "somnnet/error.hpp"
#include "somnnet/gradcheck.hpp"
#include "somnnet/model.hpp"
#include "somnnet/windows.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace somnnet {

namespace {

// Recordings with known-unusable oximetry; skipped during preparation.
const char* kExcludedRecordings[] = {"ucddb008", "ucddb011", "ucddb013",
                                     "ucddb018"};

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const ParameterError*>(&e)) return "parameter";
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const TrainingError*>(&e)) return "training";
  return "internal";
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

bool is_excluded_recording(const std::string& stem) {
  const std::string low = lower(stem);
  for (const char* bad : kExcludedRecordings)
    if (low.find(bad) != std::string::npos) return true;
  return false;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string out_dir;
  int records = 3;
  long long seconds = 600;
  uint64_t seed = 1;
  double event_rate = 0.15;
  double artifact_rate = 0.0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  fs::create_directories(a.out_dir);
  for (int i = 1; i <= a.records; ++i) {
    std::ostringstream id;
    id << "synth-" << std::setw(2) << std::setfill('0') << i;
    SynthOptions opt;
    opt.seconds = a.seconds;
    opt.event_rate = a.event_rate;
    opt.artifact_rate = a.artifact_rate;
    const uint64_t rec_seed = Rng(a.seed).fork(static_cast<uint64_t>(i)).seed();
    const SynthRecord rec = synthesize_record(id.str(), rec_seed, opt);

    const EdfFile edf =
        make_edf(id.str(), "SpO2", "%", 0.0, 100.0, kSampleRate,
                 /*record_duration=*/1.0, rec.record.samples);
    const fs::path base = fs::path(a.out_dir) / id.str();
    write_edf(base.string() + ".edf", edf);
    bin::write_file(base.string() + ".ann",
                    format_annotations(rec.events));

    long long apneic = 0;
    for (uint8_t v : rec.record.labels) apneic += v;
    out << id.str() << ": " << a.seconds << " s, " << rec.events.size()
        << " events, " << apneic << " apneic seconds\n";
  }
  return 0;
}

// ---- prepare --------------------------------------------------------------

struct PrepareArgs {
  std::string in_dir;
  std::string out_dir;
  uint64_t seed = 1;
};

int cmd_prepare(const PrepareArgs& a, std::ostream& out) {
  std::vector<fs::path> edfs;
  if (!fs::is_directory(a.in_dir))
    throw IoError("not a directory: " + a.in_dir);
  for (const auto& entry : fs::directory_iterator(a.in_dir)) {
    if (!entry.is_regular_file()) continue;
    if (lower(entry.path().extension().string()) == ".edf")
      edfs.push_back(entry.path());
  }
  std::sort(edfs.begin(), edfs.end());
  if (edfs.empty()) throw IoError("no .edf files in " + a.in_dir);

  std::vector<WindowSample> all;
  json manifest;
  manifest["seed"] = a.seed;
  json records = json::array();
  long long total_dropped = 0;

  for (const fs::path& path : edfs) {
    const std::string stem = path.stem().string();
    if (is_excluded_recording(stem)) {
      out << "skipping " << path.filename().string()
          << ": excluded recording\n";
      json jr;
      jr["id"] = stem;
      jr["excluded"] = true;
      records.push_back(jr);
      continue;
    }
    const EdfFile edf = read_edf(path.string());
    const int sig_idx = edf.find_signal("spo2");
    if (sig_idx < 0)
      throw ConfigError("no SpO2 signal in " + path.filename().string());
    const EdfSignal& sig = edf.signals[static_cast<size_t>(sig_idx)];
    const double rate = sig.samples_per_record / edf.record_duration;
    if (rate != static_cast<double>(kSampleRate))
      throw ConfigError("signal '" + sig.label + "' in " +
                        path.filename().string() + " runs at " +
                        std::to_string(rate) + " Hz, want 8");
    const double total_s = edf.num_records * edf.record_duration;
    const long long seconds = static_cast<long long>(total_s);
    if (static_cast<double>(seconds) != total_s)
      throw ConfigError("recording " + path.filename().string() +
                        " does not span a whole number of seconds");

    fs::path ann_path = path;
    ann_path.replace_extension(".ann");
    if (!fs::exists(ann_path))
      throw IoError("annotation file missing: " + ann_path.string());
    const std::vector<AnnotationEvent> events =
        parse_annotations(bin::read_file(ann_path.string()));

    SpO2Record rec;
    rec.id = stem;
    rec.samples = sig.physical_samples();
    rec.labels = label_seconds(events, seconds);

    const std::vector<WindowSample> raw = extract_windows(rec);
    long long dropped = 0;
    std::vector<WindowSample> kept = artifact_filter(raw, &dropped);
    total_dropped += dropped;

    long long pos = 0;
    for (const WindowSample& w : kept) pos += w.label;
    out << stem << ": " << seconds << " s, " << raw.size() << " windows, "
        << dropped << " dropped as artifacts, " << pos << " apneic\n";
    json jr;
    jr["id"] = stem;
    jr["seconds"] = seconds;
    jr["windows"] = raw.size();
    jr["dropped"] = dropped;
    jr["apneic_windows"] = pos;
    records.push_back(jr);

    all.insert(all.end(), std::make_move_iterator(kept.begin()),
               std::make_move_iterator(kept.end()));
  }
  manifest["records"] = records;

  DatasetSplit split = split_and_oversample(all, a.seed);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  save_dataset((dir / "train.bin").string(), split.train);
  save_dataset((dir / "val.bin").string(), split.val);
  save_dataset((dir / "test.bin").string(), split.test);

  const SplitReport& r = split.report;
  json js;
  js["total_windows"] = r.total;
  js["dropped_artifacts"] = total_dropped;
  js["test"] = {{"windows", r.test},
                {"pos", r.test_pos},
                {"neg", r.test_neg}};
  js["val"] = {{"windows", r.val},
               {"oversampled", r.val_oversampled},
               {"pos", r.val_pos},
               {"neg", r.val_neg}};
  js["train"] = {{"windows", r.train},
                 {"oversampled", r.train_oversampled},
                 {"pos", r.train_pos},
                 {"neg", r.train_neg}};
  manifest["split"] = js;
  bin::write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");

  out << "windows: " << r.total << " (" << total_dropped
      << " dropped as artifacts before this count)\n"
      << "split: train " << r.train << " -> " << r.train_oversampled
      << " oversampled, val " << r.val << " -> " << r.val_oversampled
      << " oversampled, test " << r.test << "\n";
  return 0;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string data_dir;
  std::string out_path;
  std::string config_path;
  int epochs = 10;
  int batch = 128;
  uint64_t seed = 1;
  double lr = 1e-3;
  double l2 = 1e-3;
  double sparsity = -1.0;  // <0: no pruning
  long long prune_begin = 0;
  long long prune_end = -1;  // <0: half of the total steps
  bool binarize = false;
  bool quiet = false;
};

void apply_train_config(TrainArgs& a, const CLI::App* sub) {
  static const std::vector<std::string> keys = {
      "epochs", "batch",       "seed",      "lr",      "l2",
      "sparsity", "prune_begin", "prune_end", "binarize"};
  const auto cfg = load_config(a.config_path, keys);
  auto unset = [sub](const char* flag) {
    return sub->get_option(flag)->count() == 0;
  };
  auto get = [&cfg](const char* key) -> const std::string* {
    auto it = cfg.find(key);
    return it == cfg.end() ? nullptr : &it->second;
  };
  try {
    if (const auto* v = get("epochs"); v && unset("--epochs"))
      a.epochs = std::stoi(*v);
    if (const auto* v = get("batch"); v && unset("--batch"))
      a.batch = std::stoi(*v);
    if (const auto* v = get("seed"); v && unset("--seed"))
      a.seed = std::stoull(*v);
    if (const auto* v = get("lr"); v && unset("--lr")) a.lr = std::stod(*v);
    if (const auto* v = get("l2"); v && unset("--l2")) a.l2 = std::stod(*v);
    if (const auto* v = get("sparsity"); v && unset("--sparsity"))
      a.sparsity = std::stod(*v);
    if (const auto* v = get("prune_begin"); v && unset("--prune-begin"))
      a.prune_begin = std::stoll(*v);
    if (const auto* v = get("prune_end"); v && unset("--prune-end"))
      a.prune_end = std::stoll(*v);
    if (const auto* v = get("binarize"); v && unset("--binarize"))
      a.binarize = (*v == "1" || *v == "true" || *v == "yes");
  } catch (const std::invalid_argument&) {
    throw ConfigError("config: non-numeric value for a numeric key");
  } catch (const std::out_of_range&) {
    throw ConfigError("config: numeric value out of range");
  }
}

int cmd_train(TrainArgs& a, const CLI::App* sub, std::ostream& out) {
  if (!a.config_path.empty()) apply_train_config(a, sub);
  if (a.sparsity >= 0.0 && a.binarize)
    throw ParameterError("--sparsity and --binarize are mutually exclusive");

  const fs::path dir(a.data_dir);
  LabeledSet train = load_dataset((dir / "train.bin").string());
  LabeledSet val = load_dataset((dir / "val.bin").string());
  out << "train windows: " << train.size() << ", val windows: " << val.size()
      << "\n";

  const Network net = build_reference_network();
  ParameterStore params = net.init_params(a.seed);

  FitOptions opt;
  opt.epochs = a.epochs;
  opt.batch_size = a.batch;
  opt.seed = a.seed;
  opt.learning_rate = a.lr;
  opt.l2_lambda = a.l2;
  opt.log = a.quiet ? nullptr : &out;
  if (a.sparsity >= 0.0) {
    opt.prune = true;
    opt.schedule.final_sparsity = a.sparsity;
    opt.schedule.begin_step = a.prune_begin;
    const long long total =
        static_cast<long long>(a.epochs) *
        steps_per_epoch(static_cast<long long>(train.size()), a.batch);
    opt.schedule.end_step = a.prune_end >= 0 ? a.prune_end : total / 2;
  }
  opt.binarize = a.binarize;

  FitResult result = fit(net, std::move(params), train, val, opt);

  CheckpointMeta meta;
  meta.digest = net.config().digest();
  meta.epochs_run = static_cast<uint32_t>(a.epochs);
  meta.best_epoch = static_cast<uint32_t>(result.best_epoch);
  meta.best_val_accuracy = result.best_val_accuracy;
  meta.seed = a.seed;
  meta.binarized = result.binarized;
  meta.target_sparsity = opt.prune ? opt.schedule.final_sparsity : 0.0;

  ParameterStore saved = result.params;
  for (const auto& [name, arr] : result.latents.items) saved.add(name, arr);
  save_checkpoint(a.out_path, meta, saved);

  out << "best epoch: " << result.best_epoch << " (val accuracy "
      << std::fixed << std::setprecision(4) << result.best_val_accuracy
      << ")\n"
      << std::defaultfloat << "saved: " << a.out_path << "\n";
  CostRow row =
      store_cost_row(net, result.params, result.binarized, /*anchored=*/true);
  out << render_table({row});
  return 0;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  std::string data_dir;
  std::string model_path;
  std::string split = "test";
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  if (a.split != "test" && a.split != "val" && a.split != "train")
    throw ParameterError("--split must be test, val or train");
  const Network net = build_reference_network();
  const Checkpoint ckpt = load_checkpoint(a.model_path);
  require_digest(ckpt, net.config().digest());

  const LabeledSet data =
      load_dataset((fs::path(a.data_dir) / (a.split + ".bin")).string());
  EngineOptions eopt;
  eopt.use_bias = store_has_biases(net, ckpt.params);
  const MetricsReport m = evaluate(net, ckpt.params, data, eopt);
  out << "split: " << a.split << "\n" << format_metrics(m);
  return 0;
}

// ---- count ----------------------------------------------------------------

struct CountArgs {
  std::string model_path;
  double sparsity = -1.0;
  bool csv = false;
  bool layers = false;
};

int cmd_count(const CountArgs& a, std::ostream& out) {
  const Network net = build_reference_network();
  if (!a.model_path.empty()) {
    const Checkpoint ckpt = load_checkpoint(a.model_path);
    require_digest(ckpt, net.config().digest());
    CostRow row = store_cost_row(net, ckpt.params, ckpt.meta.binarized,
                                 /*anchored=*/true);
    out << (a.csv ? render_csv({row}) : render_table({row}));
    if (a.layers) {
      const bool use_bias = store_has_biases(net, ckpt.params);
      out << render_layer_table(count_ops_masked(net, ckpt.params, use_bias));
    }
    return 0;
  }
  if (a.sparsity >= 0.0) {
    const CostRow row = a.sparsity == 0.0 ? reference_dense_row()
                                          : reference_uniform_row(a.sparsity);
    out << (a.csv ? render_csv({row}) : render_table({row}));
    return 0;
  }
  const std::vector<CostRow> rows = reference_cost_table();
  out << (a.csv ? render_csv(rows) : render_table(rows));
  if (a.layers) out << render_layer_table(count_ops(net, /*use_bias=*/true));
  return 0;
}

// ---- predict --------------------------------------------------------------

struct PredictArgs {
  std::string model_path;
  std::string edf_path;
  std::string ann_path;
  std::string out_path;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const Network net = build_reference_network();
  const Checkpoint ckpt = load_checkpoint(a.model_path);
  require_digest(ckpt, net.config().digest());
  EngineOptions eopt;
  eopt.use_bias = store_has_biases(net, ckpt.params);

  const EdfFile edf = read_edf(a.edf_path);
  const int sig_idx = edf.find_signal("spo2");
  if (sig_idx < 0) throw ConfigError("no SpO2 signal in " + a.edf_path);
  const EdfSignal& sig = edf.signals[static_cast<size_t>(sig_idx)];
  if (sig.samples_per_record / edf.record_duration !=
      static_cast<double>(kSampleRate))
    throw ConfigError("signal '" + sig.label + "' is not sampled at 8 Hz");

  const long long seconds =
      static_cast<long long>(edf.num_records * edf.record_duration);
  SpO2Record rec;
  rec.id = fs::path(a.edf_path).stem().string();
  rec.samples = sig.physical_samples();

  std::vector<AnnotationEvent> events;
  const bool have_truth = !a.ann_path.empty();
  if (have_truth)
    events = parse_annotations(bin::read_file(a.ann_path));
  rec.labels = label_seconds(events, seconds);

  const std::vector<WindowSample> raw = extract_windows(rec);
  long long dropped = 0;
  const std::vector<WindowSample> kept = artifact_filter(raw, &dropped);

  std::ostringstream csv;
  csv << "second,p_apneic,predicted" << (have_truth ? ",label" : "") << "\n";
  MetricsReport m;
  for (const WindowSample& w : kept) {
    const std::vector<double> probs = forward_infer(net, ckpt.params, w.x, eopt);
    const int pred = predict_label(probs);
    csv << w.second << "," << std::fixed << std::setprecision(6) << probs[1]
        << std::defaultfloat << "," << pred;
    if (have_truth) {
      csv << "," << w.label;
      m.tally(pred, w.label);
    }
    csv << "\n";
  }
  csv << "# windows " << raw.size() << ", dropped " << dropped
      << " as artifacts\n";
  if (have_truth) {
    std::istringstream metrics(format_metrics(m));
    std::string line;
    while (std::getline(metrics, line)) csv << "# " << line << "\n";
  }

  if (a.out_path.empty())
    out << csv.str();
  else
    bin::write_file(a.out_path, csv.str());
  return 0;
}

// ---- gradcheck ------------------------------------------------------------

struct GradcheckArgs {
  uint64_t seed = 1;
  double tolerance = 1e-4;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  NetworkConfig cfg;
  cfg.input_channels = 1;
  cfg.input_length = 12;
  cfg.class_count = 2;
  cfg.layers = {
      LayerSpec::input_norm(),  LayerSpec::conv1d(2, 3),
      LayerSpec::relu(),        LayerSpec::maxpool(2),
      LayerSpec::conv1d(2, 3),  LayerSpec::relu(),
      LayerSpec::flatten(),     LayerSpec::dropout(0.2),
      LayerSpec::dense(2),      LayerSpec::softmax(),
  };
  const Network net = Network::build(cfg);
  // Differentiate at a generic point. Fresh init keeps biases exactly zero,
  // and a conv output whose receptive field is entirely relu-dead then sits
  // exactly on the next relu kink, where the loss has no two-sided slope and
  // finite differences report a spurious mismatch.
  ParameterStore params = net.init_params(a.seed);
  Rng jit = Rng(a.seed).fork(7);
  for (auto& [name, arr] : params.items) {
    if (!is_trainable_name(name)) continue;
    for (double& v : arr.v) v += jit.uniform(-0.02, 0.02);
  }

  Rng data_rng = Rng(a.seed).fork(42);
  std::vector<std::vector<double>> windows;
  std::vector<int> labels;
  for (int i = 0; i < 4; ++i) {
    std::vector<double> w(12);
    for (double& v : w) v = 90.0 + 8.0 * data_rng.uniform();
    windows.push_back(std::move(w));
    labels.push_back(static_cast<int>(data_rng.uniform_int(2)));
  }
  EngineOptions eopt;
  eopt.l2_lambda = 1e-3;
  // 1e-6 probe step keeps the difference quotient away from relu kinks and
  // pool ties that a wider step can straddle.
  const GradCheckReport rep =
      gradient_check(net, windows, labels, params, eopt, a.seed, 1e-6);
  out << "checked " << rep.values_checked << " values, max relative error "
      << std::scientific << std::setprecision(3) << rep.max_rel_error
      << std::defaultfloat << " (worst: " << rep.worst_param << "["
      << rep.worst_index << "])\n";
  return rep.max_rel_error < a.tolerance ? 0 : 1;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err) {
  CLI::App app{"per-second apnea detection from 8 Hz SpO2"};
  app.name("somnnet");
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* s_synth =
      app.add_subcommand("synth", "generate synthetic oximetry recordings");
  s_synth->add_option("--out", synth.out_dir, "output directory")->required();
  s_synth->add_option("--records", synth.records, "number of recordings")
      ->check(CLI::Range(1, 1000));
  s_synth->add_option("--seconds", synth.seconds, "length of each recording");
  s_synth->add_option("--seed", synth.seed, "random seed");
  s_synth->add_option("--event-rate", synth.event_rate,
                      "approximate fraction of time inside apnea events");
  s_synth->add_option("--artifact-rate", synth.artifact_rate,
                      "per-second probability of a sensor dropout");

  PrepareArgs prepare;
  CLI::App* s_prepare = app.add_subcommand(
      "prepare", "extract, filter, split and balance training windows");
  s_prepare->add_option("--in", prepare.in_dir, "directory of .edf/.ann pairs")
      ->required();
  s_prepare->add_option("--out", prepare.out_dir, "output directory")
      ->required();
  s_prepare->add_option("--seed", prepare.seed, "split/oversample seed");

  TrainArgs train;
  CLI::App* s_train = app.add_subcommand("train", "train the classifier");
  s_train->add_option("--data", train.data_dir, "prepared dataset directory")
      ->required();
  s_train->add_option("--out", train.out_path, "checkpoint path")->required();
  s_train->add_option("--config", train.config_path,
                      "key = value defaults (flags still win)");
  s_train->add_option("--epochs", train.epochs, "training epochs")
      ->check(CLI::Range(1, 1000));
  s_train->add_option("--batch", train.batch, "minibatch size")
      ->check(CLI::Range(1, 100000));
  s_train->add_option("--seed", train.seed, "random seed");
  s_train->add_option("--lr", train.lr, "learning rate");
  s_train->add_option("--l2", train.l2, "L2 penalty on the output weights");
  CLI::Option* o_sparsity = s_train->add_option(
      "--sparsity", train.sparsity, "prune weights to this final sparsity");
  s_train->add_option("--prune-begin", train.prune_begin,
                      "step where the sparsity ramp starts");
  s_train->add_option("--prune-end", train.prune_end,
                      "step where the ramp reaches the target "
                      "(default: half the run)");
  CLI::Option* o_binarize = s_train->add_flag(
      "--binarize", train.binarize, "train sign-valued weights, drop biases");
  o_sparsity->excludes(o_binarize);
  s_train->add_flag("--quiet", train.quiet, "suppress per-epoch log lines");

  EvaluateArgs evaluate;
  CLI::App* s_evaluate =
      app.add_subcommand("evaluate", "score a checkpoint on a dataset split");
  s_evaluate->add_option("--data", evaluate.data_dir,
                         "prepared dataset directory")
      ->required();
  s_evaluate->add_option("--model", evaluate.model_path, "checkpoint path")
      ->required();
  s_evaluate->add_option("--split", evaluate.split, "test, val or train");

  CountArgs count;
  CLI::App* s_count = app.add_subcommand(
      "count", "parameter, operation and energy accounting");
  s_count->add_option("--model", count.model_path,
                      "checkpoint to count (default: published table)");
  s_count->add_option("--sparsity", count.sparsity,
                      "single uniform-sparsity row");
  s_count->add_flag("--csv", count.csv, "CSV instead of a table");
  s_count->add_flag("--layers", count.layers, "append a per-layer breakdown");

  PredictArgs predict;
  CLI::App* s_predict = app.add_subcommand(
      "predict", "per-second predictions for one recording");
  s_predict->add_option("--model", predict.model_path, "checkpoint path")
      ->required();
  s_predict->add_option("--edf", predict.edf_path, "recording to score")
      ->required();
  s_predict->add_option("--ann", predict.ann_path,
                        "scored events; adds labels and metrics");
  s_predict->add_option("--out", predict.out_path,
                        "CSV destination (default stdout)");

  GradcheckArgs gradcheck;
  CLI::App* s_gradcheck = app.add_subcommand(
      "gradcheck", "finite-difference check of the training gradients");
  s_gradcheck->add_option("--seed", gradcheck.seed, "random seed");
  s_gradcheck->add_option("--tolerance", gradcheck.tolerance,
                          "max relative error accepted");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (app.got_subcommand(s_synth)) return cmd_synth(synth, out);
    if (app.got_subcommand(s_prepare)) return cmd_prepare(prepare, out);
    if (app.got_subcommand(s_train)) return cmd_train(train, s_train, out);
    if (app.got_subcommand(s_evaluate)) return cmd_evaluate(evaluate, out);
    if (app.got_subcommand(s_count)) return cmd_count(count, out);
    if (app.got_subcommand(s_predict)) return cmd_predict(predict, out);
    if (app.got_subcommand(s_gradcheck)) return cmd_gradcheck(gradcheck, out);
  } catch (const std::exception& e) {
    err << "error: " << error_kind(e) << ": " << e.what() << "\n";
    return 1;
  }
  err << "error: internal: no subcommand dispatched\n";
  return 1;
}

}  // namespace somnnet
