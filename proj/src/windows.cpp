#include "somnnet/windows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "somnnet/error.hpp"

namespace somnnet {

std::vector<WindowSample> extract_windows(const SpO2Record& rec) {
  const long long seconds = static_cast<long long>(rec.labels.size());
  if (rec.samples.size() !=
      static_cast<size_t>(seconds) * static_cast<size_t>(kSampleRate))
    throw ParameterError("windows: record '" + rec.id + "' has " +
                         std::to_string(rec.samples.size()) +
                         " samples for " + std::to_string(seconds) +
                         " labeled seconds; want exactly 8 per second");
  std::vector<WindowSample> out;
  if (seconds < 11) return out;  // too short to cover one window
  out.reserve(static_cast<size_t>(seconds - 10));
  for (long long t = 1; t <= seconds - 10; ++t) {
    WindowSample w;
    const size_t start = static_cast<size_t>(kSampleRate) *
                         static_cast<size_t>(t - 1);
    w.x.assign(rec.samples.begin() + start,
               rec.samples.begin() + start + kWindowLen);
    w.label = rec.labels[static_cast<size_t>(t - 1)] ? 1 : 0;
    w.record_id = rec.id;
    w.second = t;
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<WindowSample> artifact_filter(const std::vector<WindowSample>& in,
                                          long long* dropped_count) {
  std::vector<WindowSample> kept;
  kept.reserve(in.size());
  long long dropped = 0;
  for (const WindowSample& w : in) {
    const bool bad =
        std::any_of(w.x.begin(), w.x.end(), [](double v) { return v < 50.0; });
    if (bad)
      ++dropped;
    else
      kept.push_back(w);
  }
  if (dropped_count) *dropped_count = dropped;
  return kept;
}

namespace {

void oversample_balance(LabeledSet& set, Rng rng, size_t* final_count,
                        long long* pos, long long* neg) {
  std::vector<size_t> ones, zeros;
  for (size_t i = 0; i < set.y.size(); ++i)
    (set.y[i] == 1 ? ones : zeros).push_back(i);
  *pos = static_cast<long long>(ones.size());
  *neg = static_cast<long long>(zeros.size());
  if (!ones.empty() && !zeros.empty() && ones.size() != zeros.size()) {
    std::vector<size_t>& minority = ones.size() < zeros.size() ? ones : zeros;
    const size_t maj = std::max(ones.size(), zeros.size());
    const size_t min_n = minority.size();
    const size_t copies = maj / min_n - 1;
    const size_t remainder = maj % min_n;
    std::vector<size_t> extra;
    for (size_t c = 0; c < copies; ++c)
      extra.insert(extra.end(), minority.begin(), minority.end());
    std::vector<size_t> pool = minority;
    shuffle_indices(pool, rng);
    extra.insert(extra.end(), pool.begin(), pool.begin() + remainder);
    for (size_t i : extra) {
      set.x.push_back(set.x[i]);
      set.y.push_back(set.y[i]);
    }
    *pos = 0;
    *neg = 0;
    for (int y : set.y) (y == 1 ? *pos : *neg) += 1;
  }
  *final_count = set.size();
}

}  // namespace

DatasetSplit split_and_oversample(const std::vector<WindowSample>& windows,
                                  uint64_t seed) {
  if (windows.size() < 10)
    throw ParameterError("split: need at least 10 windows, have " +
                         std::to_string(windows.size()));
  long long pos = 0;
  for (const WindowSample& w : windows) pos += w.label;
  if (pos == 0 || pos == static_cast<long long>(windows.size()))
    throw ParameterError("split: need both classes present");

  std::vector<size_t> idx(windows.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  Rng split_rng = Rng(seed).fork(2);
  shuffle_indices(idx, split_rng);

  const size_t tenth = windows.size() / 10;
  DatasetSplit ds;
  ds.report.total = windows.size();
  auto push = [&windows](LabeledSet& set, size_t i) {
    set.x.push_back(windows[i].x);
    set.y.push_back(windows[i].label);
  };
  for (size_t i = 0; i < idx.size(); ++i) {
    if (i < tenth)
      push(ds.test, idx[i]);
    else if (i < 2 * tenth)
      push(ds.val, idx[i]);
    else
      push(ds.train, idx[i]);
  }
  ds.report.test = ds.test.size();
  ds.report.val = ds.val.size();
  ds.report.train = ds.train.size();
  for (int y : ds.test.y) (y == 1 ? ds.report.test_pos : ds.report.test_neg) += 1;

  oversample_balance(ds.train, Rng(seed).fork(3),
                     &ds.report.train_oversampled, &ds.report.train_pos,
                     &ds.report.train_neg);
  oversample_balance(ds.val, Rng(seed).fork(4), &ds.report.val_oversampled,
                     &ds.report.val_pos, &ds.report.val_neg);
  return ds;
}

SynthRecord synthesize_record(const std::string& id, uint64_t seed,
                              const SynthOptions& opt) {
  if (opt.seconds < 1)
    throw ParameterError("synth: seconds must be >= 1");
  if (opt.event_rate < 0.0 || opt.event_rate > 0.9)
    throw ParameterError("synth: event_rate must be in [0, 0.9]");
  if (opt.artifact_rate < 0.0 || opt.artifact_rate > 1.0)
    throw ParameterError("synth: artifact_rate must be in [0, 1]");

  Rng rng(seed);
  SynthRecord out;
  out.record.id = id;
  const long long S = opt.seconds;
  const size_t N = static_cast<size_t>(S) * kSampleRate;

  const double baseline = 96.5 + 1.5 * rng.uniform();

  // Event plan: alternating gaps and dips whose mean duty cycle matches
  // event_rate.
  struct PlannedEvent {
    long long onset;
    long long len;
    double depth;
  };
  std::vector<PlannedEvent> plan;
  if (opt.event_rate > 0.0) {
    long long t = 10 + static_cast<long long>(rng.uniform_int(20));
    while (true) {
      const long long len = 10 + static_cast<long long>(rng.uniform_int(21));
      if (t + len + 5 > S) break;
      const double depth = 6.0 + 6.0 * rng.uniform();
      plan.push_back({t, len, depth});
      out.events.push_back({static_cast<double>(t), static_cast<double>(len),
                            "APNEA-O"});
      const double mean_gap =
          static_cast<double>(len) * (1.0 - opt.event_rate) / opt.event_rate;
      long long gap =
          std::llround(mean_gap * (0.5 + rng.uniform()));
      if (gap < 5) gap = 5;
      t += len + gap;
    }
  }

  out.record.samples.resize(N);
  for (size_t i = 0; i < N; ++i) {
    const double time = static_cast<double>(i) / kSampleRate;
    constexpr double tau = 2.0 * std::numbers::pi;
    double x = baseline + 0.4 * std::sin(tau * time / 90.0) +
               0.15 * std::sin(tau * time / 37.0 + 1.3) +
               0.1 * rng.normal();
    out.record.samples[i] = x;
  }
  for (const PlannedEvent& e : plan) {
    const double onset = static_cast<double>(e.onset);
    const double end = onset + static_cast<double>(e.len);
    for (long long i = e.onset * kSampleRate; i < static_cast<long long>(N);
         ++i) {
      const double time = static_cast<double>(i) / kSampleRate;
      if (time >= end) break;
      // Sharp-edged dip: two-second ramps with a full-depth plateau.
      const double factor =
          std::min({1.0, (time - onset) / 2.0, (end - time) / 2.0});
      out.record.samples[static_cast<size_t>(i)] -= e.depth * factor;
    }
  }
  if (opt.artifact_rate > 0.0) {
    for (long long s = 0; s < S; ++s) {
      if (rng.uniform() >= opt.artifact_rate) continue;
      const size_t start = static_cast<size_t>(s) * kSampleRate +
                           rng.uniform_int(5);
      const size_t len = 2 + rng.uniform_int(3);
      const double level = 20.0 + 20.0 * rng.uniform();
      for (size_t i = start; i < start + len && i < N; ++i)
        out.record.samples[i] = level;
    }
  }
  for (double& x : out.record.samples) x = std::clamp(x, 0.0, 100.0);

  out.record.labels = label_seconds(out.events, S);
  return out;
}

}  // namespace somnnet
