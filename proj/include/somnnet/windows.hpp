#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "somnnet/annotations.hpp"
#include "somnnet/model.hpp"
#include "somnnet/rng.hpp"

namespace somnnet {

// An oxygen-saturation recording resampled to 8 Hz with one label per
// second. samples.size() must equal 8 * labels.size().
struct SpO2Record {
  std::string id;
  std::vector<double> samples;
  std::vector<uint8_t> labels;
};

inline constexpr int kSampleRate = 8;
inline constexpr int kWindowLen = 88;  // 11 s of signal

struct WindowSample {
  std::vector<double> x;  // kWindowLen values
  int label = 0;
  std::string record_id;
  long long second = 0;  // 1-based labeled second
};

// One window per labeled second t in [1, S-10]: samples
// [8(t-1), 8(t-1)+88), i.e. the labeled second plus ten seconds of
// follow-on context. Recordings shorter than 11 s yield no windows.
std::vector<WindowSample> extract_windows(const SpO2Record& rec);

// Drops every window containing any sample strictly below 50: saturations
// under that line are sensor dropouts, not physiology. Returns the kept
// windows; dropped_count reports how many were removed.
std::vector<WindowSample> artifact_filter(const std::vector<WindowSample>& in,
                                          long long* dropped_count = nullptr);

struct SplitReport {
  size_t total = 0;
  size_t test = 0;
  size_t val = 0;
  size_t train = 0;  // before oversampling
  size_t train_oversampled = 0;
  size_t val_oversampled = 0;
  long long train_pos = 0, train_neg = 0;  // after oversampling
  long long val_pos = 0, val_neg = 0;
  long long test_pos = 0, test_neg = 0;
};

struct DatasetSplit {
  LabeledSet train;
  LabeledSet val;
  LabeledSet test;
  SplitReport report;
};

// Seeded shuffle, then n/10 test, n/10 val, rest train. The minority class
// of train and of val is oversampled to an exact 1:1 balance (whole-list
// copies plus a seeded random remainder); the test set is left untouched.
// Needs at least 10 windows and both classes present.
DatasetSplit split_and_oversample(const std::vector<WindowSample>& windows,
                                  uint64_t seed);

struct SynthRecord {
  SpO2Record record;
  std::vector<AnnotationEvent> events;
};

struct SynthOptions {
  long long seconds = 600;
  double event_rate = 0.15;    // approximate fraction of time inside events
  double artifact_rate = 0.0;  // per-second probability of a sensor dropout
};

// Synthetic overnight oximetry: a gently wandering baseline near 97%,
// apnea events as 10-30 s desaturation dips with sharp edges, optional
// sub-50 dropout artifacts. Deterministic for a fixed seed.
SynthRecord synthesize_record(const std::string& id, uint64_t seed,
                              const SynthOptions& opt);

}  // namespace somnnet
