#pragma once

#include <string>

namespace somnnet {

// Binary confusion counts; class 1 is the positive (apneic) class.
// Rates with zero denominators are absent rather than 0 or NaN.
struct MetricsReport {
  long long tp = 0;
  long long tn = 0;
  long long fp = 0;
  long long fn = 0;

  long long total() const { return tp + tn + fp + fn; }

  bool has_accuracy() const { return total() > 0; }
  double accuracy() const {
    return static_cast<double>(tp + tn) / static_cast<double>(total());
  }

  bool has_sensitivity() const { return tp + fn > 0; }
  double sensitivity() const {
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
  }

  bool has_specificity() const { return tn + fp > 0; }
  double specificity() const {
    return static_cast<double>(tn) / static_cast<double>(tn + fp);
  }

  void tally(int predicted, int actual) {
    if (actual == 1)
      predicted == 1 ? ++tp : ++fn;
    else
      predicted == 1 ? ++fp : ++tn;
  }
};

// Multi-line human-readable block; absent rates print as "n/a".
std::string format_metrics(const MetricsReport& m);

}  // namespace somnnet
