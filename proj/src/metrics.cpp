#include "somnnet/metrics.hpp"

#include <iomanip>
#include <sstream>

namespace somnnet {

namespace {

void rate_line(std::ostringstream& os, const char* label, bool present,
               double value) {
  os << label;
  if (present)
    os << std::fixed << std::setprecision(4) << value;
  else
    os << "n/a";
  os << "\n";
}

}  // namespace

std::string format_metrics(const MetricsReport& m) {
  std::ostringstream os;
  os << "windows:     " << m.total() << "\n"
     << "tp: " << m.tp << "  tn: " << m.tn << "  fp: " << m.fp
     << "  fn: " << m.fn << "\n";
  rate_line(os, "accuracy:    ", m.has_accuracy(),
            m.has_accuracy() ? m.accuracy() : 0.0);
  rate_line(os, "sensitivity: ", m.has_sensitivity(),
            m.has_sensitivity() ? m.sensitivity() : 0.0);
  rate_line(os, "specificity: ", m.has_specificity(),
            m.has_specificity() ? m.specificity() : 0.0);
  return os.str();
}

}  // namespace somnnet
