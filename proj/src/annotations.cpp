#include "somnnet/annotations.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "somnnet/error.hpp"

namespace somnnet {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::toupper(c));
  });
  return s;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
  }
  return lines;
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

bool parse_double(const std::string& s, double* out) {
  size_t used = 0;
  try {
    *out = std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size();
}

// hh:mm:ss or hh.mm.ss -> seconds of day
bool parse_clock(const std::string& s, long long* out) {
  int h = 0, m = 0, sec = 0;
  char a = 0, b = 0;
  std::istringstream is(s);
  if (!(is >> h >> a >> m >> b >> sec)) return false;
  if ((a != ':' && a != '.') || (b != ':' && b != '.')) return false;
  if (!is.eof()) {
    char c;
    if (is >> c) return false;
  }
  if (h < 0 || h > 23 || m < 0 || m > 59 || sec < 0 || sec > 59) return false;
  *out = static_cast<long long>(h) * 3600 + m * 60 + sec;
  return true;
}

}  // namespace

std::vector<AnnotationEvent> parse_annotations(const std::string& text) {
  std::vector<AnnotationEvent> events;
  const std::vector<std::string> lines = split_lines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> toks = tokens_of(line);
    if (toks.size() < 3)
      throw ParseError("annotations line " + std::to_string(i + 1) +
                       ": expected 'onset duration type'");
    AnnotationEvent e;
    if (!parse_double(toks[0], &e.onset))
      throw ParseError("annotations line " + std::to_string(i + 1) +
                       ": bad onset '" + toks[0] + "'");
    if (!parse_double(toks[1], &e.duration))
      throw ParseError("annotations line " + std::to_string(i + 1) +
                       ": bad duration '" + toks[1] + "'");
    if (e.onset < 0.0 || e.duration < 0.0)
      throw ParseError("annotations line " + std::to_string(i + 1) +
                       ": onset and duration must be non-negative");
    e.type = toks[2];
    for (size_t j = 3; j < toks.size(); ++j) e.type += " " + toks[j];
    events.push_back(std::move(e));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const AnnotationEvent& a, const AnnotationEvent& b) {
                     return a.onset < b.onset;
                   });
  return events;
}

std::string format_annotations(const std::vector<AnnotationEvent>& events) {
  std::ostringstream os;
  for (const AnnotationEvent& e : events)
    os << e.onset << " " << e.duration << " " << e.type << "\n";
  return os.str();
}

bool is_apneic_event_type(const std::string& type) {
  const std::string up = upper(trim(type));
  if (up.find("APNEA") != std::string::npos) return true;
  if (up.find("HYP") != std::string::npos) return true;
  return up == "O" || up == "C" || up == "M" || up == "A";
}

std::vector<uint8_t> label_seconds(const std::vector<AnnotationEvent>& events,
                                   long long total_seconds) {
  if (total_seconds < 0)
    throw ParameterError("label_seconds: negative second count");
  std::vector<uint8_t> labels(static_cast<size_t>(total_seconds), 0);
  for (const AnnotationEvent& e : events) {
    if (!is_apneic_event_type(e.type)) continue;
    long long lo = static_cast<long long>(std::ceil(e.onset));
    if (lo < 0) lo = 0;
    const double hi = e.onset + e.duration;
    for (long long i = lo; i < total_seconds && static_cast<double>(i) < hi;
         ++i)
      labels[static_cast<size_t>(i)] = 1;
  }
  return labels;
}

std::vector<AnnotationEvent> parse_respevt(const std::string& text,
                                           const std::string& recording_start) {
  long long start = 0;
  if (!parse_clock(trim(recording_start), &start))
    throw ParseError("respevt: bad recording start time '" + recording_start +
                     "'");
  std::vector<AnnotationEvent> events;
  const std::vector<std::string> lines = split_lines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::vector<std::string> toks = tokens_of(lines[i]);
    if (toks.empty()) continue;
    long long when = 0;
    if (!parse_clock(toks[0], &when)) continue;  // prose or column headers
    if (toks.size() < 2)
      throw ParseError("respevt line " + std::to_string(i + 1) +
                       ": event time without a type");
    AnnotationEvent e;
    e.type = toks[1];
    bool have_duration = false;
    for (size_t j = 2; j < toks.size(); ++j) {
      double d = 0.0;
      if (parse_double(toks[j], &d)) {
        e.duration = d;
        have_duration = true;
        break;
      }
    }
    if (!have_duration)
      throw ParseError("respevt line " + std::to_string(i + 1) +
                       ": no numeric duration after type '" + e.type + "'");
    if (e.duration < 0.0)
      throw ParseError("respevt line " + std::to_string(i + 1) +
                       ": negative duration");
    e.onset = static_cast<double>((when - start + 86400) % 86400);
    events.push_back(std::move(e));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const AnnotationEvent& a, const AnnotationEvent& b) {
                     return a.onset < b.onset;
                   });
  return events;
}

}  // namespace somnnet
