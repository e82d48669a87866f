#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace somnnet {

// One scored respiratory event, in seconds from the start of the recording.
struct AnnotationEvent {
  double onset = 0.0;
  double duration = 0.0;
  std::string type;
};

// Text format: one "onset duration type" triple per line, whitespace
// separated; blank lines and '#' comments are skipped. Events come back
// sorted by onset. Malformed lines raise ParseError with the line number.
std::vector<AnnotationEvent> parse_annotations(const std::string& text);

std::string format_annotations(const std::vector<AnnotationEvent>& events);

// Apneic events by scored type: apneas and hypopneas of any flavor count,
// other respiratory annotations (snores, desaturation-only) do not.
bool is_apneic_event_type(const std::string& type);

// Per-second labels for seconds 1..total_seconds; entry t-1 covers the
// half-open interval [t-1, t). A second is apneic when some apneic event
// satisfies onset <= t-1 < onset + duration.
std::vector<uint8_t> label_seconds(const std::vector<AnnotationEvent>& events,
                                   long long total_seconds);

// Adapter for scored-event sheets that give wall-clock onset times: rows
// start with hh:mm:ss, followed by the event type and its duration in
// seconds. Onsets are rebased against recording_start ("hh:mm:ss" or
// "hh.mm.ss"), wrapping past midnight. Leading prose lines are skipped.
std::vector<AnnotationEvent> parse_respevt(const std::string& text,
                                           const std::string& recording_start);

}  // namespace somnnet
