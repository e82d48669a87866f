#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace somnnet {

// One signal of an EDF recording. Parsed values sit next to the raw
// fixed-width header fields; the raws are kept verbatim so a parse/encode
// round trip reproduces the input byte for byte.
struct EdfSignal {
  std::string label;
  std::string phys_dim;
  double phys_min = 0.0;
  double phys_max = 0.0;
  double dig_min = 0.0;
  double dig_max = 0.0;
  int samples_per_record = 0;

  std::string raw_label;          // 16
  std::string raw_transducer;     // 80
  std::string raw_phys_dim;       // 8
  std::string raw_phys_min;       // 8
  std::string raw_phys_max;       // 8
  std::string raw_dig_min;        // 8
  std::string raw_dig_max;        // 8
  std::string raw_prefiltering;   // 80
  std::string raw_samples;        // 8
  std::string raw_reserved;       // 32

  std::vector<int16_t> samples;  // all data records concatenated

  double physical(int16_t digital) const;
  std::vector<double> physical_samples() const;
};

struct EdfFile {
  std::string raw_version;       // 8
  std::string raw_patient;       // 80
  std::string raw_recording;     // 80
  std::string raw_date;          // 8
  std::string raw_time;          // 8
  std::string raw_header_bytes;  // 8
  std::string raw_reserved;      // 44
  std::string raw_num_records;   // 8
  std::string raw_duration;      // 8
  std::string raw_ns;            // 4

  std::string start_date;
  std::string start_time;
  long long num_records = 0;
  double record_duration = 1.0;

  std::vector<EdfSignal> signals;

  // Case-insensitive substring match over signal labels; -1 when absent.
  int find_signal(const std::string& needle) const;
};

// Throws ParseError with the byte offset of the offending field.
EdfFile parse_edf(const std::string& bytes);
EdfFile read_edf(const std::string& path);

std::string encode_edf(const EdfFile& edf);
void write_edf(const std::string& path, const EdfFile& edf);

// Builds a well-formed single-signal recording with canonical header
// fields and a fixed date, quantizing physical values into the signal's
// digital range. Used by the synthesizer and by tests.
EdfFile make_edf(const std::string& patient, const std::string& label,
                 const std::string& phys_dim, double phys_min,
                 double phys_max, int samples_per_record,
                 double record_duration,
                 const std::vector<double>& physical_values);

}  // namespace somnnet
