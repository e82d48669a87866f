#include "somnnet/edf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "somnnet/binio.hpp"
#include "somnnet/error.hpp"

namespace somnnet {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

double parse_number(const std::string& raw, const char* field, size_t off) {
  const std::string t = trim(raw);
  if (t.empty())
    throw ParseError(std::string("edf: empty ") + field + " at byte " +
                     std::to_string(off));
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != t.size())
    throw ParseError(std::string("edf: cannot parse ") + field + " '" + t +
                     "' at byte " + std::to_string(off));
  return v;
}

long long parse_int(const std::string& raw, const char* field, size_t off) {
  const double v = parse_number(raw, field, off);
  if (v != std::floor(v))
    throw ParseError(std::string("edf: ") + field + " '" + trim(raw) +
                     "' is not an integer (byte " + std::to_string(off) + ")");
  return static_cast<long long>(v);
}

std::string fixed_field(const std::string& s, size_t width) {
  std::string out = s.substr(0, width);
  out.resize(width, ' ');
  return out;
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

struct Cursor {
  const std::string& buf;
  size_t off = 0;

  std::string take(size_t n, const char* field) {
    if (off + n > buf.size())
      throw ParseError(std::string("edf: truncated at byte ") +
                       std::to_string(off) + " reading " + field);
    std::string s = buf.substr(off, n);
    off += n;
    return s;
  }
};

}  // namespace

double EdfSignal::physical(int16_t digital) const {
  return phys_min + (static_cast<double>(digital) - dig_min) *
                        (phys_max - phys_min) / (dig_max - dig_min);
}

std::vector<double> EdfSignal::physical_samples() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (int16_t d : samples) out.push_back(physical(d));
  return out;
}

int EdfFile::find_signal(const std::string& needle) const {
  const std::string what = lower(trim(needle));
  for (size_t i = 0; i < signals.size(); ++i)
    if (lower(signals[i].label).find(what) != std::string::npos)
      return static_cast<int>(i);
  return -1;
}

EdfFile parse_edf(const std::string& bytes) {
  if (bytes.size() < 256)
    throw ParseError("edf: file too short for the 256-byte fixed header (" +
                     std::to_string(bytes.size()) + " bytes)");
  Cursor cur{bytes};
  EdfFile f;
  f.raw_version = cur.take(8, "version");
  f.raw_patient = cur.take(80, "patient id");
  f.raw_recording = cur.take(80, "recording id");
  f.raw_date = cur.take(8, "start date");
  f.raw_time = cur.take(8, "start time");
  f.raw_header_bytes = cur.take(8, "header size");
  f.raw_reserved = cur.take(44, "reserved");
  f.raw_num_records = cur.take(8, "record count");
  f.raw_duration = cur.take(8, "record duration");
  f.raw_ns = cur.take(4, "signal count");

  f.start_date = trim(f.raw_date);
  f.start_time = trim(f.raw_time);
  f.record_duration = parse_number(f.raw_duration, "record duration", 244);
  if (f.record_duration <= 0.0)
    throw ParseError("edf: record duration must be positive (byte 244)");

  const long long ns = parse_int(f.raw_ns, "signal count", 252);
  if (ns < 1 || ns > 4096)
    throw ParseError("edf: signal count " + std::to_string(ns) +
                     " out of range (byte 252)");
  const size_t header_bytes = 256 + static_cast<size_t>(ns) * 256;
  const long long declared =
      parse_int(f.raw_header_bytes, "header size", 184);
  if (declared != static_cast<long long>(header_bytes))
    throw ParseError("edf: header size field says " +
                     std::to_string(declared) + ", expected " +
                     std::to_string(header_bytes) + " for " +
                     std::to_string(ns) + " signals (byte 184)");
  if (bytes.size() < header_bytes)
    throw ParseError("edf: file shorter than its declared header (" +
                     std::to_string(bytes.size()) + " < " +
                     std::to_string(header_bytes) + " bytes)");

  // Signal headers are field-major: all labels, then all transducers, ...
  f.signals.resize(static_cast<size_t>(ns));
  auto column = [&](size_t width, std::string EdfSignal::* raw,
                    const char* field) {
    for (auto& sig : f.signals) sig.*raw = cur.take(width, field);
  };
  column(16, &EdfSignal::raw_label, "signal label");
  column(80, &EdfSignal::raw_transducer, "transducer");
  column(8, &EdfSignal::raw_phys_dim, "physical dimension");
  size_t col_off = cur.off;
  column(8, &EdfSignal::raw_phys_min, "physical minimum");
  column(8, &EdfSignal::raw_phys_max, "physical maximum");
  column(8, &EdfSignal::raw_dig_min, "digital minimum");
  column(8, &EdfSignal::raw_dig_max, "digital maximum");
  column(80, &EdfSignal::raw_prefiltering, "prefiltering");
  size_t spr_off = cur.off;
  column(8, &EdfSignal::raw_samples, "samples per record");
  column(32, &EdfSignal::raw_reserved, "signal reserved");

  long long record_values = 0;
  for (size_t i = 0; i < f.signals.size(); ++i) {
    EdfSignal& sig = f.signals[i];
    sig.label = trim(sig.raw_label);
    sig.phys_dim = trim(sig.raw_phys_dim);
    sig.phys_min =
        parse_number(sig.raw_phys_min, "physical minimum", col_off + 8 * i);
    sig.phys_max = parse_number(sig.raw_phys_max, "physical maximum",
                                col_off + 8 * (ns + i));
    sig.dig_min = parse_number(sig.raw_dig_min, "digital minimum",
                               col_off + 8 * (2 * ns + i));
    sig.dig_max = parse_number(sig.raw_dig_max, "digital maximum",
                               col_off + 8 * (3 * ns + i));
    if (sig.dig_max == sig.dig_min)
      throw ParseError("edf: signal '" + sig.label +
                       "' has equal digital min and max, cannot calibrate");
    const long long spr =
        parse_int(sig.raw_samples, "samples per record", spr_off + 8 * i);
    if (spr < 1 || spr > 100000)
      throw ParseError("edf: samples per record " + std::to_string(spr) +
                       " out of range for signal '" + sig.label + "'");
    sig.samples_per_record = static_cast<int>(spr);
    record_values += spr;
  }

  const size_t record_bytes = static_cast<size_t>(record_values) * 2;
  const size_t payload = bytes.size() - header_bytes;
  long long num_records = parse_int(f.raw_num_records, "record count", 236);
  if (num_records < 0) {
    // Unknown count: take as many whole records as the payload holds.
    num_records = static_cast<long long>(payload / record_bytes);
  } else if (payload != static_cast<size_t>(num_records) * record_bytes) {
    throw ParseError("edf: payload is " + std::to_string(payload) +
                     " bytes, expected " +
                     std::to_string(num_records * record_bytes) + " for " +
                     std::to_string(num_records) + " records");
  }
  f.num_records = num_records;

  for (auto& sig : f.signals)
    sig.samples.reserve(static_cast<size_t>(num_records) *
                        sig.samples_per_record);
  size_t off = header_bytes;
  for (long long r = 0; r < num_records; ++r) {
    for (auto& sig : f.signals) {
      for (int j = 0; j < sig.samples_per_record; ++j) {
        const uint8_t lo = static_cast<uint8_t>(bytes[off]);
        const uint8_t hi = static_cast<uint8_t>(bytes[off + 1]);
        sig.samples.push_back(
            static_cast<int16_t>(static_cast<uint16_t>(lo) |
                                 (static_cast<uint16_t>(hi) << 8)));
        off += 2;
      }
    }
  }
  return f;
}

EdfFile read_edf(const std::string& path) {
  return parse_edf(bin::read_file(path));
}

std::string encode_edf(const EdfFile& edf) {
  auto require = [](const std::string& s, size_t w, const char* field) {
    if (s.size() != w)
      throw ParameterError(std::string("edf: raw ") + field + " must be " +
                           std::to_string(w) + " bytes");
  };
  require(edf.raw_version, 8, "version");
  require(edf.raw_patient, 80, "patient id");
  require(edf.raw_recording, 80, "recording id");
  require(edf.raw_date, 8, "start date");
  require(edf.raw_time, 8, "start time");
  require(edf.raw_header_bytes, 8, "header size");
  require(edf.raw_reserved, 44, "reserved");
  require(edf.raw_num_records, 8, "record count");
  require(edf.raw_duration, 8, "record duration");
  require(edf.raw_ns, 4, "signal count");

  std::string b;
  b += edf.raw_version;
  b += edf.raw_patient;
  b += edf.raw_recording;
  b += edf.raw_date;
  b += edf.raw_time;
  b += edf.raw_header_bytes;
  b += edf.raw_reserved;
  b += edf.raw_num_records;
  b += edf.raw_duration;
  b += edf.raw_ns;

  auto column = [&](size_t width, std::string EdfSignal::* raw,
                    const char* field) {
    for (const auto& sig : edf.signals) {
      require(sig.*raw, width, field);
      b += sig.*raw;
    }
  };
  column(16, &EdfSignal::raw_label, "signal label");
  column(80, &EdfSignal::raw_transducer, "transducer");
  column(8, &EdfSignal::raw_phys_dim, "physical dimension");
  column(8, &EdfSignal::raw_phys_min, "physical minimum");
  column(8, &EdfSignal::raw_phys_max, "physical maximum");
  column(8, &EdfSignal::raw_dig_min, "digital minimum");
  column(8, &EdfSignal::raw_dig_max, "digital maximum");
  column(80, &EdfSignal::raw_prefiltering, "prefiltering");
  column(8, &EdfSignal::raw_samples, "samples per record");
  column(32, &EdfSignal::raw_reserved, "signal reserved");

  for (const auto& sig : edf.signals) {
    const long long want =
        static_cast<long long>(edf.num_records) * sig.samples_per_record;
    if (static_cast<long long>(sig.samples.size()) != want)
      throw ParameterError("edf: signal '" + sig.label + "' holds " +
                           std::to_string(sig.samples.size()) +
                           " samples, expected " + std::to_string(want));
  }
  for (long long r = 0; r < edf.num_records; ++r) {
    for (const auto& sig : edf.signals) {
      const size_t base = static_cast<size_t>(r) * sig.samples_per_record;
      for (int j = 0; j < sig.samples_per_record; ++j) {
        const uint16_t u = static_cast<uint16_t>(sig.samples[base + j]);
        b.push_back(static_cast<char>(u & 0xff));
        b.push_back(static_cast<char>((u >> 8) & 0xff));
      }
    }
  }
  return b;
}

void write_edf(const std::string& path, const EdfFile& edf) {
  bin::write_file(path, encode_edf(edf));
}

EdfFile make_edf(const std::string& patient, const std::string& label,
                 const std::string& phys_dim, double phys_min,
                 double phys_max, int samples_per_record,
                 double record_duration,
                 const std::vector<double>& physical_values) {
  if (samples_per_record < 1)
    throw ParameterError("edf: samples_per_record must be >= 1");
  if (phys_max <= phys_min)
    throw ParameterError("edf: physical range must be increasing");
  if (physical_values.size() % samples_per_record != 0)
    throw ParameterError("edf: sample count must be a whole number of records");

  EdfFile f;
  f.num_records =
      static_cast<long long>(physical_values.size()) / samples_per_record;
  f.record_duration = record_duration;
  f.start_date = "01.01.00";  // fixed date keeps fixtures reproducible
  f.start_time = "00.00.00";

  f.raw_version = fixed_field("0", 8);
  f.raw_patient = fixed_field(patient, 80);
  f.raw_recording = fixed_field(patient, 80);
  f.raw_date = fixed_field(f.start_date, 8);
  f.raw_time = fixed_field(f.start_time, 8);
  f.raw_header_bytes = fixed_field(fmt_num(256 + 256), 8);
  f.raw_reserved = fixed_field("", 44);
  f.raw_num_records = fixed_field(fmt_num(static_cast<double>(f.num_records)), 8);
  f.raw_duration = fixed_field(fmt_num(record_duration), 8);
  f.raw_ns = fixed_field("1", 4);

  EdfSignal sig;
  sig.label = label;
  sig.phys_dim = phys_dim;
  sig.phys_min = phys_min;
  sig.phys_max = phys_max;
  sig.dig_min = -32768;
  sig.dig_max = 32767;
  sig.samples_per_record = samples_per_record;
  sig.raw_label = fixed_field(label, 16);
  sig.raw_transducer = fixed_field("", 80);
  sig.raw_phys_dim = fixed_field(phys_dim, 8);
  sig.raw_phys_min = fixed_field(fmt_num(phys_min), 8);
  sig.raw_phys_max = fixed_field(fmt_num(phys_max), 8);
  sig.raw_dig_min = fixed_field("-32768", 8);
  sig.raw_dig_max = fixed_field("32767", 8);
  sig.raw_prefiltering = fixed_field("", 80);
  sig.raw_samples = fixed_field(fmt_num(samples_per_record), 8);
  sig.raw_reserved = fixed_field("", 32);

  const double scale = (sig.dig_max - sig.dig_min) / (phys_max - phys_min);
  sig.samples.reserve(physical_values.size());
  for (double p : physical_values) {
    const double clamped = std::clamp(p, phys_min, phys_max);
    const double d = sig.dig_min + (clamped - phys_min) * scale;
    sig.samples.push_back(static_cast<int16_t>(std::llround(d)));
  }
  f.signals.push_back(std::move(sig));
  return f;
}

}  // namespace somnnet
