#include "somnnet/dataset.hpp"

#include "somnnet/binio.hpp"
#include "somnnet/error.hpp"

namespace somnnet {

namespace {
constexpr char kMagic[] = "SOMNDSET";
constexpr uint32_t kVersion = 1;
}  // namespace

std::string encode_dataset(const LabeledSet& set, int width) {
  if (width < 1) throw ParameterError("dataset: width must be >= 1");
  if (set.x.size() != set.y.size())
    throw ParameterError("dataset: window/label count mismatch");
  std::string b;
  b.append(kMagic, 8);
  bin::put_u32(b, kVersion);
  bin::put_u32(b, static_cast<uint32_t>(set.x.size()));
  bin::put_u32(b, static_cast<uint32_t>(width));
  for (size_t i = 0; i < set.x.size(); ++i) {
    if (static_cast<int>(set.x[i].size()) != width)
      throw ParameterError("dataset: window " + std::to_string(i) + " has " +
                           std::to_string(set.x[i].size()) +
                           " values, want " + std::to_string(width));
    for (double v : set.x[i]) bin::put_f32(b, static_cast<float>(v));
    const int y = set.y[i];
    if (y != 0 && y != 1)
      throw ParameterError("dataset: label must be 0 or 1, got " +
                           std::to_string(y));
    bin::put_u8(b, static_cast<uint8_t>(y));
  }
  return b;
}

LabeledSet decode_dataset(const std::string& bytes) {
  bin::Reader r(bytes);
  if (r.bytes(8) != std::string(kMagic, 8))
    throw ParseError("dataset: bad magic, not a prepared dataset");
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw ParseError("dataset: unsupported format version " +
                     std::to_string(version));
  const uint32_t count = r.u32();
  const uint32_t width = r.u32();
  if (width < 1 || width > 100000)
    throw ParseError("dataset: window width " + std::to_string(width) +
                     " out of range");
  LabeledSet set;
  set.x.reserve(count);
  set.y.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    std::vector<double> x(width);
    for (uint32_t j = 0; j < width; ++j) x[j] = r.f32();
    const uint8_t y = r.u8();
    if (y > 1)
      throw ParseError("dataset: window " + std::to_string(i) +
                       " has label " + std::to_string(y));
    set.x.push_back(std::move(x));
    set.y.push_back(y);
  }
  if (!r.done())
    throw ParseError("dataset: " + std::to_string(bytes.size() - r.off) +
                     " trailing bytes");
  return set;
}

void save_dataset(const std::string& path, const LabeledSet& set, int width) {
  bin::write_file(path, encode_dataset(set, width));
}

LabeledSet load_dataset(const std::string& path) {
  return decode_dataset(bin::read_file(path));
}

}  // namespace somnnet
