#pragma once

#include <string>

#include "somnnet/model.hpp"

namespace somnnet {

// Prepared-window container: "SOMNDSET", format version, count, width,
// then each window as width f32 little-endian values plus a label byte.
// Values are stored f32 at rest and widened to double on load.
std::string encode_dataset(const LabeledSet& set, int width = 88);
LabeledSet decode_dataset(const std::string& bytes);

void save_dataset(const std::string& path, const LabeledSet& set,
                  int width = 88);
LabeledSet load_dataset(const std::string& path);

}  // namespace somnnet
