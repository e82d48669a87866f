#pragma once

#include <map>
#include <string>
#include <vector>

namespace somnnet {

// "key = value" lines with '#' comments. Unknown and repeated keys are
// rejected with their line number; a typo in an experiment config should
// fail loudly, not silently fall back to a default.
std::map<std::string, std::string> parse_config_text(
    const std::string& text, const std::vector<std::string>& known_keys);

std::map<std::string, std::string> load_config(
    const std::string& path, const std::vector<std::string>& known_keys);

}  // namespace somnnet
