#include "somnnet/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
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

}  // namespace

std::map<std::string, std::string> parse_config_text(
    const std::string& text, const std::vector<std::string>& known_keys) {
  std::map<std::string, std::string> values;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");
    if (std::find(known_keys.begin(), known_keys.end(), key) ==
        known_keys.end())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    if (values.count(key))
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");
    values[key] = value;
  }
  return values;
}

std::map<std::string, std::string> load_config(
    const std::string& path, const std::vector<std::string>& known_keys) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config_text(os.str(), known_keys);
}

}  // namespace somnnet
