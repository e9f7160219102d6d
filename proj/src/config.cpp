#include "lobtt/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lobtt/rng.hpp"

namespace lobtt {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), path);
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text,
                                           const std::string& origin) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

void KeyValueConfig::apply_override(const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::runtime_error("override '" + assignment + "' is not key=value");
  const std::string key = trim(assignment.substr(0, eq));
  if (key.empty()) throw std::runtime_error("override '" + assignment + "' has no key");
  values_[key] = trim(assignment.substr(eq + 1));
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  read_[key] = true;
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  read_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(it->second.c_str(), &end, 10);
  if (errno != 0 || end != it->second.c_str() + it->second.size() || it->second.empty())
    throw std::runtime_error("config key '" + key + "': bad integer '" + it->second + "'");
  return static_cast<std::int64_t>(v);
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key,
                                       std::uint64_t fallback) const {
  read_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (errno != 0 || end != it->second.c_str() + it->second.size() || it->second.empty())
    throw std::runtime_error("config key '" + key + "': bad integer '" + it->second + "'");
  return static_cast<std::uint64_t>(v);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  read_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (errno != 0 || end != it->second.c_str() + it->second.size() || it->second.empty())
    throw std::runtime_error("config key '" + key + "': bad number '" + it->second + "'");
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  read_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::runtime_error("config key '" + key + "': bad boolean '" + v + "'");
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
  read_[key] = true;
  auto it = values_.find(key);
  std::vector<std::string> out;
  if (it == values_.end() || it->second.empty()) return out;
  std::size_t start = 0;
  const std::string& v = it->second;
  while (true) {
    const std::size_t pos = v.find(',', start);
    const std::string item =
        trim(pos == std::string::npos ? v.substr(start) : v.substr(start, pos - start));
    if (!item.empty()) out.push_back(item);
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

std::string KeyValueConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

std::uint64_t KeyValueConfig::hash() const { return fnv1a64(canonical_text()); }

std::vector<std::string> KeyValueConfig::unread_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    (void)v;
    if (!read_.count(k)) out.push_back(k);
  }
  return out;
}

}  // namespace lobtt
