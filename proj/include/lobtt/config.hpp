#pragma once

#include <map>
#include <string>
#include <vector>

namespace lobtt {

// Flat `key = value` text configuration. Lines starting with '#' (or blank)
// are ignored; later assignments win; values keep internal whitespace but are
// trimmed at the edges.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text, const std::string& origin);

  // "key=value" strings, e.g. from --set flags; applied on top.
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma-separated

  // Sorted `key = value` lines; hashing this gives a stable config fingerprint.
  std::string canonical_text() const;
  std::uint64_t hash() const;

  // Keys that were read at least once; used to reject unknown/misspelled keys.
  std::vector<std::string> unread_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> read_;
};

}  // namespace lobtt
