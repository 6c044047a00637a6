#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace logitcal {

// Flat "key = value" files. '#' starts a comment; blank lines are skipped.
// Later duplicates override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& provenance);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  double get_double(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  // Throws ConfigError naming the first key outside `known`.
  void reject_unknown(const std::vector<std::string>& known) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::string provenance_;
  std::map<std::string, std::string> values_;
};

double parse_double(const std::string& text, const std::string& what);
std::uint64_t parse_uint(const std::string& text, const std::string& what);
std::vector<std::string> split_list(const std::string& text);

}  // namespace logitcal
