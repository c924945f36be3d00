#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace vpme {

/// Flat `key = value` text with optional `[section]` headers; `#` and `;` start comments.
/// Keys outside any section live in section "".
class KeyValueConfig {
public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long long get_int(const std::string& section, const std::string& key, long long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<long long> get_ints(const std::string& section, const std::string& key,
                                  const std::vector<long long>& fallback) const;

  /// Throws InvalidArgument naming the first section or key absent from `allowed`.
  void require_known(const std::map<std::string, std::set<std::string>>& allowed) const;

  const std::map<std::string, std::map<std::string, std::string>>& entries() const noexcept { return entries_; }

private:
  const std::string* find(const std::string& section, const std::string& key) const;
  std::map<std::string, std::map<std::string, std::string>> entries_;
};

/// Comma- or whitespace-separated list split into trimmed tokens.
std::vector<std::string> split_list(const std::string& s);

}  // namespace vpme
