#pragma once

// Flat `key = value` experiment configs. `#` starts a comment; keys are unique.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace aniso {

class FlatConfig {
 public:
  /// ConfigError with source and line on malformed lines, duplicate keys, or an empty file.
  static FlatConfig parse(std::string_view text, std::string source = "<string>");
  static FlatConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int get_int_or(const std::string& key, int fallback) const;
  /// Comma-separated numbers.
  std::vector<double> get_list(const std::string& key) const;
  /// Line number of the key in its source (0 for values set programmatically).
  int line_of(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
  const std::string& source() const noexcept { return source_; }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
  std::string source_;
  std::map<std::string, std::string> entries_;
  std::map<std::string, int> lines_;
};

}  // namespace aniso
