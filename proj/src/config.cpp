#include "aniso/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "aniso/error.hpp"

namespace aniso {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool to_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return !t.empty() && end == t.c_str() + t.size() && std::isfinite(out);
}

}  // namespace

FlatConfig FlatConfig::parse(std::string_view text, std::string source) {
  FlatConfig cfg;
  cfg.source_ = std::move(source);
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(cfg.source_ + ":" + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError(cfg.source_ + ":" + std::to_string(number) + ": empty key");
    if (cfg.entries_.count(key))
      throw ConfigError(cfg.source_ + ":" + std::to_string(number) + ": duplicate key '" + key + "' (first on line " +
                        std::to_string(cfg.lines_[key]) + ")");
    cfg.entries_[key] = value;
    cfg.lines_[key] = number;
  }
  if (cfg.entries_.empty()) throw ConfigError(cfg.source_ + ": empty configuration");
  return cfg;
}

FlatConfig FlatConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void FlatConfig::fail(const std::string& key, const std::string& message) const {
  const int line = line_of(key);
  throw ConfigError(source_ + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": key '" + key + "': " +
                    message);
}

const std::string& FlatConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(source_ + ": missing key '" + key + "'");
  return it->second;
}

std::string FlatConfig::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double FlatConfig::get_double(const std::string& key) const {
  double v = 0.0;
  if (!to_double(get(key), v)) fail(key, "expected a number, got '" + get(key) + "'");
  return v;
}

double FlatConfig::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int FlatConfig::get_int_or(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double v = get_double(key);
  if (v != std::floor(v) || std::abs(v) > 2e9) fail(key, "expected an integer, got '" + get(key) + "'");
  return static_cast<int>(v);
}

std::vector<double> FlatConfig::get_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    if (!to_double(item, v)) fail(key, "expected comma-separated numbers, got '" + get(key) + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(key, "empty list");
  return out;
}

int FlatConfig::line_of(const std::string& key) const {
  const auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

void FlatConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
  lines_.erase(key);
}

}  // namespace aniso
