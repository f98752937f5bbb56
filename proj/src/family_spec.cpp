#include "aniso/family_spec.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "aniso/error.hpp"

namespace aniso {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

/// Splits on `sep` outside any (), [] nesting.
std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (depth < 0) throw ConfigError("family spec: unbalanced brackets in '" + std::string(s) + "'");
    if (c == sep && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (depth != 0) throw ConfigError("family spec: unbalanced brackets in '" + std::string(s) + "'");
  const auto last = trim(s.substr(start));
  if (!last.empty() || !out.empty()) out.push_back(last);
  return out;
}

double parse_number(const std::string& text) {
  std::string t = trim(text);
  double sign = 1.0;
  if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
    if (t[0] == '-') sign = -1.0;
    t = trim(t.substr(1));
  }
  if (t == "e") return sign * std::numbers::e;
  if (t == "pi") return sign * std::numbers::pi;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
    throw ConfigError("family spec: expected a number, got '" + text + "'");
  return sign * v;
}

struct Call {
  std::string name;
  std::string body;
  char open = 0;
};

Call parse_call(std::string_view spec) {
  const std::string s = trim(spec);
  const auto pos = s.find_first_of("([");
  if (pos == std::string::npos) return {s, "", 0};
  const char open = s[pos];
  const char close = open == '(' ? ')' : ']';
  if (s.back() != close) throw ConfigError("family spec: missing '" + std::string(1, close) + "' in '" + s + "'");
  return {trim(s.substr(0, pos)), s.substr(pos + 1, s.size() - pos - 2), open};
}

/// Positional and key=value arguments resolved against the parameter list `names`.
std::map<std::string, std::string> bind_args(const std::string& family, const std::string& body,
                                             const std::vector<std::string>& names) {
  std::map<std::string, std::string> out;
  if (trim(body).empty()) return out;
  std::size_t position = 0;
  for (const auto& arg : split_top(body, ',')) {
    const auto eq = arg.find('=');
    std::string key, value;
    if (eq == std::string::npos) {
      if (position >= names.size()) throw ConfigError(family + ": too many arguments");
      key = names[position++];
      value = arg;
    } else {
      key = trim(arg.substr(0, eq));
      value = trim(arg.substr(eq + 1));
      bool known = false;
      for (const auto& n : names) known = known || n == key;
      if (!known) throw ConfigError(family + ": unknown argument '" + key + "'");
    }
    if (out.count(key)) throw ConfigError(family + ": argument '" + key + "' given twice");
    out[key] = value;
  }
  return out;
}

std::optional<double> number_arg(const std::map<std::string, std::string>& args, const std::string& key) {
  const auto it = args.find(key);
  if (it == args.end()) return std::nullopt;
  return parse_number(it->second);
}

double required(const std::map<std::string, std::string>& args, const std::string& family, const std::string& key) {
  const auto v = number_arg(args, key);
  if (!v) throw ConfigError(family + ": missing argument '" + key + "'");
  return *v;
}

}  // namespace

YoungFunction1D parse_young(std::string_view spec) {
  const Call call = parse_call(spec);
  if (call.open == '[') throw ConfigError("family spec: '" + call.name + "' is not a 1-D family");
  try {
    if (call.name == "power") {
      const auto a = bind_args("power", call.body, {"p", "scale"});
      const double p = number_arg(a, "p").value_or(2.0);
      if (const auto s = number_arg(a, "scale")) return YoungFunction1D::power(p, *s);
      return YoungFunction1D::power(p);
    }
    if (call.name == "powerlog") {
      const auto a = bind_args("powerlog", call.body, {"p", "alpha", "c", "scale"});
      const double p = required(a, "powerlog", "p"), alpha = required(a, "powerlog", "alpha"),
                   c = required(a, "powerlog", "c");
      if (const auto s = number_arg(a, "scale")) return YoungFunction1D::power_log(p, alpha, c, *s);
      return YoungFunction1D::power_log(p, alpha, c);
    }
    if (call.name == "exppow") {
      const auto a = bind_args("exppow", call.body, {"alpha", "scale"});
      return YoungFunction1D::exp_power(required(a, "exppow", "alpha"), number_arg(a, "scale").value_or(1.0));
    }
    if (call.name == "explin") {
      const auto a = bind_args("explin", call.body, {"scale"});
      return YoungFunction1D::exp_linear(number_arg(a, "scale").value_or(1.0));
    }
    if (call.name == "table") {
      const std::string path = trim(call.body);
      if (path.empty()) throw ConfigError("table: missing path");
      return YoungFunction1D::from_csv(path);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("family spec '" + std::string(spec) + "': " + e.what());
  }
  throw ConfigError("family spec: unknown 1-D family '" + call.name + "'");
}

NFunction parse_nfunction(std::string_view spec, int dim) {
  const Call call = parse_call(spec);
  try {
    if (call.name == "quadratic") {
      if (dim < 1) throw ConfigError("quadratic: dimension required");
      return families::quadratic(dim);
    }
    if (call.name == "sepsum") {
      std::vector<YoungFunction1D> terms;
      for (const auto& t : split_top(call.body, ',')) terms.push_back(parse_young(t));
      if (terms.empty()) throw ConfigError("sepsum: needs at least one term");
      return NFunction::separable(std::move(terms));
    }
    if (call.name == "radial") {
      const auto parts = split_top(call.body, ',');
      if (parts.empty()) throw ConfigError("radial: missing profile");
      int n = dim;
      for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos || trim(parts[i].substr(0, eq)) != "n")
          throw ConfigError("radial: unexpected argument '" + parts[i] + "'");
        n = static_cast<int>(parse_number(parts[i].substr(eq + 1)));
      }
      if (n < 1) throw ConfigError("radial: dimension required");
      return NFunction::radial(parse_young(parts[0]), n);
    }
    if (call.name == "composite") {
      std::vector<std::vector<double>> rows;
      std::vector<YoungFunction1D> funcs;
      for (const auto& part : split_top(call.body, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw ConfigError("composite: expected rows=... or funcs=...");
        const std::string key = trim(part.substr(0, eq)), value = part.substr(eq + 1);
        if (key == "rows") {
          for (const auto& row : split_top(value, ';')) {
            const Call r = parse_call(row);
            if (!r.name.empty() || r.open != '(') throw ConfigError("composite: rows are written (a,b,...)");
            std::vector<double> coeffs;
            for (const auto& x : split_top(r.body, ',')) coeffs.push_back(parse_number(x));
            rows.push_back(std::move(coeffs));
          }
        } else if (key == "funcs") {
          for (const auto& f : split_top(value, ';')) funcs.push_back(parse_young(f));
        } else {
          throw ConfigError("composite: unknown argument '" + key + "'");
        }
      }
      return NFunction::composite(std::move(rows), std::move(funcs));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("family spec '" + std::string(spec) + "': " + e.what());
  }
  throw ConfigError("family spec: unknown n-D family '" + call.name + "'");
}

}  // namespace aniso
