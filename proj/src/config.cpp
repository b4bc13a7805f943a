#include "pertflow/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pertflow {

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_number(const std::string& t, double& out) {
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

bool looks_integer(const std::string& t) {
  if (t.empty()) return false;
  std::size_t i = (t[0] == '+' || t[0] == '-') ? 1 : 0;
  if (i == t.size()) return false;
  for (; i < t.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
  return true;
}

}  // namespace

ConfigValue Config::parse_value(const std::string& raw) {
  const std::string t = trim(raw);
  if (t.empty()) throw std::runtime_error("empty config value");
  if (t == "true") return true;
  if (t == "false") return false;
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"')
      throw std::runtime_error("unterminated string value: " + t);
    return t.substr(1, t.size() - 2);
  }
  if (t.front() == '[') {
    if (t.back() != ']') throw std::runtime_error("unterminated array value: " + t);
    std::vector<double> vals;
    std::string body = t.substr(1, t.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      double x;
      if (!parse_number(item, x))
        throw std::runtime_error("bad array entry '" + item + "' in " + t);
      vals.push_back(x);
    }
    return vals;
  }
  if (looks_integer(t)) return static_cast<std::int64_t>(std::stoll(t));
  double x;
  if (parse_number(t, x)) return x;
  return t;  // bare identifier, e.g. preset = nemytskii
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::stringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // comments start at '#' outside quotes
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw std::runtime_error("line " + std::to_string(lineno) + ": empty section name");
      cfg.sections_[section];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty() || section.empty())
      throw std::runtime_error("line " + std::to_string(lineno) + ": key outside section");
    cfg.sections_[section][key] = parse_value(line.substr(eq + 1));
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

const ConfigValue* Config::find(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  auto k = s->second.find(key);
  if (k == s->second.end()) return nullptr;
  return &k->second;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

void Config::set(const std::string& section, const std::string& key, ConfigValue v) {
  sections_[section][key] = std::move(v);
}

namespace {
[[noreturn]] void type_error(const std::string& section, const std::string& key,
                             const char* want) {
  throw std::runtime_error("config value " + section + "." + key + " is not a " + want);
}
}  // namespace

bool Config::get_bool(const std::string& s, const std::string& k, bool dflt) const {
  const ConfigValue* v = find(s, k);
  if (!v) return dflt;
  if (const bool* b = std::get_if<bool>(v)) return *b;
  type_error(s, k, "boolean");
}

std::int64_t Config::get_int(const std::string& s, const std::string& k, std::int64_t dflt) const {
  const ConfigValue* v = find(s, k);
  if (!v) return dflt;
  if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
  type_error(s, k, "integer");
}

double Config::get_real(const std::string& s, const std::string& k, double dflt) const {
  const ConfigValue* v = find(s, k);
  if (!v) return dflt;
  if (const auto* x = std::get_if<double>(v)) return *x;
  if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
  type_error(s, k, "real");
}

std::string Config::get_string(const std::string& s, const std::string& k, std::string dflt) const {
  const ConfigValue* v = find(s, k);
  if (!v) return dflt;
  if (const auto* t = std::get_if<std::string>(v)) return *t;
  type_error(s, k, "string");
}

std::vector<double> Config::get_array(const std::string& s, const std::string& k,
                                      std::vector<double> dflt) const {
  const ConfigValue* v = find(s, k);
  if (!v) return dflt;
  if (const auto* a = std::get_if<std::vector<double>>(v)) return *a;
  type_error(s, k, "array");
}

void Config::apply_override(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::runtime_error("override must look like section.key=value: " + assignment);
  std::string path = trim(assignment.substr(0, eq));
  auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
    throw std::runtime_error("override key must be section.key: " + assignment);
  set(path.substr(0, dot), path.substr(dot + 1), parse_value(assignment.substr(eq + 1)));
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [sec, kv] : sections_) {
    out += "[" + sec + "]\n";
    for (const auto& [key, val] : kv) {
      out += key + " = ";
      std::visit(
          [&out](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, bool>) {
              out += v ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
              out += std::to_string(v);
            } else if constexpr (std::is_same_v<T, double>) {
              out += format_real(v);
            } else if constexpr (std::is_same_v<T, std::string>) {
              out += "\"" + v + "\"";
            } else {
              out += "[";
              for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ", ";
                out += format_real(v[i]);
              }
              out += "]";
            }
          },
          val);
      out += "\n";
    }
  }
  return out;
}

std::uint64_t Config::hash() const {
  const std::string s = serialize();
  return fnv1a64(s.data(), s.size());
}

}  // namespace pertflow
