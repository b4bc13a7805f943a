#pragma once
// Sectioned key = value configuration: the on-disk format for experiments and
// the CLI.  Sections in brackets; values are booleans, integers, reals,
// strings (quoted or bare identifiers) or flat arrays of reals; '#' comments.
// serialize() is canonical (sorted, %.17g), so hash() doubles as a run id.

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace pertflow {

using ConfigValue =
    std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

class Config {
 public:
  using Section = std::map<std::string, ConfigValue>;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);
  static ConfigValue parse_value(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, ConfigValue v);

  // typed getters with defaults; integer values promote to real on demand
  bool get_bool(const std::string& section, const std::string& key, bool dflt) const;
  std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t dflt) const;
  double get_real(const std::string& section, const std::string& key, double dflt) const;
  std::string get_string(const std::string& section, const std::string& key, std::string dflt) const;
  std::vector<double> get_array(const std::string& section, const std::string& key,
                                std::vector<double> dflt) const;

  // "section.key=value" assignments, e.g. from --set flags
  void apply_override(const std::string& assignment);

  std::string serialize() const;
  std::uint64_t hash() const;  // FNV-1a64 of serialize()

  const std::map<std::string, Section>& sections() const { return sections_; }

 private:
  const ConfigValue* find(const std::string& section, const std::string& key) const;
  std::map<std::string, Section> sections_;
};

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull);
std::string format_real(double x);  // shortest round-trip-safe (%.17g)

}  // namespace pertflow
