// Flat "key = value" experiment configuration with dotted section prefixes.
// Every key is declared in a schema table; unknown keys and out-of-range
// values are rejected before any computation runs.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyattr::config {

/// Invalid configuration: unknown key, bad value, missing requirement.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  static Config parse_file(const std::filesystem::path& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value);

  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::int64_t require_int(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Known experiment modes, in the order the CLI lists them.
const std::vector<std::string>& known_modes();

/// Schema pass: every present key must be declared, parse to its declared
/// type and satisfy its range constraint.  Throws ConfigError naming the
/// offending key.
void validate_schema(const Config& cfg);

/// Mode pass: every key the given mode requires must be present.
void validate_mode_requirements(const Config& cfg, const std::string& mode);

}  // namespace polyattr::config
