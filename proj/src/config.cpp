#include "polyattr/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace polyattr::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0, hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

double parse_double(const std::string& key, const std::string& raw) {
  try {
    std::size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + raw + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& raw) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(raw, &used);
    if (used != raw.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: '" + raw + "'");
  }
}

enum class KeyType { Double, Int, Uint, Bool, String };

// min/max bounds apply to numeric types; NaN means unbounded.
struct KeySpec {
  const char* name;
  KeyType type;
  double min = std::nan("");
  double max = std::nan("");
  const char* choices = nullptr;  // '|'-separated for String
};

const KeySpec kSchema[] = {
    {"mode", KeyType::String, 0, 0, "iterate|bound|simulate|pair|cloud|rates"},
    {"seed", KeyType::Uint},
    {"out.dir", KeyType::String},
    {"out.svg", KeyType::Bool},

    {"solver.length", KeyType::Double, 1e-12},
    {"solver.n_modes", KeyType::Int, 1, 4096},
    {"solver.dt", KeyType::Double, 1e-12},
    {"solver.k", KeyType::Double, 0},
    {"solver.p", KeyType::Double, 1e-12},
    {"solver.f.c3", KeyType::Double, 0},
    {"solver.f.c1", KeyType::Double},
    {"solver.h.mode", KeyType::Int, 1},
    {"solver.h.amp", KeyType::Double},
    {"solver.kernel.sigma", KeyType::Double},
    {"solver.kernel.phi_mode", KeyType::Int, 1},
    {"solver.kernel.psi_mode", KeyType::Int, 1},

    {"sim.t_end", KeyType::Double, 1e-12},
    {"sim.record_every", KeyType::Int, 1},
    {"sim.snapshots", KeyType::Bool},
    {"sim.snapshot_every", KeyType::Int, 1},
    {"sim.init.kind", KeyType::String, 0, 0, "mode|random"},
    {"sim.init.mode", KeyType::Int, 1},
    {"sim.init.a", KeyType::Double},
    {"sim.init.b", KeyType::Double},
    {"sim.init.radius", KeyType::Double, 0},

    {"pair.T", KeyType::Double, 1e-12},
    {"pair.delta", KeyType::Double, 0},
    {"pair.count", KeyType::Int, 1, 100000},
    {"pair.record_every", KeyType::Int, 1},

    {"rates.beta", KeyType::Double, 1e-12, 1.0 - 1e-12},
    {"rates.bigC", KeyType::Double, 1e-12},
    {"rates.bigT", KeyType::Double, 1e-12},
    {"rates.y0", KeyType::Double, 0},
    {"rates.n", KeyType::Int, 1, 10000000},
    {"bound.alpha0", KeyType::Double, 0},
    {"bound.t_max", KeyType::Double, 0},

    {"harness.cloud_size", KeyType::Int, 1, 100000},
    {"harness.burn_in", KeyType::Double, 0},
    {"harness.horizon", KeyType::Double, 1e-12},
    {"harness.sample_dt", KeyType::Double, 1e-12},
    {"harness.init_radius", KeyType::Double, 1e-12},
    {"harness.ref_size", KeyType::Int, 1, 100000},
    {"harness.ref_thin_eps", KeyType::Double, 0},
    {"harness.cover_m", KeyType::Int, 1, 10000},
    {"harness.calib_size", KeyType::Int, 1, 10000},
    {"harness.calib_radius", KeyType::Double, 1e-12},
    {"harness.calib_horizon", KeyType::Double, 1e-12},
    {"harness.fit_offset", KeyType::Double, 0},
    {"harness.cp_samples", KeyType::Int, 1, 100000000},
    {"harness.cp_dim", KeyType::Int, 1, 1024},
    {"harness.threads", KeyType::Int, 0, 1024},

    {"fit.t_end", KeyType::Double, 1e-12},
    {"fit.window_lo", KeyType::Double, 0},
    {"fit.window_hi", KeyType::Double, 0},
    {"fit.samples", KeyType::Int, 8, 1000000},
};

const KeySpec* find_spec(const std::string& key) {
  for (const auto& spec : kSchema)
    if (key == spec.name) return &spec;
  return nullptr;
}

void check_value(const KeySpec& spec, const std::string& raw) {
  switch (spec.type) {
    case KeyType::Double: {
      const double v = parse_double(spec.name, raw);
      if (!std::isnan(spec.min) && v < spec.min)
        throw ConfigError(std::string("config key '") + spec.name +
                          "': value below allowed range");
      if (!std::isnan(spec.max) && v > spec.max)
        throw ConfigError(std::string("config key '") + spec.name +
                          "': value above allowed range");
      break;
    }
    case KeyType::Int:
    case KeyType::Uint: {
      const std::int64_t v = parse_int(spec.name, raw);
      if (spec.type == KeyType::Uint && v < 0)
        throw ConfigError(std::string("config key '") + spec.name +
                          "': must be non-negative");
      if (!std::isnan(spec.min) && v < static_cast<std::int64_t>(spec.min))
        throw ConfigError(std::string("config key '") + spec.name +
                          "': value below allowed range");
      if (!std::isnan(spec.max) && v > static_cast<std::int64_t>(spec.max))
        throw ConfigError(std::string("config key '") + spec.name +
                          "': value above allowed range");
      break;
    }
    case KeyType::Bool: {
      if (raw != "0" && raw != "1" && raw != "true" && raw != "false")
        throw ConfigError(std::string("config key '") + spec.name +
                          "': expected 0/1/true/false");
      break;
    }
    case KeyType::String: {
      if (spec.choices) {
        std::string choices(spec.choices);
        bool ok = false;
        std::stringstream ss(choices);
        std::string item;
        while (std::getline(ss, item, '|'))
          if (item == raw) ok = true;
        if (!ok)
          throw ConfigError(std::string("config key '") + spec.name +
                            "': '" + raw + "' is not one of " + choices);
      }
      break;
    }
  }
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key or value");
    if (cfg.values_.count(key))
      throw ConfigError("config key '" + key + "': duplicated");
    cfg.values_[key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, it->second);
}

double Config::require_double(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("missing required config key '" + key + "'");
  return parse_double(key, it->second);
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_int(key, it->second);
}

std::int64_t Config::require_int(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("missing required config key '" + key + "'");
  return parse_int(key, it->second);
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::int64_t v = parse_int(key, it->second);
  if (v < 0) throw ConfigError("config key '" + key + "': must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return it->second == "1" || it->second == "true";
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

const std::vector<std::string>& known_modes() {
  static const std::vector<std::string> modes = {"iterate", "bound", "simulate",
                                                 "pair",    "cloud", "rates"};
  return modes;
}

void validate_schema(const Config& cfg) {
  for (const auto& [key, value] : cfg.entries()) {
    const KeySpec* spec = find_spec(key);
    if (!spec) throw ConfigError("unknown config key '" + key + "'");
    check_value(*spec, value);
  }
}

void validate_mode_requirements(const Config& cfg, const std::string& mode) {
  const auto require = [&](std::initializer_list<const char*> keys) {
    for (const char* key : keys)
      if (!cfg.has(key))
        throw ConfigError("mode '" + mode + "': missing required config key '" +
                          std::string(key) + "'");
  };
  if (mode == "iterate")
    require({"rates.beta", "rates.bigC", "rates.y0"});
  else if (mode == "bound")
    require({"rates.beta", "rates.bigC", "rates.bigT", "rates.y0"});
  else if (mode == "simulate" || mode == "pair" || mode == "cloud" ||
           mode == "rates")
    require({"solver.length", "solver.n_modes", "solver.dt", "solver.k",
             "solver.p"});
  else
    throw ConfigError("unknown mode '" + mode + "'");
}

}  // namespace polyattr::config
