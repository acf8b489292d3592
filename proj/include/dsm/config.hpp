#pragma once

// Flat "key = value" configuration. Every key is declared in config_keys();
// anything else is rejected so a misspelt key never falls back to a default.

#include <dsm/errors.hpp>
#include <dsm/model.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace dsm {

struct KeyInfo {
  std::string_view key;
  std::string_view unit;
  std::string_view default_value;
  std::string_view help;
};

inline const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = {
      // model
      {"omega", "energy", "1", "cavity frequency; sets the energy unit"},
      {"delta", "omega", "1", "atomic splitting Delta"},
      {"g", "omega", "0", "rotating-wave coupling"},
      {"tau", "1", "1", "counter-rotating / rotating coupling ratio"},
      {"u", "omega", "0", "Stark coupling U"},
      {"kappa", "1", "0", "A-square coefficient, D = kappa g^2 / Delta"},
      {"n_atoms", "1", "1", "number of atoms N"},
      {"temperature", "omega", "0", "temperature T (k_B = 1); 0 selects the ground-state theory"},
      // exact diagonalization
      {"n_max", "1", "0", "photon cutoff; 0 grows it adaptively"},
      {"k_per_sector", "1", "1", "eigenpairs per parity sector"},
      {"tol", "omega", "1e-9", "eigen-residual tolerance"},
      {"tail_tol", "1", "1e-8", "adaptive cutoff: max ground-state weight in the top 10% of photon levels"},
      {"energy_tol", "omega", "1e-8", "adaptive cutoff: max change of E0 between cutoffs"},
      {"n_initial", "1", "16", "adaptive cutoff: first n_max"},
      {"n_cap", "1", "1024", "adaptive cutoff: largest n_max tried"},
      {"growth", "1", "1.5", "adaptive cutoff: n_max growth factor"},
      {"dense_threshold", "1", "2000", "dense solver at or below this dimension"},
      {"seed", "1", "12345", "solver start-vector seed"},
      // sweep
      {"axis1", "name", "", "first sweep axis: g, U, tau, kappa, delta, T or N"},
      {"axis1_min", "axis", "0", "first axis start"},
      {"axis1_max", "axis", "0", "first axis end"},
      {"axis1_points", "1", "2", "first axis point count"},
      {"axis1_values", "list", "", "first axis as an explicit comma-separated list (overrides min/max/points)"},
      {"axis2", "name", "", "optional second sweep axis"},
      {"axis2_min", "axis", "0", "second axis start"},
      {"axis2_max", "axis", "0", "second axis end"},
      {"axis2_points", "1", "2", "second axis point count"},
      {"axis2_values", "list", "", "second axis as an explicit list"},
      {"g_scale", "name", "absolute",
       "g values are 'absolute', in units of the ground-state critical coupling ('gc0'), or (thermal, landscape) of g_c at the configured T ('gc_t')"},
      {"observables", "list", "", "comma-separated output columns (see README)"},
      {"workers", "1", "1", "parallel workers; 0 uses all cores"},
      {"output", "path", "", "output file; empty writes to stdout"},
      {"format", "name", "csv", "csv or json"},
      {"boundary_observable", "name", "", "sweep: column whose threshold crossing along g marks the phase boundary"},
      {"boundary_threshold", "1", "0.01", "sweep: threshold for boundary_observable"},
      {"boundary_output", "path", "", "sweep: boundary table file"},
      // landscape
      {"x_min", "1", "-1.5", "landscape: Re(alpha) start (intensive)"},
      {"x_max", "1", "1.5", "landscape: Re(alpha) end"},
      {"y_min", "1", "-1.5", "landscape: Im(alpha) start"},
      {"y_max", "1", "1.5", "landscape: Im(alpha) end"},
      {"resolution", "1", "121", "landscape: grid points per axis (>= 32)"},
      // scaling
      {"input", "path", "", "scaling: CSV produced by sweep"},
      {"control", "name", "g", "scaling: control column"},
      {"size_column", "name", "N", "scaling: system-size column"},
      {"observable", "name", "epsilon", "scaling: observable column"},
      {"critical", "control", "0", "scaling: critical value of the control parameter; 0 uses g_c0 of the model keys"},
      {"beta_q", "1", "0.5", "scaling: exponent beta_Q for the collapse"},
      {"nu", "1", "1.5", "scaling: correlation exponent nu"},
      {"window_lo", "1", "0.01", "scaling: lower edge of the reduced-variable window"},
      {"window_hi", "1", "0.1", "scaling: upper edge of the reduced-variable window"},
      {"side", "name", "below", "scaling: fit points 'below' or 'above' the critical value"},
  };
  return keys;
}

inline const KeyInfo* find_key(std::string_view key) {
  for (const auto& k : config_keys())
    if (k.key == key) return &k;
  return nullptr;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

class Config {
public:
  static Config parse(std::string_view text, std::string_view origin = "<config>") {
    Config c;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      const std::string where = std::string(origin) + ":" + std::to_string(line_no);
      if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
      const auto key = std::string(detail::trim(line.substr(0, eq)));
      if (c.values_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
      c.set(key, std::string(detail::trim(line.substr(eq + 1))), where);
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  void set(const std::string& key, const std::string& value, std::string_view where = "override") {
    if (!find_key(key)) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    values_[key] = value;
  }

  /// "key=value" from the command line.
  void apply_override(std::string_view kv) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(kv) + "' is not key=value");
    set(std::string(detail::trim(kv.substr(0, eq))), std::string(detail::trim(kv.substr(eq + 1))));
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const {
    const auto* info = find_key(key);
    if (!info) throw ConfigError("unknown key '" + key + "'");
    const auto it = values_.find(key);
    return it != values_.end() ? it->second : std::string(info->default_value);
  }

  double get_double(const std::string& key) const {
    const auto s = get_string(key);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      throw ConfigError("key '" + key + "': '" + s + "' is not a number");
    return v;
  }

  long get_int(const std::string& key) const {
    const auto s = get_string(key);
    long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
    return v;
  }

  /// Explicitly set keys as sorted "key=value" lines.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }

  /// 64-bit FNV-1a of canonical().
  std::uint64_t hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : canonical()) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    return h;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

inline ModelParams model_params(const Config& c) {
  ModelParams p;
  p.omega = c.get_double("omega");
  p.delta = c.get_double("delta");
  p.g = c.get_double("g");
  p.tau = c.get_double("tau");
  p.u = c.get_double("u");
  p.kappa = c.get_double("kappa");
  const long n = c.get_int("n_atoms");
  if (n < 1 || n > 1'000'000'000) throw ConfigError("n_atoms must be a positive integer");
  p.n_atoms = static_cast<int>(n);
  try {
    p.validate();
  } catch (const InvalidParameters& e) {
    throw ConfigError(e.what());
  }
  return p;
}

/// Comma-separated items, blanks dropped.
inline std::vector<std::string> split_list(std::string_view list) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < list.size()) {
    auto comma = list.find(',', pos);
    if (comma == std::string_view::npos) comma = list.size();
    const auto item = detail::trim(list.substr(pos, comma - pos));
    if (!item.empty()) out.emplace_back(item);
    pos = comma + 1;
  }
  return out;
}

inline std::vector<double> parse_number_list(std::string_view list, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(list)) {
    double v = 0.0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (r.ec != std::errc() || r.ptr != item.data() + item.size())
      throw ConfigError("key '" + key + "': '" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

/// Help text listing every key with its unit and default.
inline std::string describe_keys() {
  std::string out = "Configuration keys (energies in units of omega):\n";
  for (const auto& k : config_keys()) {
    std::string line = "  " + std::string(k.key);
    line.resize(std::max<std::size_t>(line.size() + 1, 24), ' ');
    line += "[" + std::string(k.unit) + "] ";
    line += std::string(k.help);
    if (!k.default_value.empty()) line += " (default " + std::string(k.default_value) + ")";
    out += line + "\n";
  }
  return out;
}

}  // namespace dsm
