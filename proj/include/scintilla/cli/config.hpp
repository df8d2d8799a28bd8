#pragma once

// Run configuration: flat key=value files with '#' comments, overridden by
// command-line flags.

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "scintilla/error.hpp"
#include "scintilla/turbmodel.hpp"

namespace scintilla::cli {

using KeyValues = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline KeyValues parse_key_values(std::istream& in, const std::string& origin = "config") {
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_key_values(in, path);
}

/// Locale-independent strict number parsing.
inline double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto r = std::from_chars(first, last, v);
  if (t.empty() || r.ec != std::errc{} || r.ptr != last) throw ConfigError(key + ": not a number: '" + text + "'");
  return v;
}

inline int parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  int v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc{} || r.ptr != t.data() + t.size())
    throw ConfigError(key + ": not an integer: '" + text + "'");
  return v;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

struct RunConfig {
  double wavelength = 1.55e-6;  // [m]
  double w0 = 0.02;             // [m]
  double zeta0 = 1.0;           // coherent amplitude
  std::optional<double> cn2;    // [m^-2/3]
  std::vector<double> k_list;   // dimensionless strengths
  std::optional<double> kappa0; // [1/m]; default 1e-3 / w0
  double n_vk = turb::kolmogorov_n_vk();
  std::optional<double> calibrated_n_vk;

  double beta = 1.0;  // distribution
  double beta_min = 0.03;
  double beta_max = 30.0;
  int beta_steps = 61;
  double u0_max = 3.0;
  int u0_steps = 31;
  int max_order = 12;
  double rel_tol = 1e-7;
  int grid_n = 64;
  std::string out = ".";

  double k() const { return 2.0 * std::numbers::pi / wavelength; }

  BeamGeometry geometry() const {
    BeamGeometry g;
    g.k = k();
    g.w0 = w0;
    g.zeta0 = zeta0;
    return g;
  }

  /// Turbulence for a single strength: cn2 directly or the first K.
  TurbulenceParams turbulence(const BeamGeometry& g) const {
    TurbulenceParams p;
    p.n_vk = n_vk;
    p.kappa0 = kappa0 ? *kappa0 : 1e-3 / w0;
    if (cn2) {
      p.cn2 = *cn2;
    } else {
      p.cn2 = turb::cn2_from_strength(k_list.empty() ? 1.0 : k_list.front(), g);
    }
    return p;
  }

  std::vector<double> strengths_or(std::vector<double> fallback) const {
    return k_list.empty() ? fallback : k_list;
  }

  void validate() const {
    if (!(wavelength > 0.0)) throw ConfigError("wavelength must be > 0");
    if (!(w0 > 0.0)) throw ConfigError("w0 must be > 0");
    if (!(zeta0 >= 0.0)) throw ConfigError("zeta0 must be >= 0");
    if (cn2 && !k_list.empty()) throw ConfigError("give exactly one of cn2 and K");
    if (cn2 && !(*cn2 >= 0.0)) throw ConfigError("cn2 must be >= 0");
    for (double v : k_list)
      if (!(v >= 0.0)) throw ConfigError("K values must be >= 0");
    if (kappa0 && !(*kappa0 > 0.0)) throw ConfigError("kappa0 must be > 0");
    if (!(n_vk > 0.0)) throw ConfigError("n_vk must be > 0");
    if (calibrated_n_vk && !(*calibrated_n_vk > 0.0)) throw ConfigError("calibrated_n_vk must be > 0");
    if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
    if (!(beta_min > 0.0) || !(beta_max > beta_min)) throw ConfigError("need 0 < beta_min < beta_max");
    if (beta_steps < 2) throw ConfigError("beta_steps must be >= 2");
    if (!(u0_max >= 0.0) || u0_steps < 1) throw ConfigError("need u0_max >= 0 and u0_steps >= 1");
    if (max_order < 0 || max_order > 25) throw ConfigError("max_order must be in [0, 25]");
    if (!(rel_tol >= 1e-10 && rel_tol <= 1e-1)) throw ConfigError("rel_tol must be in [1e-10, 1e-1]");
    if (grid_n < 16 || grid_n % 2 != 0) throw ConfigError("grid_n must be even and >= 16");
  }
};

/// Applies key=value pairs to a configuration; unknown keys are errors.
inline void apply_settings(RunConfig& c, const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "wavelength") c.wavelength = parse_double(key, value);
    else if (key == "w0") c.w0 = parse_double(key, value);
    else if (key == "zeta0") c.zeta0 = parse_double(key, value);
    else if (key == "cn2") c.cn2 = parse_double(key, value);
    else if (key == "K") c.k_list = parse_list(key, value);
    else if (key == "kappa0") c.kappa0 = parse_double(key, value);
    else if (key == "n_vk") c.n_vk = parse_double(key, value);
    else if (key == "calibrated_n_vk") {
      if (value == "auto") c.calibrated_n_vk.reset();
      else c.calibrated_n_vk = parse_double(key, value);
    }
    else if (key == "beta") c.beta = parse_double(key, value);
    else if (key == "beta_min") c.beta_min = parse_double(key, value);
    else if (key == "beta_max") c.beta_max = parse_double(key, value);
    else if (key == "beta_steps") c.beta_steps = parse_int(key, value);
    else if (key == "u0_max") c.u0_max = parse_double(key, value);
    else if (key == "u0_steps") c.u0_steps = parse_int(key, value);
    else if (key == "max_order") c.max_order = parse_int(key, value);
    else if (key == "rel_tol") c.rel_tol = parse_double(key, value);
    else if (key == "grid_n") c.grid_n = parse_int(key, value);
    else if (key == "out") c.out = value;
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

/// defaults < file < flags
inline RunConfig resolve(const std::optional<std::string>& path, const KeyValues& flags) {
  RunConfig c;
  if (path) apply_settings(c, load_key_values(*path));
  apply_settings(c, flags);
  c.validate();
  return c;
}

}  // namespace scintilla::cli
