#pragma once

// Run configuration for the command-line front end. The file format is a flat
// JSON object; every key is optional and defaults to the values below.
//
//   problem:  n alpha s p lambda mu tau        (alpha, s, p also as "5/3")
//   grid:     N L
//   solver:   dt max_iters tol_energy tol_residual shift seed_width
//             energy_floor max_dt_halvings check_every multiplier_correction
//             riesz_boundary zero_mode zero_mode_value resolution_study
//   run:      seed workers out C_np suite corrupt_multiplier
//   sweep:    {"axis": [values, ...], ...}  axes: alpha s p lambda mu tau N L

#include "choquard/choquard.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace choquard::cli {

using json = nlohmann::ordered_json;

struct RunConfig {
  ProblemParams params{};
  GridSpec grid{3, 32, 16.0};
  SolverOptions solver{};
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = "out";
  std::optional<double> C_np;
  std::string suite = "all";
  bool corrupt_multiplier = false;
  std::vector<std::pair<std::string, std::vector<json>>> sweep;
  /// Exact text of alpha, s, p, kept for rational classification.
  std::string alpha_text = "2";
  std::string s_text = "1/2";
  std::string p_text = "9/5";
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes{"alpha", "s", "p", "lambda", "mu", "tau", "N", "L"};
  return axes;
}

namespace detail {
inline std::string number_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

inline double as_real(const std::string& key, const json& v) {
  try {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_rational(v.get<std::string>()).value();
  } catch (const Error& e) {
    throw ConfigError("config field '" + key + "': " + e.what());
  }
  throw ConfigError("config field '" + key + "': expected a number");
}

inline std::int64_t as_integer(const std::string& key, const json& v) {
  if (!v.is_number_integer()) throw ConfigError("config field '" + key + "': expected an integer");
  return v.get<std::int64_t>();
}

inline bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) throw ConfigError("config field '" + key + "': expected true or false");
  return v.get<bool>();
}

inline std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) throw ConfigError("config field '" + key + "': expected a string");
  return v.get<std::string>();
}
}  // namespace detail

/// Applies one key to the config; throws ConfigError naming the key.
inline void apply_key(RunConfig& c, const std::string& key, const json& v) {
  using namespace detail;
  if (key == "n") c.params.n = c.grid.n = static_cast<int>(as_integer(key, v));
  else if (key == "alpha") { c.params.alpha = as_real(key, v); c.alpha_text = number_text(v); }
  else if (key == "s") { c.params.s = as_real(key, v); c.s_text = number_text(v); }
  else if (key == "p") { c.params.p = as_real(key, v); c.p_text = number_text(v); }
  else if (key == "lambda") c.params.lambda = as_real(key, v);
  else if (key == "mu") c.params.mu = as_real(key, v);
  else if (key == "tau") c.params.tau = as_real(key, v);
  else if (key == "N") {
    const auto N = as_integer(key, v);
    if (N < 1) throw ConfigError("config field 'N': must be positive");
    c.grid.N = static_cast<std::size_t>(N);
  } else if (key == "L") c.grid.L = as_real(key, v);
  else if (key == "dt") c.solver.dt = as_real(key, v);
  else if (key == "max_iters") c.solver.max_iters = static_cast<int>(as_integer(key, v));
  else if (key == "tol_energy") c.solver.tol_energy = as_real(key, v);
  else if (key == "tol_residual") c.solver.tol_residual = as_real(key, v);
  else if (key == "shift") c.solver.shift = as_real(key, v);
  else if (key == "seed_width") c.solver.seed_width = as_real(key, v);
  else if (key == "energy_floor") c.solver.energy_floor = as_real(key, v);
  else if (key == "max_dt_halvings") c.solver.max_dt_halvings = static_cast<int>(as_integer(key, v));
  else if (key == "check_every") c.solver.check_every = static_cast<int>(as_integer(key, v));
  else if (key == "multiplier_correction") c.solver.multiplier_correction = as_bool(key, v);
  else if (key == "resolution_study") c.solver.resolution_study = as_bool(key, v);
  else if (key == "riesz_boundary") {
    try {
      c.solver.riesz.boundary = riesz_boundary_from_string(as_string(key, v));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("config field 'riesz_boundary': " + std::string(e.what()));
    }
  } else if (key == "zero_mode") {
    try {
      c.solver.riesz.zero_mode.policy = zero_mode_policy_from_string(as_string(key, v));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("config field 'zero_mode': " + std::string(e.what()));
    }
  } else if (key == "zero_mode_value") c.solver.riesz.zero_mode.value = as_real(key, v);
  else if (key == "seed") {
    const auto s = as_integer(key, v);
    if (s < 0) throw ConfigError("config field 'seed': must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "workers") {
    const auto w = as_integer(key, v);
    if (w < 1) throw ConfigError("config field 'workers': must be >= 1");
    c.workers = static_cast<int>(w);
  } else if (key == "out") c.out = as_string(key, v);
  else if (key == "C_np") {
    const double C = as_real(key, v);
    if (!(C > 0.0)) throw ConfigError("config field 'C_np': must be > 0");
    c.C_np = C;
  } else if (key == "suite") c.suite = as_string(key, v);
  else if (key == "corrupt_multiplier") c.corrupt_multiplier = as_bool(key, v);
  else if (key == "sweep") {
    if (!v.is_object()) throw ConfigError("config field 'sweep': expected an object of axis lists");
    c.sweep.clear();
    for (const auto& [axis, values] : v.items()) {
      bool known = false;
      for (const auto& a : sweep_axes()) known = known || a == axis;
      if (!known) throw ConfigError("config field 'sweep." + axis + "': unknown sweep axis");
      if (!values.is_array() || values.empty()) {
        throw ConfigError("config field 'sweep." + axis + "': expected a nonempty list");
      }
      c.sweep.emplace_back(axis, std::vector<json>(values.begin(), values.end()));
    }
  } else {
    throw ConfigError("config field '" + key + "': unknown key");
  }
}

/// Checks all nested invariants, prefixing messages with the config context.
inline void validate(const RunConfig& c) {
  try {
    c.params.validate();
    make_grid(c.grid.n, c.grid.N, c.grid.L);
    c.solver.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

/// Line number (1-based) of a byte offset in text.
inline std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) line += text[i] == '\n';
  return line;
}

inline void apply_json(RunConfig& c, const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ":" + std::to_string(line_of(text, e.byte)) + ": malformed config: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(source + ": config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    try {
      apply_key(c, key, value);
    } catch (const ConfigError& e) {
      // Locate the key in the source text for the diagnostic.
      const auto pos = text.find("\"" + key + "\"");
      const std::string where = pos == std::string::npos ? source : source + ":" + std::to_string(line_of(text, pos));
      throw ConfigError(where + ": " + e.what());
    }
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  RunConfig c;
  apply_json(c, ss.str(), path);
  return c;
}

/// "--set key=value": value parsed as JSON, or taken as a string if it is not JSON.
inline void apply_override(RunConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json v;
  try {
    v = json::parse(text);
  } catch (const json::parse_error&) {
    v = text;
  }
  apply_key(c, key, v);
}

/// "N,L" from --grid.
inline void apply_grid_flag(RunConfig& c, const std::string& spec) {
  const auto comma = spec.find(',');
  if (comma == std::string::npos) throw ConfigError("--grid expects N,L");
  try {
    std::size_t used = 0;
    const long N = std::stol(spec.substr(0, comma), &used);
    if (used != comma || N < 1) throw ConfigError("--grid: bad N");
    const std::string Ls = spec.substr(comma + 1);
    const double L = std::stod(Ls, &used);
    if (used != Ls.size()) throw ConfigError("--grid: bad L");
    c.grid.N = static_cast<std::size_t>(N);
    c.grid.L = L;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("--grid expects N,L with integer N and real L");
  }
}

/// Inputs that determine the results; the output directory and worker count
/// are left out so that outputs do not depend on them.
inline json echo(const RunConfig& c) {
  json j = io::to_json(c.params);
  j["alpha"] = c.alpha_text.find('/') != std::string::npos ? json(c.alpha_text) : json(c.params.alpha);
  j["s"] = c.s_text.find('/') != std::string::npos ? json(c.s_text) : json(c.params.s);
  j["p"] = c.p_text.find('/') != std::string::npos ? json(c.p_text) : json(c.params.p);
  j["N"] = c.grid.N;
  j["L"] = c.grid.L;
  j.update(io::to_json(c.solver));
  j["seed"] = c.seed;
  j["C_np"] = c.C_np ? json(*c.C_np) : json(nullptr);
  j["suite"] = c.suite;
  j["corrupt_multiplier"] = c.corrupt_multiplier;
  json sw = json::object();
  for (const auto& [axis, values] : c.sweep) sw[axis] = values;
  j["sweep"] = sw;
  return j;
}

}  // namespace choquard::cli
