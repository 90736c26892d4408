#pragma once

// Serialization: the flat binary field container, CSV dumps, and JSON forms of
// parameters, options, energies and reports.
//
// Binary layout (little-endian): uint32 n, uint64 N, float64 L, then N^n
// float64 values in lexicographic (last axis fastest) order.

#include "choquard/diagnostics.hpp"
#include "choquard/functionals.hpp"
#include "choquard/grid.hpp"
#include "choquard/operators.hpp"
#include "choquard/regimes.hpp"
#include "choquard/solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace choquard {

inline constexpr const char* version_string = "choquard 0.3.0";

namespace io {

using json = nlohmann::ordered_json;

namespace detail {
template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  is.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!is) throw Error("truncated field file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}
}  // namespace detail

inline void write_field_binary(std::ostream& os, const Field& u) {
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(u.grid().n));
  detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(u.grid().N));
  detail::put_le<double>(os, u.grid().L);
  for (double v : u.values()) detail::put_le<double>(os, v);
}

inline void write_field_binary(const std::string& path, const Field& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_field_binary(os, u);
}

inline Field read_field_binary(std::istream& is) {
  const auto n = detail::get_le<std::uint32_t>(is);
  const auto N = detail::get_le<std::uint64_t>(is);
  const auto L = detail::get_le<double>(is);
  const GridSpec g = make_grid(static_cast<int>(n), static_cast<std::size_t>(N), L);
  std::vector<double> values(g.size());
  for (double& v : values) v = detail::get_le<double>(is);
  return Field(g, std::move(values));
}

inline Field read_field_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_field_binary(is);
}

/// Rows "i0,..,x0,..,value" with full round-trip precision.
inline void write_field_csv(std::ostream& os, const Field& u) {
  const GridSpec& g = u.grid();
  os << std::setprecision(17);
  for (int d = 0; d < g.n; ++d) os << 'i' << d << ',';
  for (int d = 0; d < g.n; ++d) os << 'x' << d << ',';
  os << "value\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Index idx = g.unflatten(i);
    for (int d = 0; d < g.n; ++d) os << idx[static_cast<std::size_t>(d)] << ',';
    for (int d = 0; d < g.n; ++d) os << g.coordinate(idx[static_cast<std::size_t>(d)]) << ',';
    os << u[i] << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON

inline json to_json(const GridSpec& g) { return json{{"n", g.n}, {"N", g.N}, {"L", g.L}}; }

inline json to_json(const ProblemParams& p) {
  return json{{"n", p.n},           {"alpha", p.alpha}, {"s", p.s},    {"p", p.p},
              {"lambda", p.lambda}, {"mu", p.mu},       {"tau", p.tau}};
}

inline json to_json(const RieszOptions& r) {
  json j{{"riesz_boundary", to_string(r.boundary)}, {"zero_mode", to_string(r.zero_mode.policy)}};
  if (r.zero_mode.policy == ZeroModePolicy::user) j["zero_mode_value"] = r.zero_mode.value;
  return j;
}

inline json to_json(const SolverOptions& o) {
  json j{{"dt", o.dt},
         {"max_iters", o.max_iters},
         {"tol_energy", o.tol_energy},
         {"tol_residual", o.tol_residual},
         {"shift", o.shift},
         {"seed_width", o.seed_width},
         {"energy_floor", o.energy_floor},
         {"max_dt_halvings", o.max_dt_halvings},
         {"check_every", o.check_every},
         {"multiplier_correction", o.multiplier_correction},
         {"resolution_study", o.resolution_study}};
  j.update(to_json(o.riesz));
  return j;
}

inline json to_json(const EnergyBreakdown& e) {
  return json{{"H", e.H}, {"grad", e.grad}, {"semi", e.semi}, {"T", e.T}, {"A", e.A}, {"S", e.S}, {"I", e.I}};
}

inline json to_json(const EnergyBreakdown& e, const ProblemParams& p) {
  json j = to_json(e);
  j["params"] = to_json(p);
  return j;
}

inline json to_json(const CriticalExponents& c) {
  json j{{"lower", c.lower}, {"s_upper", c.s_upper}, {"l2_critical", c.l2_critical}};
  j["hls_upper"] = c.hls_upper ? json(*c.hls_upper) : json(nullptr);
  return j;
}

inline json to_json(const ContradictionReport& r) {
  return json{{"regime", to_string(r.regime)}, {"identity", r.identity},     {"lhs", r.lhs},
              {"rhs", r.rhs},                  {"lhs_sign", r.lhs_sign},     {"rhs_sign", r.rhs_sign},
              {"opposite_signs", r.opposite_signs}, {"gap", r.gap}};
}

inline json to_json(const SolveReport& r) {
  json j{{"converged", r.converged},
         {"diverged", r.diverged},
         {"divergence", to_string(r.divergence)},
         {"iterations", r.iterations},
         {"breakdown", to_json(r.breakdown)},
         {"Lambda", r.Lambda},
         {"delta", r.delta},
         {"delta_minus_one", std::abs(r.delta - 1.0)},
         {"nehari_rel", r.nehari_rel},
         {"equation_rel", r.equation_rel},
         {"pohozaev_rel", r.pohozaev_rel},
         {"energy_gap_rel", r.energy_gap_rel},
         {"dilation_min_energy", r.dilation_min_energy},
         {"dilation_min_K", r.dilation_min_K},
         {"final_dt", r.final_dt},
         {"dt_halvings", r.dt_halvings},
         {"max_energy_increase", r.max_energy_increase},
         {"regime", r.regime},
         {"grid", to_json(r.grid)},
         {"params", to_json(r.params)},
         {"options", to_json(r.options)},
         {"warnings", r.warnings}};
  return j;
}

inline void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& rows) {
  os << std::setprecision(17) << "iteration,I,S,dt,nehari_rel,equation_rel\n";
  for (const auto& h : rows) {
    os << h.iteration << ',' << h.I << ',' << h.S << ',' << h.dt << ',' << h.nehari_rel << ',';
    if (std::isfinite(h.equation_rel)) os << h.equation_rel;
    os << '\n';
  }
}

/// Writes a JSON document with a trailing newline; throws on I/O failure.
inline void write_json(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << j.dump(2) << '\n';
}

}  // namespace io
}  // namespace choquard
