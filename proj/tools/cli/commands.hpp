#pragma once

// Subcommand implementations: solve, classify, verify, oracle, sweep. Each
// writes its artifacts under the configured output directory and returns the
// process exit code (0 success, 2 regime-flagged outcome, 1 error or failure).

#include "cli/config.hpp"
#include "choquard/suite.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace choquard::cli {

namespace fs = std::filesystem;

inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_regime = 2;

/// Regime label, computed exactly when alpha, s and p parse as rationals.
inline RegimeLabel classify_config(const RunConfig& c) {
  try {
    return classify(c.params.n, parse_rational(c.alpha_text), parse_rational(c.s_text), parse_rational(c.p_text));
  } catch (const Error&) {
    return classify(c.params);
  }
}

/// Labels under which a diverging flow is the expected outcome.
inline bool divergence_expected(RegimeLabel r) {
  return r == RegimeLabel::L2Critical || r == RegimeLabel::UnboundedBelow || r == RegimeLabel::HLSCritical ||
         r == RegimeLabel::Supercritical;
}

inline std::string regime_cell(const SolveReport& r, RegimeLabel label) {
  std::string s = to_string(label);
  if (r.diverged) s += ":diverged(" + to_string(r.divergence) + ")";
  return s;
}

inline int solve_exit_code(const SolveReport& r, RegimeLabel label) {
  if (is_nonexistence_label(label)) return exit_regime;
  if (r.diverged) return divergence_expected(label) ? exit_regime : exit_error;
  return r.converged ? exit_ok : exit_error;
}

inline json header(const RunConfig& c) {
  return json{{"version", version_string}, {"seed", c.seed}, {"config", echo(c)}};
}

inline std::string comment_line(const RunConfig& c) {
  return "# " + std::string(version_string) + " seed=" + std::to_string(c.seed) + " config=" + echo(c).dump() + "\n";
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
}

inline json exponents_json(const RunConfig& c) {
  json j = io::to_json(critical_exponents(c.params.n, c.params.alpha, c.params.s));
  try {
    const auto ex = critical_exponents(c.params.n, parse_rational(c.alpha_text), parse_rational(c.s_text));
    json exact{{"lower", ex.lower.str()}, {"s_upper", ex.s_upper.str()}, {"l2_critical", ex.l2_critical.str()}};
    exact["hls_upper"] = ex.hls_upper ? json(ex.hls_upper->str()) : json(nullptr);
    j["exact"] = exact;
  } catch (const Error&) {
  }
  return j;
}

// ---------------------------------------------------------------------------
// solve

struct SolveOutcome {
  Field field;
  SolveReport report;
  RegimeLabel label;
  json doc;
  int exit_code = exit_error;
};

/// Resolution study: re-solve at (2N, 1.5L) and compare the residuals, plus a
/// dilation cross-check of closed-form scaling against spectral resampling.
inline json resolution_study(const RunConfig& c, const Field& u, const SolveReport& base) {
  json j;
  const GridSpec fine = make_grid(c.grid.n, 2 * c.grid.N, 1.5 * c.grid.L);
  SolverOptions o = c.solver;
  o.resolution_study = false;
  o.record_history = false;
  auto [uf, rf] = solve_ground_state(c.params, fine, o);
  j["fine_grid"] = io::to_json(fine);
  j["fine_converged"] = rf.converged;
  j["fine_iterations"] = rf.iterations;
  j["fine_I"] = rf.breakdown.I;
  j["pohozaev_rel"] = {base.pohozaev_rel, rf.pohozaev_rel};
  j["nehari_rel"] = {base.nehari_rel, rf.nehari_rel};
  j["equation_rel"] = {base.equation_rel, rf.equation_rel};
  j["pohozaev_ratio"] = base.pohozaev_rel > 0.0 ? rf.pohozaev_rel / base.pohozaev_rel : 0.0;
  const Discretization disc(c.grid, c.params, c.solver.riesz);
  json dil = json::array();
  for (const auto& pt : dilation_energy_curve(u, disc, {0.5, 0.75, 1.0, 1.25, 1.5}, true)) {
    dil.push_back(json{{"K", pt.K},
                       {"closed_form", pt.I},
                       {"resampled", *pt.resampled},
                       {"rel_diff", verify::rel_err(*pt.resampled, pt.I)}});
  }
  j["dilation_cross_check"] = dil;
  return j;
}

inline SolveOutcome solve_config(const RunConfig& c, bool with_study) {
  validate(c);
  const RegimeLabel label = classify_config(c);
  auto [u, report] = solve_ground_state(c.params, c.grid, c.solver);
  report.regime = to_string(label);
  json doc = header(c);
  doc["regime"] = to_string(label);
  doc["exponents"] = exponents_json(c);
  doc["report"] = io::to_json(report);
  doc["outcome"] = report.converged ? "converged" : (report.diverged ? "diverged" : "not_converged");
  if (is_nonexistence_label(label)) doc["contradiction"] = io::to_json(nonexistence_contradiction(report.breakdown, c.params));
  if (with_study && c.solver.resolution_study) doc["resolution_study"] = resolution_study(c, u, report);
  const int code = solve_exit_code(report, label);
  doc["exit_code"] = code;
  return {std::move(u), std::move(report), label, std::move(doc), code};
}

inline int run_solve(const RunConfig& c, std::ostream& log) {
  SolveOutcome r = solve_config(c, true);
  ensure_dir(c.out);
  io::write_json(c.out + "/report.json", r.doc);
  {
    std::ofstream os(c.out + "/history.csv");
    if (!os) throw Error("cannot write '" + c.out + "/history.csv'");
    os << comment_line(c);
    io::write_history_csv(os, r.report.history);
  }
  io::write_field_binary(c.out + "/field.bin", r.field);
  log << std::setprecision(10) << "regime " << to_string(r.label) << ", " << r.doc["outcome"].get<std::string>()
      << " after " << r.report.iterations << " iterations; I = " << r.report.breakdown.I
      << ", Lambda = " << r.report.Lambda << ", pohozaev_rel = " << r.report.pohozaev_rel
      << ", nehari_rel = " << r.report.nehari_rel << "\n";
  if (r.doc.contains("contradiction")) {
    const auto& k = r.doc["contradiction"];
    log << "nonexistence identity " << k["identity"].get<std::string>() << ": lhs = " << k["lhs"].get<double>()
        << ", rhs = " << k["rhs"].get<double>() << "\n";
  }
  log << "wrote " << c.out << "/{report.json,history.csv,field.bin}\n";
  return r.exit_code;
}

// ---------------------------------------------------------------------------
// classify

inline json classify_record(const RunConfig& c) {
  validate(c);
  const RegimeLabel label = classify_config(c);
  const CriticalExponents ex = critical_exponents(c.params.n, c.params.alpha, c.params.s);
  json rec = header(c);
  rec["exponents"] = exponents_json(c);
  rec["label"] = to_string(label);
  json th;
  th["p"] = c.params.p;
  const bool gn_defined = c.params.p >= ex.lower * (1.0 - 1e-12) && c.params.p <= ex.l2_critical * (1.0 + 1e-12);
  std::optional<double> C = c.C_np;
  std::string source = C ? "config" : "";
  if (!C && gn_defined && c.params.n == 3) {
    verify::GNSearchOptions so;
    so.allow_out_of_range = true;
    so.riesz = c.solver.riesz;
    C = verify::estimate_gn_constant(c.params, so).value;
    source = "estimated (Gaussian family lower bound)";
  }
  th["C_np"] = C ? json(*C) : json(nullptr);
  th["C_np_source"] = C ? json(source) : json("unavailable");
  th["mu_star_equivalence"] = nullptr;
  th["mu_star_l2critical"] = nullptr;
  if (C) {
    if (label == RegimeLabel::L2Critical) {
      th["mu_star_l2critical"] = mu_star_l2critical(c.params.n, c.params.alpha, c.params.tau, *C);
    } else if (c.params.p < ex.l2_critical && c.params.p > 1.0) {
      th["mu_star_equivalence"] = mu_star_equivalence(c.params.n, c.params.alpha, c.params.p, c.params.tau, *C);
    }
  }
  rec["thresholds"] = th;
  return rec;
}

inline int run_classify(const RunConfig& c, std::ostream& log) {
  const json rec = classify_record(c);
  ensure_dir(c.out);
  io::write_json(c.out + "/classify.json", rec);
  log << json{{"exponents", rec["exponents"]}, {"label", rec["label"]}, {"thresholds", rec["thresholds"]}}.dump(2)
      << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------------------
// verify / oracle

inline int run_checks(const RunConfig& c, verify::Suite suite, const std::string& name, std::ostream& log) {
  verify::SuiteOptions so;
  so.seed = c.seed;
  so.corrupt_multiplier = c.corrupt_multiplier;
  const auto results = verify::run_suite(suite, so);
  json doc = header(c);
  json checks = json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    checks.push_back(json{{"name", r.name},
                          {"measured", r.measured},
                          {"tolerance", r.tolerance},
                          {"passed", r.passed},
                          {"detail", r.detail}});
    log << (r.passed ? "PASS " : "FAIL ") << r.name << "  measured=" << std::setprecision(4) << std::scientific
        << r.measured << " tol=" << r.tolerance << std::defaultfloat << (r.detail.empty() ? "" : "  " + r.detail)
        << "\n";
  }
  doc["checks"] = checks;
  doc["passed"] = all;
  ensure_dir(c.out);
  io::write_json(c.out + "/" + name + ".json", doc);
  log << (all ? "all checks passed" : "some checks FAILED") << " (" << results.size() << " checks)\n";
  return all ? exit_ok : exit_error;
}

inline int run_verify(const RunConfig& c, std::ostream& log) {
  return run_checks(c, verify::suite_from_string(c.suite), "verify", log);
}

inline int run_oracle(const RunConfig& c, int dim, std::ostream& log) {
  if (dim != 1 && dim != 3) throw ConfigError("oracle --dim must be 1 or 3");
  return run_checks(c, dim == 1 ? verify::Suite::oracle_1d : verify::Suite::operators, "oracle", log);
}

// ---------------------------------------------------------------------------
// sweep

inline const char* sweep_columns =
    "n,alpha,s,p,lambda,mu,tau,N,L,converged,iters,H,grad,semi,A,S,I,Lambda,delta,nehari_rel,pohozaev_rel,"
    "energy_gap_rel,regime";

/// Cartesian product of the sweep axes, first axis outermost.
inline std::vector<RunConfig> expand_sweep(const RunConfig& base) {
  std::vector<RunConfig> rows{base};
  for (const auto& [axis, values] : base.sweep) {
    std::vector<RunConfig> next;
    next.reserve(rows.size() * values.size());
    for (const auto& r : rows) {
      for (const auto& v : values) {
        RunConfig rc = r;
        apply_key(rc, axis, v);
        next.push_back(std::move(rc));
      }
    }
    rows = std::move(next);
  }
  for (auto& r : rows) r.sweep.clear();
  return rows;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

/// Shortest round-trip decimal form.
inline std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Per-row record: the solve document on success, or the error message.
inline json sweep_row(const RunConfig& rc, std::size_t index) {
  json row{{"index", index}, {"params", io::to_json(rc.params)}, {"grid", io::to_json(rc.grid)}};
  try {
    SolveOutcome r = solve_config(rc, true);
    row["ok"] = true;
    row["regime_cell"] = regime_cell(r.report, r.label);
    row["solve"] = std::move(r.doc);
  } catch (const std::exception& e) {
    row["ok"] = false;
    row["error"] = e.what();
  }
  return row;
}

inline std::string csv_row(const json& row) {
  const auto& p = row["params"];
  const auto& g = row["grid"];
  std::ostringstream os;
  os << p["n"].get<int>() << ',' << fmt(p["alpha"].get<double>()) << ',' << fmt(p["s"].get<double>()) << ','
     << fmt(p["p"].get<double>()) << ',' << fmt(p["lambda"].get<double>()) << ',' << fmt(p["mu"].get<double>()) << ','
     << fmt(p["tau"].get<double>()) << ',' << g["N"].get<std::size_t>() << ',' << fmt(g["L"].get<double>()) << ',';
  if (!row["ok"].get<bool>()) {
    os << "0,,,,,,,,,,,,,," << csv_escape("error: " + row["error"].get<std::string>());
    return os.str();
  }
  const auto& r = row["solve"]["report"];
  const auto& b = r["breakdown"];
  os << (r["converged"].get<bool>() ? 1 : 0) << ',' << r["iterations"].get<int>();
  for (const char* k : {"H", "grad", "semi", "A", "S", "I"}) os << ',' << fmt(b[k].get<double>());
  for (const char* k : {"Lambda", "delta", "nehari_rel", "pohozaev_rel", "energy_gap_rel"}) {
    os << ',' << fmt(r[k].get<double>());
  }
  os << ',' << csv_escape(row["regime_cell"].get<std::string>());
  return os.str();
}

inline std::string row_path(const std::string& dir, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "row_%05zu.json", i);
  return dir + "/" + buf;
}

inline int run_sweep(const RunConfig& c, std::ostream& log) {
  validate(c);
  const std::vector<RunConfig> rows = expand_sweep(c);
  const std::string row_dir = c.out + "/rows";
  ensure_dir(row_dir);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      const json row = sweep_row(rows[i], i);
      io::write_json(row_path(row_dir, i), row);
      std::lock_guard lock(log_mutex);
      log << "row " << i + 1 << "/" << rows.size() << ": "
          << (row["ok"].get<bool>() ? row["regime_cell"].get<std::string>() : "error: " + row["error"].get<std::string>())
          << "\n";
    }
  };
  const int nthreads = std::max(1, std::min<int>(c.workers, static_cast<int>(rows.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Single final writer: merge the per-row files in row order.
  std::ofstream csv(c.out + "/sweep.csv");
  if (!csv) throw Error("cannot write '" + c.out + "/sweep.csv'");
  csv << comment_line(c) << sweep_columns << '\n';
  json merged = header(c);
  merged["rows"] = json::array();
  bool all_ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::ifstream is(row_path(row_dir, i));
    if (!is) throw Error("missing sweep row file " + row_path(row_dir, i));
    const json row = json::parse(is);
    all_ok = all_ok && row["ok"].get<bool>();
    csv << csv_row(row) << '\n';
    merged["rows"].push_back(row);
  }
  io::write_json(c.out + "/sweep.json", merged);
  log << "wrote " << c.out << "/sweep.csv (" << rows.size() << " rows)\n";
  return all_ok ? exit_ok : exit_error;
}

}  // namespace choquard::cli
