// Acceptance harness: one PASS/FAIL line per criterion.
//   acceptance        run all criteria
//   acceptance K      run criterion K (1..10)
// Exit status is nonzero iff a hard criterion fails; criterion 9 is a soft
// diagnostic and never fails the run.

#include "cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace choquard;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;
const ProblemParams base_params{3, 2.0, 0.5, 1.8, 0.05, 1.0, 1.0};

struct Outcome {
  bool passed = false;
  bool soft = false;
  std::string summary;
  std::vector<std::string> info;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Field random_field(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Field u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = normal(rng);
  return u;
}

double max_rel(const Field& a, const Field& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

/// |P| / (mu (n+alpha)/(2p) A) with mass coefficient delta.
double pohozaev_over_nonlinear(const SolveReport& r) {
  const ProblemParams& pp = r.params;
  const double scale = pp.mu * (pp.n + pp.alpha) / (2.0 * pp.p) * r.breakdown.A;
  return std::abs(pohozaev_residual(r.breakdown, pp, r.delta).raw) / scale;
}

/// |N| / (mu A) with mass coefficient delta.
double nehari_over_nonlinear(const SolveReport& r) {
  return std::abs(nehari_residual(r.breakdown, r.params, r.delta).raw) / (r.params.mu * r.breakdown.A);
}

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  Timer t;
  double worst = 0.0;
  std::vector<std::string> info;
  auto probe = [&](const std::string& name, const GridSpec& g, MultiplierKind kind, double param, std::uint64_t seed) {
    const MultiplierCache c = build_multiplier(g, kind, param);
    const Field f = random_field(g, seed);
    const double e = max_rel(apply_multiplier(f, c), direct_convolve_oracle(f, c));
    worst = std::max(worst, e);
    info.push_back(name + ": " + sci(e));
  };
  probe("riesz alpha=2, 8^3", make_grid(3, 8, 4.0), MultiplierKind::riesz, 2.0, 1);
  probe("fractional s=0.3, 8^3", make_grid(3, 8, 4.0), MultiplierKind::fractional, 0.3, 2);
  probe("fractional s=0.3, 16-pt", make_grid(1, 16, 6.0), MultiplierKind::fractional, 0.3, 3);
  probe("riesz alpha=0.5, 16-pt", make_grid(1, 16, 6.0), MultiplierKind::riesz, 0.5, 4);
  const double secs = t.seconds();
  return {worst <= 1e-10 && secs < 10.0, false,
          "operator oracle equivalence: max rel err " + sci(worst) + " (tol 1e-10), " + fixed(secs, 2) + " s (limit 10 s)",
          info};
}

Outcome criterion_2() {
  Timer t;
  WarningCapture quiet;
  std::vector<std::string> info;
  bool ok = true;
  auto check = [&](const std::string& name, double got, double want, double tol) {
    const double e = verify::rel_err(got, want);
    ok = ok && e <= tol;
    info.push_back(name + ": rel err " + sci(e) + " (tol " + sci(tol) + ")");
  };
  const GridSpec g1 = make_grid(1, 1024, 64.0);
  check("n=1 Gaussian mass", mass(sample_gaussian(g1, 1.0, 1.0)), std::sqrt(pi / 2.0), 1e-8);
  const GridSpec g3 = make_grid(3, 64, 16.0);
  const Field u3 = sample_gaussian(g3, 1.0, 1.0);
  check("n=3 Gaussian mass", mass(u3), std::pow(pi / 2.0, 1.5), 1e-8);
  check("n=3 Gaussian gradient norm", grad_norm_sq(u3), 3.0 * std::pow(pi / 2.0, 1.5), 1e-8);
  const GridSpec gs = make_grid(1, std::size_t{1} << 19, 32768.0);
  const Field us = sample_gaussian(gs, 1.0, 1.0);
  check("n=1 fractional seminorm s=0.5 vs quadrature", frac_seminorm_sq(us, 0.5),
        verify::gaussian_seminorm_1d_quadrature(0.5), 1e-8);
  const double newton = verify::newtonian_error(g3);
  ok = ok && newton <= 1e-3;
  info.push_back("Newtonian potential vs erf (64^3, L=16): max rel err " + sci(newton) + " (tol 1e-3)");
  for (double s : {0.3, 0.7}) {
    info.push_back("info: n=1 seminorm s=" + fixed(s, 1) + " rel err " +
                   sci(verify::rel_err(frac_seminorm_sq(us, s), verify::gaussian_seminorm_1d_quadrature(s))));
  }
  const double secs = t.seconds();
  ok = ok && secs < 60.0;
  return {ok, false, "closed-form functional values, " + fixed(secs, 2) + " s (limit 60 s)", info};
}

Outcome criterion_3() {
  Timer t;
  const double e = verify::gradient_check_error(base_params, make_grid(3, 32, 16.0), 1, 20);
  const double secs = t.seconds();
  return {e <= 1e-5 && secs < 60.0, false,
          "first variation vs central differences, 20 seeded pairs: worst rel err " + sci(e) + " (tol 1e-5), " +
              fixed(secs, 2) + " s (limit 60 s)",
          {}};
}

Outcome criterion_4() {
  Timer t;
  SolverOptions o;
  auto [u, r] = solve_ground_state(base_params, make_grid(3, 32, 16.0), o);
  const double neh = nehari_over_nonlinear(r);
  const double poh = pohozaev_over_nonlinear(r);
  auto [uf, rf] = solve_ground_state(base_params, make_grid(3, 64, 24.0), o);
  const double poh_f = pohozaev_over_nonlinear(rf);
  const double secs = t.seconds();
  std::vector<std::string> info;
  info.push_back("N=32 L=16: converged=" + std::string(r.converged ? "yes" : "no") + " iters=" +
                 std::to_string(r.iterations) + " nehari=" + sci(neh) + " (tol 1e-6) pohozaev=" + sci(poh) +
                 " (tol 1e-2) Lambda=" + sci(r.Lambda) + " I=" + sci(r.breakdown.I) +
                 " u(0)=" + sci(u[u.grid().origin()]) + " u(edge)=" + sci(u[u.grid().origin() - u.grid().N / 2 + 1]));
  info.push_back("N=64 L=24: converged=" + std::string(rf.converged ? "yes" : "no") + " iters=" +
                 std::to_string(rf.iterations) + " pohozaev=" + sci(poh_f) + " ratio to N=32 " + fixed(poh_f / poh, 3) +
                 " (required <= 0.5)");
  // Localized reference at stronger coupling on the same grid.
  ProblemParams strong = base_params;
  strong.mu = 30.0;
  auto [us, rs] = solve_ground_state(strong, make_grid(3, 32, 16.0), o);
  info.push_back("info: mu=30 on N=32 L=16: converged=" + std::string(rs.converged ? "yes" : "no") +
                 " pohozaev=" + sci(pohozaev_over_nonlinear(rs)) + " nehari=" + sci(nehari_over_nonlinear(rs)));
  const bool ok = r.converged && neh <= 1e-6 && poh <= 1e-2 && r.Lambda < 0.0 && r.breakdown.I < 0.0 &&
                  rf.converged && poh_f <= 0.5 * poh && secs < 600.0;
  return {ok, false, "ground-state identities at (3,2,0.5,1.8,0.05,1,1), " + fixed(secs, 1) + " s (limit 600 s)", info};
}

Outcome criterion_5() {
  Timer t;
  std::vector<std::string> info;
  bool ok = true;
  ProblemParams pp = base_params;
  pp.mu = 0.1;
  const GridSpec g = make_grid(3, 32, 16.0);
  for (const std::string p_text : {"1.7", "1.8", "1.9", "7/3", "3"}) {
    pp.p = parse_rational(p_text).value();
    const RegimeLabel label = classify(3, parse_rational("2"), parse_rational("0.5"), parse_rational(p_text));
    auto [u, r] = solve_ground_state(pp, g, SolverOptions{});
    std::string line = "p=" + p_text + " " + to_string(label) + ": " +
                       (r.converged ? "converged" : (r.diverged ? "diverged(" + to_string(r.divergence) + ")" : "not converged")) +
                       " after " + std::to_string(r.iterations) + " iters";
    if (label == RegimeLabel::ExistenceWindow) {
      ok = ok && r.converged;
    } else if (label == RegimeLabel::UnboundedBelow) {
      const auto curve = dilation_energy_curve(u, Discretization(g, pp), {2.0, 4.0, 8.0});
      const bool decreasing = curve[1].I < curve[0].I && curve[2].I < curve[1].I;
      line += "; I(u_K) at K=2,4,8: " + sci(curve[0].I) + ", " + sci(curve[1].I) + ", " + sci(curve[2].I) +
              (decreasing ? " (strictly decreasing)" : " (NOT decreasing)");
      ok = ok && r.diverged && decreasing;
    } else {
      line += " (no expectation asserted)";
    }
    info.push_back(line);
  }
  const double secs = t.seconds();
  ok = ok && secs < 1800.0;
  return {ok, false, "regime trichotomy sweep at mu=0.1, " + fixed(secs, 1) + " s (limit 1800 s)", info};
}

Outcome criterion_6() {
  Timer t;
  std::vector<std::string> info;
  bool ok = true;
  for (const std::string p_text : {"5/3", "5"}) {
    ProblemParams pp = base_params;
    pp.p = parse_rational(p_text).value();
    SolverOptions o;
    o.max_iters = 2000;
    long iterates = 0;
    long violations = 0;
    double worst_gap = 0.0;
    auto [u, r] = solve_ground_state(pp, make_grid(3, 32, 16.0), o, [&](int, const Field& v, const EnergyBreakdown& e) {
      if (max_abs(v) == 0.0) return;
      const ContradictionReport c = nonexistence_contradiction(e, pp);
      ++iterates;
      violations += c.opposite_signs ? 0 : 1;
      worst_gap = std::max(worst_gap, c.gap);
    });
    ok = ok && iterates > 0 && violations == 0;
    info.push_back("p=" + p_text + " (" + to_string(classify(pp)) + "): " + std::to_string(iterates) +
                   " iterates checked, " + std::to_string(violations) + " without opposite signs; flow " +
                   (r.diverged ? "diverged(" + to_string(r.divergence) + ")" : (r.converged ? "converged" : "stopped")) +
                   " at iteration " + std::to_string(r.iterations));
  }
  const double secs = t.seconds();
  ok = ok && secs < 300.0;
  return {ok, false, "nonexistence contradictions on every flow iterate, " + fixed(secs, 1) + " s (limit 300 s)", info};
}

Outcome criterion_7() {
  Timer t;
  WarningCapture quiet;
  const double C = verify::hls_sharp_constant(3, 2.0);
  const GridSpec g = make_grid(3, 64, 32.0);
  const Field ext = verify::hls_extremal(g, 2.0);
  const double r_ext = verify::hls_ratio(ext, ext, 2.0);
  const Field gauss = sample_gaussian(g, 1.0, 1.0);
  const double r_g = verify::hls_ratio(gauss, gauss, 2.0);
  const double gap = verify::rel_err(r_ext, C);
  const double secs = t.seconds();
  return {gap <= 0.02 && r_g < C && secs < 300.0, false,
          "sharp HLS: C(3,2)=" + fixed(C, 7) + ", extremal ratio " + fixed(r_ext, 7) + " (rel gap " + sci(gap) +
              ", tol 2e-2), Gaussian ratio " + fixed(r_g, 7) + " < C, " + fixed(secs, 1) + " s",
          {"info: Lanczos/Stirling cross-check max rel diff " +
           sci(verify::gamma_cross_check(200, 1).max_constant_rel)}};
}

Outcome criterion_8() {
  Timer t;
  WarningCapture quiet;
  const GridSpec g = make_grid(3, 64, 12.0);
  std::vector<std::string> info;
  bool ok = true;
  for (double p : {1.8, 2.0}) {
    ProblemParams pp = base_params;
    pp.p = p;
    verify::GNSearchOptions so;
    so.grid = g;
    so.widths = verify::default_gn_widths();
    std::vector<double> ratios;
    for (double K : {0.5, 0.75, 1.0, 1.5, 2.0}) {
      Field uK = sample_gaussian(g, K * K, std::pow(K, 1.5));
      ratios.push_back(verify::gn_ratio(uK, pp));
      so.extra.push_back(std::move(uK));
      so.extra_names.push_back("dilation K=" + fixed(K, 2));
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    const double var = (*hi - *lo) / *hi;
    const verify::GNEstimate est = verify::estimate_gn_constant(pp, so);
    bool bounded = true;
    for (const auto& [name, v] : est.ratios) bounded = bounded && v <= est.value;
    ok = ok && var <= 1e-6 && bounded;
    info.push_back("p=" + fixed(p, 1) + ": dilation spread " + sci(var) + " (tol 1e-6), running C estimate " +
                   fixed(est.value, 6) + ", " + std::to_string(est.ratios.size()) + " ratios " +
                   (bounded ? "all <= estimate" : "EXCEED estimate"));
  }
  return {ok, false, "G-N scale invariance, " + fixed(t.seconds(), 1) + " s", info};
}

Outcome criterion_9() {
  Timer t;
  WarningCapture quiet;
  std::vector<std::string> info;
  verify::GNSearchOptions so;
  const double C = verify::estimate_gn_constant(base_params, so).value;
  const double mu_star = mu_star_equivalence(3, 2.0, base_params.p, base_params.tau, C);
  const double mu = 0.5 * mu_star;
  info.push_back("empirical C_{3,1.8}=" + fixed(C, 6) + ", mu_star_equivalence=" + fixed(mu_star, 4) + ", using mu=" +
                 fixed(mu, 4));
  bool ok = true;
  for (double lambda : {0.01, 0.05}) {
    ProblemParams pp = base_params;
    pp.lambda = lambda;
    pp.mu = mu;
    auto [u, r] = solve_ground_state(pp, make_grid(3, 64, 24.0), SolverOptions{});
    const double dev = std::abs(r.delta - 1.0);
    ok = ok && r.converged && dev <= 0.1;
    info.push_back("lambda=" + fixed(lambda, 2) + ": converged=" + (r.converged ? "yes" : "no") + " delta=" +
                   fixed(r.delta, 5) + " |delta-1|=" + fixed(dev, 5) + " (target <= 0.1)");
  }
  return {ok, true, "equivalence diagnostic delta = -2 Lambda on N=64 L=24, " + fixed(t.seconds(), 1) + " s", info};
}

Outcome criterion_10() {
  Timer t;
  const fs::path root = fs::temp_directory_path() / "choquard_acceptance_determinism";
  fs::remove_all(root);
  std::ostringstream log;
  auto run = [&](const std::string& tag) {
    cli::RunConfig c;
    c.grid = make_grid(3, 16, 8.0);
    c.params.mu = 30.0;
    c.out = (root / ("solve_" + tag)).string();
    cli::run_solve(c, log);
    cli::RunConfig s = c;
    cli::apply_json(s, R"({"max_iters": 200, "sweep": {"p": [1.8, 2.0, 3]}})", "inline");
    s.out = (root / ("sweep_" + tag)).string();
    s.workers = tag == "a" ? 1 : 2;
    cli::run_sweep(s, log);
  };
  run("a");
  run("b");
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  std::vector<std::string> info;
  bool ok = true;
  for (const auto& [dir, files] : std::vector<std::pair<std::string, std::vector<std::string>>>{
           {"solve", {"report.json", "history.csv", "field.bin"}}, {"sweep", {"sweep.csv", "sweep.json"}}}) {
    for (const auto& f : files) {
      const std::string a = slurp(root / (dir + "_a") / f);
      const std::string b = slurp(root / (dir + "_b") / f);
      const bool same = !a.empty() && a == b;
      ok = ok && same;
      info.push_back(dir + "/" + f + ": " + std::to_string(a.size()) + " bytes, " + (same ? "identical" : "DIFFERENT"));
    }
  }
  fs::remove_all(root);
  return {ok, false, "determinism of repeated runs, " + fixed(t.seconds(), 1) + " s", info};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> list{
      {"operator oracle equivalence", criterion_1}, {"closed-form functional values", criterion_2},
      {"gradient check", criterion_3},              {"ground-state identities", criterion_4},
      {"regime trichotomy sweep", criterion_5},     {"nonexistence contradictions", criterion_6},
      {"sharp HLS constant", criterion_7},          {"G-N scale invariance", criterion_8},
      {"equivalence diagnostic (soft)", criterion_9}, {"determinism", criterion_10}};
  return list;
}

bool run_one(int k) {
  const auto& [name, fn] = criteria()[static_cast<std::size_t>(k - 1)];
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, k == 9, std::string("exception: ") + e.what(), {}};
  }
  const std::string status = o.passed ? "PASS" : (o.soft ? "SOFT-FAIL" : "FAIL");
  std::cout << "criterion " << k << ": " << status << " | " << o.summary << std::endl;
  for (const auto& line : o.info) std::cout << "    " << line << "\n";
  std::cout.flush();
  return o.passed || o.soft;
}

}  // namespace

int main(int argc, char** argv) {
  const int count = static_cast<int>(criteria().size());
  if (argc > 2) {
    std::cerr << "usage: acceptance [1.." << count << "]\n";
    return 1;
  }
  if (argc == 2) {
    const int k = std::atoi(argv[1]);
    if (k < 1 || k > count) {
      std::cerr << "criterion must be in 1.." << count << "\n";
      return 1;
    }
    return run_one(k) ? 0 : 1;
  }
  bool all = true;
  for (int k = 1; k <= count; ++k) all = run_one(k) && all;
  return all ? 0 : 1;
}
