#pragma once

// The verification suite behind `verify` and `oracle`: operator oracles,
// closed-form Gaussian values, constant cross-checks, inequality checks and
// the first-variation consistency test. Each check reports the measured
// discrepancy next to its tolerance.

#include "choquard/functionals.hpp"
#include "choquard/grid.hpp"
#include "choquard/operators.hpp"
#include "choquard/regimes.hpp"
#include "choquard/special.hpp"
#include "choquard/verify.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace choquard::verify {

struct CheckResult {
  std::string name;
  double measured = 0.0;   ///< relative error, or the checked quantity
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  bool corrupt_multiplier = false;  ///< fault injection: perturb one multiplier entry
  int random_pairs = 20;
};

inline double rel_err(double got, double want) {
  const double scale = std::abs(want);
  return scale > 0.0 ? std::abs(got - want) / scale : std::abs(got - want);
}

inline CheckResult make_check(std::string name, double measured, double tol, std::string detail = {}) {
  return {std::move(name), measured, tol, std::isfinite(measured) && measured <= tol, std::move(detail)};
}

/// Smooth random field: a Gaussian envelope times a random trigonometric
/// polynomial of low degree.
inline Field random_smooth_field(const GridSpec& g, std::mt19937_64& rng, double envelope = 0.3) {
  std::normal_distribution<double> normal;
  constexpr int modes = 6;
  std::array<std::array<double, 3>, modes> k{};
  std::array<double, modes> amp{};
  std::array<double, modes> phase{};
  std::uniform_int_distribution<int> wave(-3, 3);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  for (int m = 0; m < modes; ++m) {
    for (int d = 0; d < 3; ++d) k[m][d] = d < g.n ? 2.0 * std::numbers::pi * wave(rng) / g.L : 0.0;
    amp[m] = normal(rng);
    phase[m] = ph(rng);
  }
  const double base = normal(rng);
  return sample(g, [&](const Point& x) {
    double v = 1.5 + 0.2 * base;
    for (int m = 0; m < modes; ++m) v += 0.3 * amp[m] * std::cos(k[m][0] * x[0] + k[m][1] * x[1] + k[m][2] * x[2] + phase[m]);
    return v * std::exp(-envelope * radius_sq(x));
  });
}

/// Uniform random values, for algebraic properties that need no smoothness.
inline Field random_field(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Field u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = uni(rng);
  return u;
}

// ---------------------------------------------------------------------------
// Constants

inline std::vector<CheckResult> check_constants(const SuiteOptions& opts) {
  std::vector<CheckResult> out;
  const auto gc = gamma_cross_check(100, opts.seed);
  out.push_back(make_check("gamma lanczos vs stirling", std::max(gc.max_gamma_rel, gc.max_constant_rel), 1e-12));
  out.push_back(make_check("A_{3,2} = 1/(4 pi)", rel_err(riesz_normalization(3, 2.0), 0.25 / std::numbers::pi), 1e-12));
  out.push_back(make_check("A_{1,1/2} = 1/sqrt(2 pi)",
                           rel_err(riesz_normalization(1, 0.5), 1.0 / std::sqrt(2.0 * std::numbers::pi)), 1e-12));
  const double c32 = 4.0 / 3.0 * std::pow(4.0 / std::sqrt(std::numbers::pi), 2.0 / 3.0);
  out.push_back(make_check("C(3,2) = (4/3)(4/sqrt(pi))^{2/3}", rel_err(hls_sharp_constant(3, 2.0), c32), 1e-12));
  std::mt19937_64 rng(opts.seed + 17);
  std::uniform_real_distribution<double> frac(0.01, 0.99);
  double min_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 50; ++i) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const double a = frac(rng) * n;
    min_val = std::min({min_val, hls_sharp_constant(n, a), riesz_normalization(n, a)});
  }
  CheckResult pos{"constants positive on 50 random (n, alpha)", min_val, 0.0, min_val > 0.0, {}};
  out.push_back(pos);
  return out;
}

// ---------------------------------------------------------------------------
// Operators

namespace detail {
inline MultiplierCache maybe_corrupt(MultiplierCache c, bool corrupt) {
  if (corrupt) c.corrupt_entry(1, c.table()[1] * 1.5 + 0.1);
  return c;
}

/// max over modes of |table - analytic symbol| / |analytic symbol|.
inline double table_vs_symbol(const MultiplierCache& c) {
  double worst = 0.0;
  auto t = c.table();
  for_each_mode(c.grid(), [&](std::size_t i, const Mode& m) {
    const double want = c.symbol(m.k);
    worst = std::max(worst, rel_err(t[i], want));
  });
  return worst;
}

inline double max_rel_diff(const Field& a, const Field& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0.0 ? num / den : num;
}
}  // namespace detail

inline std::vector<CheckResult> check_operators(const SuiteOptions& opts) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(opts.seed);

  {
    const GridSpec g = make_grid(3, 8, 4.0);
    const MultiplierCache c = detail::maybe_corrupt(build_multiplier(g, MultiplierKind::riesz, 2.0), opts.corrupt_multiplier);
    const Field f = random_field(g, rng);
    out.push_back(make_check("direct vs spectral convolution, 8^3 riesz alpha=2",
                             detail::max_rel_diff(apply_multiplier(f, c), direct_convolve_oracle(f, c)), 1e-10));
    out.push_back(make_check("riesz table matches |2 pi xi|^-alpha, 8^3", detail::table_vs_symbol(c), 1e-14));
  }
  {
    const GridSpec g = make_grid(1, 16, 2.0);
    const MultiplierCache c =
        detail::maybe_corrupt(build_multiplier(g, MultiplierKind::fractional, 0.3), opts.corrupt_multiplier);
    const Field f = random_field(g, rng);
    out.push_back(make_check("direct vs spectral convolution, 16-pt fractional s=0.3",
                             detail::max_rel_diff(apply_multiplier(f, c), direct_convolve_oracle(f, c)), 1e-10));
    out.push_back(make_check("fractional table matches |2 pi xi|^{2s}, 16-pt", detail::table_vs_symbol(c), 1e-14));
  }
  {
    // Eigenfunction checks on cos(2 pi x1 / L).
    const GridSpec g = make_grid(3, 16, 8.0);
    const Field u = sample(g, [&](const Point& x) { return std::cos(2.0 * std::numbers::pi * x[0] / g.L); });
    const double k = 2.0 * std::numbers::pi / g.L;
    struct Case {
      std::string name;
      MultiplierKind kind;
      double param;
      double eigen;
    };
    for (const Case& cs : {Case{"laplacian", MultiplierKind::laplacian, 0.0, k * k},
                           Case{"fractional s=0.3", MultiplierKind::fractional, 0.3, std::pow(k, 0.6)},
                           Case{"riesz alpha=2", MultiplierKind::riesz, 2.0, std::pow(k, -2.0)}}) {
      const MultiplierCache c = detail::maybe_corrupt(build_multiplier(g, cs.kind, cs.param), opts.corrupt_multiplier);
      out.push_back(make_check("eigenfunction " + cs.name, detail::max_rel_diff(apply_multiplier(u, c), u * cs.eigen), 1e-12));
    }
  }
  {
    // Self-adjointness and positivity.
    const GridSpec g = make_grid(3, 16, 8.0);
    double worst = 0.0;
    double min_quad = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 5; ++i) {
      const Field u = random_field(g, rng);
      const Field v = random_field(g, rng);
      for (const auto& c : {build_multiplier(g, MultiplierKind::laplacian), build_multiplier(g, MultiplierKind::fractional, 0.5),
                            build_multiplier(g, MultiplierKind::riesz, 2.0)}) {
        const double a = inner(apply_multiplier(u, c), v);
        const double b = inner(u, apply_multiplier(v, c));
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
        min_quad = std::min(min_quad, inner(apply_multiplier(u, c), u));
      }
      const MixedOperator L(g, 0.05, 0.5);
      const double a = inner(L.apply(u), v);
      worst = std::max(worst, std::abs(a - inner(u, L.apply(v))) / std::abs(a));
    }
    out.push_back(make_check("self-adjointness of multipliers and mixed operator", worst, 1e-12));
    out.push_back({"positivity of multiplier quadratic forms", min_quad, 0.0, min_quad >= 0.0, {}});
  }
  {
    // Implicit solve round trip.
    const GridSpec g = make_grid(3, 16, 8.0);
    const MixedOperator L(g, 0.05, 0.5);
    const Field w = random_field(g, rng);
    const double dt = 0.3;
    const double c = 1.0;
    Field rhs = w * (1.0 + dt * c) + L.apply(w) * dt;
    out.push_back(make_check("implicit solve inverts (1 + dt c) + dt L", detail::max_rel_diff(L.implicit_solve(rhs, dt, c), w), 1e-12));
  }
  {
    // Parseval and transform round trip in every dimension.
    double worst_parseval = 0.0;
    double worst_round = 0.0;
    for (int n = 1; n <= 3; ++n) {
      const GridSpec g = make_grid(n, n == 3 ? 16 : 64, 10.0);
      for (int i = 0; i < 100; ++i) {
        const Field u = random_field(g, rng);
        const SpectralField s = transform(u);
        worst_parseval = std::max(worst_parseval, rel_err(s.energy(), mass(u)));
        worst_round = std::max(worst_round, detail::max_rel_diff(inverse_transform(s), u));
      }
    }
    out.push_back(make_check("Parseval, 100 random fields per dimension", worst_parseval, 1e-12));
    out.push_back(make_check("transform round trip", worst_round, 1e-12));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian closed forms

/// (I_2 * exp(-|.|^2))(r) in R^3 = sqrt(pi) erf(r) / (4 r).
inline double newtonian_gaussian(double r) {
  return r == 0.0 ? 0.5 : std::sqrt(std::numbers::pi) * std::erf(r) / (4.0 * r);
}

/// Max relative error of the Riesz potential of exp(-|x|^2) (n=3, alpha=2)
/// against the erf closed form at the lattice points x = (j h, 0, 0), j = 0..9.
inline double newtonian_error(const GridSpec& g, const RieszOptions& riesz = {}) {
  const Field f = sample_gaussian(g, 1.0, 1.0);
  const Field v = riesz_convolve(f, 2.0, riesz);
  double worst = 0.0;
  const std::size_t mid = g.N / 2;
  for (std::size_t j = 0; j < 10 && mid + j < g.N; ++j) {
    const std::size_t flat = (mid * g.N + mid) * g.N + mid + j;
    const double r = g.coordinate(mid + j);
    worst = std::max(worst, rel_err(v[flat], newtonian_gaussian(r)));
  }
  return worst;
}

/// [u]^2 for u = exp(-x^2) on R by quadrature of |2 pi xi|^{2s} |uhat|^2.
inline double gaussian_seminorm_1d_quadrature(double s) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [s](double xi) {
    const double k = 2.0 * std::numbers::pi * xi;
    return 2.0 * std::pow(k, 2.0 * s) * std::numbers::pi * std::exp(-2.0 * std::numbers::pi * std::numbers::pi * xi * xi);
  };
  return ts.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

/// A_2(exp(-|x|^2)) for n=3, alpha=2 by radial quadrature of the Coulomb
/// energy of exp(-2|x|^2): (pi/2)^{3/2} int_0^inf r exp(-2 r^2) erf(sqrt(2) r) dr.
inline double gaussian_coulomb_energy() {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [](double r) { return r * std::exp(-2.0 * r * r) * std::erf(std::sqrt(2.0) * r); };
  return std::pow(std::numbers::pi / 2.0, 1.5) * ts.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

inline std::vector<CheckResult> check_gaussian_closed_forms(const SuiteOptions& opts, bool include_3d = true) {
  (void)opts;
  std::vector<CheckResult> out;
  WarningCapture quiet;
  const double pi = std::numbers::pi;
  {
    const GridSpec g = make_grid(1, 1024, 64.0);
    const Field u = sample_gaussian(g, 1.0, 1.0);
    out.push_back(make_check("n=1 Gaussian mass (pi/2)^{1/2}", rel_err(mass(u), std::sqrt(pi / 2.0)), 1e-10));
  }
  {
    // The periodic seminorm is a Riemann sum in xi of |2 pi xi|^{2s} |uhat|^2,
    // whose cusp at xi = 0 leaves an O(L^{-1-2s}) error; the box is widened
    // until that term is below the tolerance.
    const GridSpec g = make_grid(1, std::size_t{1} << 19, 32768.0);
    const Field u = sample_gaussian(g, 1.0, 1.0);
    for (double s : {0.3, 0.5, 0.7, 0.9, 1.0}) {
      std::ostringstream name;
      name << "n=1 Gaussian seminorm s=" << s << " vs quadrature";
      out.push_back(make_check(name.str(), rel_err(frac_seminorm_sq(u, s), gaussian_seminorm_1d_quadrature(s)),
                               s < 0.5 ? 1e-6 : 1e-8));
    }
  }
  if (!include_3d) return out;
  {
    const GridSpec g = make_grid(3, 64, 16.0);
    const Field u = sample_gaussian(g, 1.0, 1.0);
    const double H = std::pow(pi / 2.0, 1.5);
    out.push_back(make_check("n=3 Gaussian mass (pi/2)^{3/2}", rel_err(mass(u), H), 1e-8));
    out.push_back(make_check("n=3 Gaussian gradient 3 (pi/2)^{3/2}", rel_err(grad_norm_sq(u), 3.0 * H), 1e-8));
    out.push_back(make_check("Newtonian potential vs erf, 64^3", newtonian_error(g), 1e-4));
    const ProblemParams pp{3, 2.0, 0.5, 2.0, 0.05, 1.0, 1.0};
    out.push_back(make_check("Coulomb energy A_2 vs radial quadrature",
                             rel_err(choquard_energy(u, pp), gaussian_coulomb_energy()), 1e-3));
  }
  out.push_back(make_check("Newtonian potential vs erf, 32^3 L=16", newtonian_error(make_grid(3, 32, 16.0)), 1e-3));
  return out;
}

// ---------------------------------------------------------------------------
// Functionals

/// Worst relative error of <first_variation(u), v> against central differences
/// of S_lambda at eps = 1e-5 over seeded smooth pairs.
inline double gradient_check_error(const ProblemParams& pp, const GridSpec& g, std::uint64_t seed, int pairs,
                                   const RieszOptions& riesz = {}) {
  const Discretization disc(g, pp, riesz);
  std::mt19937_64 rng(seed);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const Field u = random_smooth_field(g, rng);
    const Field v = random_smooth_field(g, rng);
    const double analytic = inner(first_variation(u, disc), v);
    const double plus = action(u + v * eps, disc).S;
    const double minus = action(u - v * eps, disc).S;
    const double fd = (plus - minus) / (2.0 * eps);
    worst = std::max(worst, std::abs(analytic - fd) / std::max(std::abs(analytic), std::abs(fd)));
  }
  return worst;
}

inline std::vector<CheckResult> check_functionals(const SuiteOptions& opts) {
  std::vector<CheckResult> out;
  const ProblemParams pp{3, 2.0, 0.5, 1.8, 0.05, 1.0, 1.0};
  const GridSpec g = make_grid(3, 32, 16.0);
  out.push_back(make_check("first variation vs central differences", gradient_check_error(pp, g, opts.seed, opts.random_pairs), 1e-5));
  std::mt19937_64 rng(opts.seed + 3);
  const Field u = random_smooth_field(g, rng);
  const EnergyBreakdown e = action(u, pp);
  const double scale = std::max({std::abs(e.S), std::abs(e.I), e.H});
  out.push_back(make_check("breakdown S = I + H/2", std::abs(e.S - e.I - 0.5 * e.H) / scale, 1e-12));
  out.push_back(make_check("breakdown S = grad/2 + H/2 + lambda semi/2 - mu A/(2p)",
                           std::abs(e.S - (0.5 * e.grad + 0.5 * e.H + 0.5 * pp.lambda * e.semi - pp.mu * e.A / (2.0 * pp.p))) / scale,
                           1e-12));
  const double delta = -2.0 * lagrange_multiplier(e, pp);
  out.push_back(make_check("Nehari residual vanishes with delta = -2 Lambda", nehari_residual(e, pp, delta).relative, 1e-12));
  return out;
}

// ---------------------------------------------------------------------------
// Inequalities

inline std::vector<CheckResult> check_inequalities(const SuiteOptions& opts) {
  (void)opts;
  std::vector<CheckResult> out;
  WarningCapture quiet;
  const double C = hls_sharp_constant(3, 2.0);
  {
    const GridSpec g = make_grid(3, 64, 32.0);
    const Field ext = hls_extremal(g, 2.0);
    const double r_ext = hls_ratio(ext, ext, 2.0);
    out.push_back(make_check("HLS extremal ratio within 2% of C(3,2)", rel_err(r_ext, C), 0.02));
    const Field gauss = sample_gaussian(g, 1.0, 1.0);
    const double r_g = hls_ratio(gauss, gauss, 2.0);
    out.push_back({"HLS Gaussian ratio strictly below C(3,2)", r_g / C, 1.0, r_g < C, {}});
    out.push_back(make_check("HLS ratio homogeneous (f = 2h)", rel_err(hls_ratio(ext * 2.0, ext, 2.0), r_ext), 1e-12));
  }
  {
    const GridSpec g = make_grid(3, 64, 12.0);
    for (double p : {1.8, 2.0}) {
      const ProblemParams pp{3, 2.0, 0.5, p, 0.05, 1.0, 1.0};
      GNSearchOptions so;
      so.grid = g;
      so.widths = default_gn_widths();
      std::vector<double> ratios;
      for (double K : {0.5, 1.0, 2.0}) {
        Field uK = sample_gaussian(g, K * K, std::pow(K, 1.5));
        ratios.push_back(gn_ratio(uK, pp));
        so.extra.push_back(std::move(uK));
        so.extra_names.push_back("dilated gaussian K=" + std::to_string(K));
      }
      const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
      std::ostringstream name;
      name << "G-N ratio dilation invariance p=" << p;
      out.push_back(make_check(name.str(), (*hi - *lo) / *hi, 1e-6));
      const GNEstimate est = estimate_gn_constant(pp, so);
      double worst = -std::numeric_limits<double>::infinity();
      for (const auto& [id, r] : est.ratios) worst = std::max(worst, r - est.value);
      name.str("");
      name << "G-N ratios bounded by running estimate p=" << p;
      out.push_back({name.str(), worst, 0.0, worst <= 0.0, est.argmax});
    }
  }
  {
    const ProblemParams pp{3, 2.0, 0.5, 2.0, 0.05, 1.0, 1.0};
    const GridSpec g = make_grid(3, 32, 16.0);
    const double peak = linfty_bound_check(sample_gaussian(g, 1.0, 1.0), pp);
    out.push_back(make_check("L^infty bound: peak of I_2 * exp(-2|x|^2) = 1/4", rel_err(peak, 0.25), 1e-3));
    const GridSpec g2 = make_grid(3, 64, 32.0);
    const double peak2 = linfty_bound_check(sample_gaussian(g2, 1.0, 1.0), pp);
    out.push_back(make_check("L^infty bound stable under box doubling", rel_err(peak2, peak), 0.05));
  }
  return out;
}

enum class Suite { all, constants, operators, functionals, inequalities, oracle_1d };

inline Suite suite_from_string(const std::string& s) {
  if (s == "all") return Suite::all;
  if (s == "constants") return Suite::constants;
  if (s == "operators") return Suite::operators;
  if (s == "functionals") return Suite::functionals;
  if (s == "inequalities") return Suite::inequalities;
  if (s == "oracle-1d") return Suite::oracle_1d;
  throw Error("unknown verify suite '" + s + "' (all, constants, operators, functionals, inequalities, oracle-1d)");
}

inline std::vector<CheckResult> run_suite(Suite suite, const SuiteOptions& opts) {
  std::vector<CheckResult> out;
  auto add = [&](std::vector<CheckResult> v) { out.insert(out.end(), v.begin(), v.end()); };
  if (suite == Suite::oracle_1d) {
    add(check_gaussian_closed_forms(opts, false));
    return out;
  }
  if (suite == Suite::all || suite == Suite::constants) add(check_constants(opts));
  if (suite == Suite::all || suite == Suite::operators) {
    add(check_operators(opts));
    add(check_gaussian_closed_forms(opts));
  }
  if (suite == Suite::all || suite == Suite::functionals) add(check_functionals(opts));
  if (suite == Suite::all || suite == Suite::inequalities) add(check_inequalities(opts));
  return out;
}

}  // namespace choquard::verify
