#pragma once

// Constant evaluators (sharp HLS constant, Riesz normalization) and the
// inequality machinery built on them: HLS and Gagliardo-Nirenberg ratios, an
// empirical lower bound for the G-N constant, and the L^infty check on the
// Riesz potential of |u|^p.

#include "choquard/diagnostics.hpp"
#include "choquard/functionals.hpp"
#include "choquard/grid.hpp"
#include "choquard/operators.hpp"
#include "choquard/regimes.hpp"
#include "choquard/special.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace choquard::verify {

struct ConstantReport {
  std::string name;
  double formula_value = 0.0;
  double empirical_value = 0.0;
  double rel_gap = 0.0;
};

inline ConstantReport make_constant_report(std::string name, double formula, double empirical) {
  if (!(formula > 0.0)) throw Error("constant '" + name + "' must be positive");
  return {std::move(name), formula, empirical, std::abs(formula - empirical) / formula};
}

inline void check_alpha(int n, double alpha) {
  if (n < 1) throw Error("dimension n must be >= 1");
  if (!(alpha > 0.0 && alpha < n)) throw Error("alpha must satisfy 0 < alpha < n");
}

/// C(n, alpha) = pi^{(n-alpha)/2} Gamma(alpha/2) / Gamma((n+alpha)/2) (Gamma(n/2) / Gamma(n))^{-alpha/n},
/// evaluated with any Gamma routine.
template <class GammaFn>
double hls_sharp_constant_with(int n, double alpha, GammaFn gamma) {
  check_alpha(n, alpha);
  return std::pow(std::numbers::pi, 0.5 * (n - alpha)) * gamma(0.5 * alpha) / gamma(0.5 * (n + alpha)) *
         std::pow(gamma(0.5 * n) / gamma(static_cast<double>(n)), -alpha / n);
}

inline double hls_sharp_constant(int n, double alpha) {
  return hls_sharp_constant_with(n, alpha, special::gamma_lanczos);
}

/// A_{n,alpha} = Gamma((n-alpha)/2) / (pi^{n/2} 2^alpha Gamma(alpha/2)).
template <class GammaFn>
double riesz_normalization_with(int n, double alpha, GammaFn gamma) {
  check_alpha(n, alpha);
  return gamma(0.5 * (n - alpha)) / (std::pow(std::numbers::pi, 0.5 * n) * std::pow(2.0, alpha) * gamma(0.5 * alpha));
}

inline double riesz_normalization(int n, double alpha) {
  return riesz_normalization_with(n, alpha, special::gamma_lanczos);
}

struct GammaCrossCheck {
  int samples = 0;
  double max_gamma_rel = 0.0;      ///< Lanczos vs Stirling on Gamma itself
  double max_constant_rel = 0.0;   ///< HLS constant and A_{n,alpha} through both routes
  bool passed = false;
};

/// Compares the two Gamma implementations on random arguments in (0.05, 30)
/// and the constant evaluators on random admissible (n, alpha).
inline GammaCrossCheck gamma_cross_check(int samples, std::uint64_t seed, double tol = 1e-12) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> arg(0.05, 30.0);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> frac(0.02, 0.98);
  GammaCrossCheck r;
  r.samples = samples;
  for (int i = 0; i < samples; ++i) {
    const double x = arg(rng);
    const double a = special::gamma_lanczos(x);
    const double b = special::gamma_stirling(x);
    r.max_gamma_rel = std::max(r.max_gamma_rel, std::abs(a - b) / std::abs(b));
    const int n = dim(rng);
    const double alpha = frac(rng) * n;
    const double c1 = hls_sharp_constant(n, alpha);
    const double c2 = hls_sharp_constant_with(n, alpha, special::gamma_stirling);
    const double a1 = riesz_normalization(n, alpha);
    const double a2 = riesz_normalization_with(n, alpha, special::gamma_stirling);
    r.max_constant_rel = std::max({r.max_constant_rel, std::abs(c1 - c2) / c2, std::abs(a1 - a2) / a2});
  }
  r.passed = r.max_gamma_rel <= tol && r.max_constant_rel <= tol;
  return r;
}

/// A^{-1} <I_alpha * f, h> / (||f||_t ||h||_t), t = 2n/(n+alpha): the kernel
/// double integral with |x-y|^{alpha-n} divided by the norm product.
inline double hls_ratio(const Field& f, const Field& h, double alpha, const RieszOptions& riesz = {}) {
  f.check_same_grid(h);
  const int n = f.grid().n;
  check_alpha(n, alpha);
  const double t = 2.0 * n / (n + alpha);
  const double nf = lp_norm(f, t);
  const double nh = lp_norm(h, t);
  if (!(nf > 0.0) || !(nh > 0.0)) throw Error("hls_ratio needs nonzero fields");
  const double pairing = inner(riesz_convolve(f, alpha, riesz), h) / riesz_normalization(n, alpha);
  return pairing / (nf * nh);
}

/// (gamma^2 + |x - a|^2)^{-(n+alpha)/2}, the equality profile of the sharp
/// HLS inequality, centered at the origin.
inline Field hls_extremal(const GridSpec& grid, double alpha, double gamma = 1.0) {
  check_alpha(grid.n, alpha);
  const double e = -0.5 * (grid.n + alpha);
  return sample(grid, [=](const Point& x) { return std::pow(gamma * gamma + radius_sq(x), e); });
}

/// Exponents (a, b) with A_p(u) <= C grad^a H^b.
struct GNExponents {
  double grad = 0.0;  ///< (np - n - alpha) / 2
  double mass = 0.0;  ///< (n + alpha - p(n-2)) / 2
};

inline GNExponents gn_exponents(int n, double alpha, double p) {
  return {0.5 * (n * p - n - alpha), 0.5 * (n + alpha - p * (n - 2.0))};
}

/// Throws unless (n+alpha)/n <= p <= (2s+n+alpha)/n, or allow_out_of_range.
inline void check_gn_range(const ProblemParams& pp, bool allow_out_of_range) {
  if (allow_out_of_range) return;
  const CriticalExponents c = critical_exponents(pp.n, pp.alpha, pp.s);
  const double tol = 1e-12;
  if (pp.p < c.lower * (1.0 - tol) || pp.p > c.s_upper * (1.0 + tol)) {
    throw Error("G-N ratio requires (n+alpha)/n <= p <= (2s+n+alpha)/n = [" + std::to_string(c.lower) + ", " +
                std::to_string(c.s_upper) + "]; pass allow_out_of_range to override");
  }
}

/// A_p(u) / (grad^{(np-n-alpha)/2} H^{(n+alpha-p(n-2))/2}); a lower bound for C_{n,p}.
inline double gn_ratio(const EnergyBreakdown& e, const ProblemParams& pp, bool allow_out_of_range = false) {
  check_gn_range(pp, allow_out_of_range);
  if (!(e.H > 0.0)) throw Error("gn_ratio needs a nonzero field");
  const GNExponents x = gn_exponents(pp.n, pp.alpha, pp.p);
  return e.A / (std::pow(e.grad, x.grad) * std::pow(e.H, x.mass));
}

inline double gn_ratio(const Field& u, const ProblemParams& pp, bool allow_out_of_range = false,
                       const RieszOptions& riesz = {}) {
  check_gn_range(pp, allow_out_of_range);
  return gn_ratio(action(u, pp, riesz), pp, allow_out_of_range);
}

struct GNSearchOptions {
  GridSpec grid{3, 64, 12.0};
  std::vector<double> widths;      ///< Gaussian parameters a; default: 20 log-spaced in [0.5, 4]
  std::vector<Field> extra;        ///< additional profiles (e.g. solver ground states)
  std::vector<std::string> extra_names;
  bool allow_out_of_range = false;
  RieszOptions riesz{};
};

struct GNEstimate {
  double value = 0.0;
  std::string argmax;
  std::vector<std::pair<std::string, double>> ratios;
};

inline std::vector<double> default_gn_widths() {
  std::vector<double> w;
  for (int i = 0; i < 20; ++i) w.push_back(0.5 * std::pow(8.0, i / 19.0));
  return w;
}

/// Maximum of gn_ratio over the family; nondecreasing as the family grows.
inline GNEstimate estimate_gn_constant(const ProblemParams& pp, const GNSearchOptions& opts = {}) {
  if (opts.grid.n != pp.n) throw Error("search grid dimension does not match n");
  const Discretization disc(opts.grid, pp, opts.riesz);
  GNEstimate est;
  est.value = -std::numeric_limits<double>::infinity();
  auto consider = [&](const std::string& name, const Field& u) {
    const double r = gn_ratio(action(u, disc), pp, opts.allow_out_of_range);
    est.ratios.emplace_back(name, r);
    if (r > est.value) {
      est.value = r;
      est.argmax = name;
    }
  };
  WarningCapture quiet;
  const std::vector<double> widths = opts.widths.empty() && opts.extra.empty() ? default_gn_widths() : opts.widths;
  for (double a : widths) consider("gaussian a=" + std::to_string(a), sample_gaussian(opts.grid, a, 1.0));
  for (std::size_t i = 0; i < opts.extra.size(); ++i) {
    consider(i < opts.extra_names.size() ? opts.extra_names[i] : "profile " + std::to_string(i), opts.extra[i]);
  }
  if (est.ratios.empty()) throw Error("G-N search family is empty");
  return est;
}

/// max_x (I_alpha * |u|^p)(x), asserted finite.
inline double linfty_bound_check(const Field& u, const ProblemParams& pp, const RieszOptions& riesz = {}) {
  if (pp.n < 3) throw Error("L^infty bound check requires n >= 3");
  const CriticalExponents c = critical_exponents(pp.n, pp.alpha, pp.s);
  if (pp.p < c.lower * (1.0 - 1e-12) || pp.p > *c.hls_upper * (1.0 + 1e-12)) {
    throw Error("L^infty bound check requires (n+alpha)/n <= p <= (n+alpha)/(n-2)");
  }
  const Field v = riesz_convolve(abs_pow(u, pp.p), pp.alpha, riesz);
  double m = 0.0;
  for (double x : v.values()) {
    if (!std::isfinite(x)) throw Error("Riesz potential of |u|^p is not finite");
    m = std::max(m, x);
  }
  return m;
}

}  // namespace choquard::verify
