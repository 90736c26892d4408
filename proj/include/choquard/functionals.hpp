#pragma once

// Energies, residuals and multiplier formulas attached to
//
//   -Delta u + lambda (-Delta)^s u + delta u = mu (I_alpha * |u|^p) |u|^{p-2} u,
//   ||u||_2^2 = tau.
//
// Every quantity is assembled from five scalars of the field: the mass H,
// ||grad u||^2, the fractional seminorm [u]^2, and the Choquard energy
// A = int (I_alpha * |u|^p) |u|^p.

#include "choquard/diagnostics.hpp"
#include "choquard/grid.hpp"
#include "choquard/operators.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>
#include <string>

namespace choquard {

struct ProblemParams {
  int n = 3;
  double alpha = 2.0;   ///< Riesz order, 0 < alpha < n
  double s = 0.5;       ///< fractional order, 0 < s < 1
  double p = 1.8;       ///< Choquard exponent, p >= (n + alpha) / n
  double lambda = 0.05; ///< weight of (-Delta)^s
  double mu = 1.0;      ///< coupling
  double tau = 1.0;     ///< prescribed mass

  /// Throws Error naming the first violated invariant.
  void validate() const {
    auto fail = [](const std::string& what) { throw Error("invalid parameters: " + what); };
    if (n < 1 || n > 3) fail("n must be 1, 2 or 3");
    if (!(alpha > 0.0 && alpha < n)) fail("alpha must satisfy 0 < alpha < n");
    if (!(s > 0.0 && s < 1.0)) fail("s must satisfy 0 < s < 1");
    if (!(lambda >= 0.0)) fail("lambda must be >= 0");
    if (!(mu >= 0.0)) fail("mu must be >= 0");
    if (!(tau > 0.0)) fail("tau must be > 0");
    const double lower = (n + alpha) / n;
    if (!(p >= lower * (1.0 - 1e-12))) {
      std::ostringstream os;
      os << "p must be >= (n+alpha)/n = " << lower;
      fail(os.str());
    }
  }
};

struct EnergyBreakdown {
  double H = 0.0;     ///< ||u||_2^2
  double grad = 0.0;  ///< ||grad u||_2^2
  double semi = 0.0;  ///< [u]^2
  double T = 0.0;     ///< grad + lambda semi
  double A = 0.0;     ///< int (I_alpha * |u|^p) |u|^p
  double S = 0.0;     ///< action S_lambda = I + H/2
  double I = 0.0;     ///< T/2 - mu A / (2p)
};

/// Scalar residual with its scale-free form (raw / largest term magnitude).
struct Residual {
  double raw = 0.0;
  double relative = 0.0;
};

namespace detail {
inline Residual make_residual(double raw, std::initializer_list<double> terms) {
  double scale = 0.0;
  for (double t : terms) scale = std::max(scale, std::abs(t));
  return {raw, scale > 0.0 ? std::abs(raw) / scale : 0.0};
}
}  // namespace detail

/// Operators shared by every functional for one (grid, parameters) pair.
class Discretization {
 public:
  Discretization(const GridSpec& grid, const ProblemParams& params, const RieszOptions& riesz = {})
      : grid_(grid), params_(params), mixed_(grid, params.lambda, params.s), riesz_(grid, params.alpha, riesz) {
    params.validate();
    if (grid.n != params.n) throw Error("grid dimension does not match parameter n");
  }

  const GridSpec& grid() const { return grid_; }
  const ProblemParams& params() const { return params_; }
  const MixedOperator& mixed() const { return mixed_; }
  const RieszOperator& riesz() const { return riesz_; }

 private:
  GridSpec grid_;
  ProblemParams params_;
  MixedOperator mixed_;
  RieszOperator riesz_;
};

/// |u|^q pointwise.
inline Field abs_pow(const Field& u, double q) {
  Field out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::pow(std::abs(u[i]), q);
  return out;
}

/// Choquard nonlinearity (I_alpha * |u|^p) |u|^{p-2} u, without the factor mu.
/// |u|^{p-2} u is evaluated as sign(u) |u|^{p-1} and vanishes at u = 0.
inline Field choquard_nonlinearity(const Field& u, const Discretization& disc) {
  const double p = disc.params().p;
  const Field potential = disc.riesz().apply(abs_pow(u, p));
  Field out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = u[i];
    out[i] = v == 0.0 ? 0.0 : potential[i] * std::copysign(std::pow(std::abs(v), p - 1.0), v);
  }
  return out;
}

/// A_p(u) = <I_alpha * |u|^p, |u|^p>.
inline double choquard_energy(const Field& u, const Discretization& disc) {
  const Field f = abs_pow(u, disc.params().p);
  return inner(disc.riesz().apply(f), f);
}

inline double choquard_energy(const Field& u, const ProblemParams& params, const RieszOptions& riesz = {}) {
  return choquard_energy(u, Discretization(u.grid(), params, riesz));
}

inline EnergyBreakdown action(const Field& u, const Discretization& disc) {
  const ProblemParams& pp = disc.params();
  EnergyBreakdown e;
  const SpectralField sp = transform(u);
  const auto parts = disc.mixed().parts(sp);
  e.H = mass(u);
  e.grad = parts.grad;
  e.semi = parts.semi;
  e.T = e.grad + pp.lambda * e.semi;
  e.A = choquard_energy(u, disc);
  e.I = 0.5 * e.T - pp.mu * e.A / (2.0 * pp.p);
  e.S = e.I + 0.5 * e.H;
  return e;
}

inline EnergyBreakdown action(const Field& u, const ProblemParams& params, const RieszOptions& riesz = {}) {
  return action(u, Discretization(u.grid(), params, riesz));
}

/// L u + delta u - mu (I_alpha * |u|^p) |u|^{p-2} u.
inline Field equation_residual(const Field& u, const Discretization& disc, double delta) {
  Field g = disc.mixed().apply(u);
  const Field nl = choquard_nonlinearity(u, disc);
  const double mu = disc.params().mu;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta * u[i] - mu * nl[i];
  return g;
}

/// L2 gradient of S_lambda: d/de S(u + e v)|_0 = <first_variation(u), v>.
inline Field first_variation(const Field& u, const Discretization& disc) { return equation_residual(u, disc, 1.0); }

inline Field first_variation(const Field& u, const ProblemParams& params, const RieszOptions& riesz = {}) {
  return first_variation(u, Discretization(u.grid(), params, riesz));
}

/// ||L u + delta u - mu N(u)||_2 relative to the largest of the three terms.
inline Residual equation_residual_norm(const Field& u, const Discretization& disc, double delta) {
  const Field lu = disc.mixed().apply(u);
  const Field nl = choquard_nonlinearity(u, disc);
  const double mu = disc.params().mu;
  Field r(u.grid());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = lu[i] + delta * u[i] - mu * nl[i];
  const double raw = std::sqrt(mass(r));
  return detail::make_residual(raw, {std::sqrt(mass(lu)), std::abs(delta) * std::sqrt(mass(u)), mu * std::sqrt(mass(nl))});
}

/// grad + delta H + lambda semi - mu A.
inline Residual nehari_residual(const EnergyBreakdown& e, const ProblemParams& pp, double delta = 1.0) {
  const double raw = e.grad + delta * e.H + pp.lambda * e.semi - pp.mu * e.A;
  return detail::make_residual(raw, {e.grad, delta * e.H, pp.lambda * e.semi, pp.mu * e.A});
}

inline Residual nehari_residual(const Field& u, const Discretization& disc, double delta = 1.0) {
  return nehari_residual(action(u, disc), disc.params(), delta);
}

/// ((n-2)/2) grad + ((n-2s)/2) lambda semi + delta (n/2) H - mu ((n+alpha)/(2p)) A.
inline Residual pohozaev_residual(const EnergyBreakdown& e, const ProblemParams& pp, double delta = 1.0) {
  const double n = pp.n;
  const double t_grad = 0.5 * (n - 2.0) * e.grad;
  const double t_semi = 0.5 * (n - 2.0 * pp.s) * pp.lambda * e.semi;
  const double t_mass = delta * 0.5 * n * e.H;
  const double t_nl = pp.mu * (n + pp.alpha) / (2.0 * pp.p) * e.A;
  return detail::make_residual(t_grad + t_semi + t_mass - t_nl, {t_grad, t_semi, t_mass, t_nl});
}

inline Residual pohozaev_residual(const Field& u, const Discretization& disc, double delta = 1.0) {
  return pohozaev_residual(action(u, disc), disc.params(), delta);
}

/// Lambda = (T - mu A) / (2 H); delta = -2 Lambda is the mass coefficient of
/// the Euler-Lagrange equation of I_lambda restricted to the mass sphere.
inline double lagrange_multiplier(const EnergyBreakdown& e, const ProblemParams& pp) {
  if (!(e.H > 0.0)) throw Error("lagrange_multiplier needs a field with positive mass");
  return (e.T - pp.mu * e.A) / (2.0 * e.H);
}

inline double lagrange_multiplier(const Field& u, const Discretization& disc) {
  return lagrange_multiplier(action(u, disc), disc.params());
}

/// S_lambda - mu (p-1)/(2p) A, zero at solutions with unit mass coefficient.
inline Residual energy_identity_gap(const EnergyBreakdown& e, const ProblemParams& pp) {
  const double target = pp.mu * (pp.p - 1.0) / (2.0 * pp.p) * e.A;
  return detail::make_residual(e.S - target, {e.S, target});
}

inline Residual energy_identity_gap(const Field& u, const Discretization& disc) {
  return energy_identity_gap(action(u, disc), disc.params());
}

/// (mu/2p) A - H/D - (1-s) lambda semi / D with D = n + alpha - p(n-2): the
/// identity obtained by eliminating the gradient term between the Nehari and
/// Pohozaev relations (unit mass coefficient). Algebraically equal to
/// -(P - ((n-2)/2) N) / D for the raw Pohozaev residual P and Nehari residual N.
inline double nehari_pohozaev_combination(const EnergyBreakdown& e, const ProblemParams& pp) {
  const double D = pp.n + pp.alpha - pp.p * (pp.n - 2.0);
  if (D == 0.0) throw Error("n + alpha - p(n-2) vanishes at the HLS-critical exponent");
  return pp.mu / (2.0 * pp.p) * e.A - e.H / D - (1.0 - pp.s) * pp.lambda * e.semi / D;
}

}  // namespace choquard
