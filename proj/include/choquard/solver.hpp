#pragma once

// Constrained minimization of I_lambda over the mass sphere ||u||^2 = tau by a
// semi-implicit normalized gradient flow:
//
//   G = mu (I_alpha * |u|^p) |u|^{p-2} u + (c + 2 Lambda(u)) u
//   (1 + dt c) w + dt L w = u + dt G
//   u <- sqrt(tau) w / ||w||
//
// The stiff linear part is diagonal in Fourier space, so each step is one
// division per mode; the nonlinearity is explicit, stabilized by the shift c.
// The multiplier term 2 Lambda(u) u makes fixed points of the discrete map
// exact constrained critical points for every dt; it can be switched off
// (multiplier_correction = false), in which case fixed points carry an O(dt)
// bias in the strong residual.

#include "choquard/diagnostics.hpp"
#include "choquard/functionals.hpp"
#include "choquard/grid.hpp"
#include "choquard/operators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace choquard {

struct SolverOptions {
  double dt = 0.1;
  int max_iters = 20000;
  double tol_energy = 1e-10;    ///< relative change of I_lambda per step
  double tol_residual = 1e-6;   ///< relative strong-form residual
  double shift = 1.0;           ///< stabilization c >= 0
  double seed_width = 1.0;      ///< Gaussian seed exp(-a |x|^2)
  double energy_floor = -1e6;   ///< I_lambda below this declares unboundedness
  int max_dt_halvings = 10;
  int check_every = 25;         ///< strong residual / dilation probe cadence
  bool resolution_study = false;
  bool record_history = true;
  bool multiplier_correction = true;
  RieszOptions riesz{};

  void validate() const {
    auto fail = [](const std::string& what) { throw Error("invalid solver options: " + what); };
    if (!(dt > 0.0)) fail("dt must be > 0");
    if (max_iters < 1) fail("max_iters must be >= 1");
    if (!(tol_energy > 0.0) || !(tol_residual > 0.0)) fail("tolerances must be > 0");
    if (!(shift >= 0.0)) fail("shift c must be >= 0");
    if (!(seed_width > 0.0)) fail("seed_width must be > 0");
    if (max_dt_halvings < 0) fail("max_dt_halvings must be >= 0");
    if (check_every < 1) fail("check_every must be >= 1");
  }
};

enum class Divergence { none, energy_floor, non_finite, dilation_orbit };

inline std::string to_string(Divergence d) {
  switch (d) {
    case Divergence::none: return "none";
    case Divergence::energy_floor: return "energy_floor";
    case Divergence::non_finite: return "non_finite";
    case Divergence::dilation_orbit: return "dilation_orbit";
  }
  return "?";
}

struct HistoryRow {
  int iteration = 0;
  double I = 0.0;
  double S = 0.0;
  double dt = 0.0;
  double nehari_rel = 0.0;
  double equation_rel = std::numeric_limits<double>::quiet_NaN();
};

struct SolveReport {
  bool converged = false;
  bool diverged = false;
  Divergence divergence = Divergence::none;
  int iterations = 0;
  EnergyBreakdown breakdown{};
  double Lambda = 0.0;
  double delta = 0.0;            ///< -2 Lambda
  double nehari_rel = 0.0;       ///< Nehari residual with mass coefficient delta
  double equation_rel = 0.0;     ///< strong-form residual with mass coefficient delta
  double pohozaev_rel = 0.0;     ///< Pohozaev residual with mass coefficient delta
  double energy_gap_rel = 0.0;   ///< S - mu (p-1)/(2p) A, unit mass coefficient
  double dilation_min_energy = 0.0;
  double dilation_min_K = 1.0;
  double final_dt = 0.0;
  int dt_halvings = 0;
  double max_energy_increase = 0.0;
  std::string regime;            ///< filled by callers that classify
  GridSpec grid{};
  ProblemParams params{};
  SolverOptions options{};
  std::vector<std::string> warnings;
  std::vector<HistoryRow> history;
};

namespace detail {
/// Iterate with its Riesz potential and energies, so each step costs one
/// convolution.
struct FlowState {
  Field u;
  Field nonlinearity;  ///< (I_alpha * |u|^p) |u|^{p-2} u
  EnergyBreakdown e{};
};

inline FlowState evaluate_state(Field u, const Discretization& disc) {
  const ProblemParams& pp = disc.params();
  FlowState st;
  const Field f = abs_pow(u, pp.p);
  const Field potential = disc.riesz().apply(f);
  st.nonlinearity = Field(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = u[i];
    st.nonlinearity[i] = v == 0.0 ? 0.0 : potential[i] * std::copysign(std::pow(std::abs(v), pp.p - 1.0), v);
  }
  const auto parts = disc.mixed().parts(transform(u));
  st.e.H = mass(u);
  st.e.grad = parts.grad;
  st.e.semi = parts.semi;
  st.e.T = st.e.grad + pp.lambda * st.e.semi;
  st.e.A = inner(potential, f);
  st.e.I = 0.5 * st.e.T - pp.mu * st.e.A / (2.0 * pp.p);
  st.e.S = st.e.I + 0.5 * st.e.H;
  st.u = std::move(u);
  return st;
}

inline Field step_from(const FlowState& st, const Discretization& disc, const SolverOptions& opts) {
  const ProblemParams& pp = disc.params();
  if (!(st.e.H > 0.0)) throw Error("flow_step needs a field with positive mass");
  const double shift = opts.shift + (opts.multiplier_correction ? 2.0 * lagrange_multiplier(st.e, pp) : 0.0);
  Field rhs(st.u.grid());
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    rhs[i] = st.u[i] + opts.dt * (pp.mu * st.nonlinearity[i] + shift * st.u[i]);
  }
  Field w = disc.mixed().implicit_solve(rhs, opts.dt, opts.shift);
  const double m = mass(w);
  if (!std::isfinite(m) || !w.all_finite()) throw Error("flow step produced non-finite values (step too large)");
  if (!(m > 0.0)) throw Error("flow step collapsed to the zero field");
  w *= std::sqrt(pp.tau / m);
  return w;
}

/// Strong-form residual with delta = -2 Lambda, from a cached state.
inline Residual strong_residual(const FlowState& st, const Discretization& disc) {
  const double mu = disc.params().mu;
  const double delta = -2.0 * lagrange_multiplier(st.e, disc.params());
  const Field lu = disc.mixed().apply(st.u);
  Field r(st.u.grid());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = lu[i] + delta * st.u[i] - mu * st.nonlinearity[i];
  return make_residual(std::sqrt(mass(r)), {std::sqrt(mass(lu)), std::abs(delta) * std::sqrt(st.e.H),
                                            mu * std::sqrt(mass(st.nonlinearity))});
}
}  // namespace detail

/// One step of the normalized flow; result has mass tau to roundoff.
inline Field flow_step(const Field& u, const Discretization& disc, const SolverOptions& opts) {
  if (!(mass(u) > 0.0)) throw Error("flow_step needs a field with positive mass");
  return detail::step_from(detail::evaluate_state(u, disc), disc, opts);
}

inline Field flow_step(const Field& u, const ProblemParams& params, const SolverOptions& opts) {
  return flow_step(u, Discretization(u.grid(), params, opts.riesz), opts);
}

/// Mass-normalized Gaussian seed.
inline Field seed_field(const GridSpec& grid, const ProblemParams& pp, double width) {
  Field u = sample_gaussian(grid, width, 1.0);
  u *= std::sqrt(pp.tau / mass(u));
  return u;
}

/// I_lambda(u_K) for u_K(x) = K^{n/2} u(K x), from the continuum scaling of
/// each term of the breakdown of u.
inline double dilation_energy(const EnergyBreakdown& e, const ProblemParams& pp, double K) {
  const double scaling = pp.n * pp.p - pp.n - pp.alpha;
  return 0.5 * K * K * e.grad + 0.5 * std::pow(K, 2.0 * pp.s) * pp.lambda * e.semi -
         pp.mu / (2.0 * pp.p) * std::pow(K, scaling) * e.A;
}

/// d/dK I_lambda(u_K) at K = 1.
inline double dilation_slope(const EnergyBreakdown& e, const ProblemParams& pp) {
  const double scaling = pp.n * pp.p - pp.n - pp.alpha;
  return e.grad + pp.s * pp.lambda * e.semi - pp.mu * scaling / (2.0 * pp.p) * e.A;
}

struct DilationPoint {
  double K = 1.0;
  double I = 0.0;                  ///< closed-form scaling of the breakdown
  std::optional<double> resampled; ///< I_lambda of the spectrally dilated field, when requested
};

/// Dilation energy curve K -> I_lambda(u_K). With `cross_check`, each K is also
/// evaluated on the resampled field (fourier_interpolate) for comparison.
inline std::vector<DilationPoint> dilation_energy_curve(const Field& u, const Discretization& disc,
                                                        const std::vector<double>& Ks, bool cross_check = false) {
  const EnergyBreakdown e = action(u, disc);
  std::vector<DilationPoint> out;
  out.reserve(Ks.size());
  for (double K : Ks) {
    if (!(K > 0.0)) throw Error("dilation factors must be positive");
    DilationPoint pt{K, dilation_energy(e, disc.params(), K), std::nullopt};
    if (cross_check) pt.resampled = action(fourier_interpolate(u, K), disc).I;
    out.push_back(pt);
  }
  return out;
}

/// True when K -> I_lambda(u_K) is unbounded below as K -> infinity: the
/// Choquard term carries the leading power (np - n - alpha > 2), or ties with
/// the gradient term and outweighs it.
inline bool dilation_orbit_unbounded(const EnergyBreakdown& e, const ProblemParams& pp) {
  if (!(e.A > 0.0)) return false;
  const double scaling = pp.n * pp.p - pp.n - pp.alpha;
  if (scaling > 2.0 * (1.0 + 1e-12)) return true;
  if (std::abs(scaling - 2.0) <= 2e-12) return pp.mu * e.A / pp.p > e.grad;
  return false;
}

/// Smallest closed-form dilation energy over K = 2^j, j = -60..60.
inline std::pair<double, double> dilation_orbit_minimum(const EnergyBreakdown& e, const ProblemParams& pp) {
  double best = std::numeric_limits<double>::infinity();
  double best_K = 1.0;
  for (int j = -60; j <= 60; ++j) {
    const double K = std::ldexp(1.0, j);
    const double v = dilation_energy(e, pp, K);
    if (v < best) {
      best = v;
      best_K = K;
    }
  }
  return {best, best_K};
}

/// Dilation-orbit divergence test: the orbit is unbounded below, the field
/// sits on its descending branch (so K -> I_lambda(u_K) decreases for all
/// K >= 1), and its sampled minimum already lies under the floor.
inline bool dilation_orbit_below_floor(const EnergyBreakdown& e, const ProblemParams& pp, double floor) {
  return dilation_orbit_unbounded(e, pp) && dilation_slope(e, pp) < 0.0 && dilation_orbit_minimum(e, pp).first < floor;
}

/// v(x) = delta^{-(2+alpha)/(4(p-1))} u(delta^{-1/2} x), the inverse of the
/// rescaling u(x) = delta^{(2+alpha)/(4(p-1))} v(delta^{1/2} x).
inline Field delta_rescale(const Field& u, double delta, const ProblemParams& pp) {
  if (!(delta > 0.0)) throw Error("rescaling coefficient delta must be positive");
  Field v = resample_scaled(u, std::pow(delta, -0.5));
  v *= std::pow(delta, -(2.0 + pp.alpha) / (4.0 * (pp.p - 1.0)));
  return v;
}

/// Continuum exponents of the delta-rescaling: H(u) = delta^A H(v),
/// grad(u) = delta^B grad(v), [u]^2 = delta^C [v]^2, A_p(u) = delta^B A_p(v).
struct RescaleExponents {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
};

inline RescaleExponents rescale_exponents(const ProblemParams& pp) {
  const double n = pp.n;
  const double p = pp.p;
  const double a = pp.alpha;
  const double d = 2.0 * (p - 1.0);
  return {(2.0 + a + n - n * p) / d, (n + a - p * (n - 2.0)) / d, (2.0 + a - (n - 2.0 * pp.s) * (p - 1.0)) / d};
}

namespace detail {
inline void finalize_report(SolveReport& r, const Field& u, const Discretization& disc) {
  const ProblemParams& pp = disc.params();
  r.breakdown = action(u, disc);
  r.Lambda = lagrange_multiplier(r.breakdown, pp);
  r.delta = -2.0 * r.Lambda;
  r.nehari_rel = nehari_residual(r.breakdown, pp, r.delta).relative;
  r.equation_rel = equation_residual_norm(u, disc, r.delta).relative;
  r.pohozaev_rel = pohozaev_residual(r.breakdown, pp, r.delta).relative;
  r.energy_gap_rel = energy_identity_gap(r.breakdown, pp).relative;
  const auto [emin, kmin] = dilation_orbit_minimum(r.breakdown, pp);
  r.dilation_min_energy = emin;
  r.dilation_min_K = kmin;
}
}  // namespace detail

/// Called with (iteration, iterate, breakdown) for the seed and every accepted iterate.
using FlowObserver = std::function<void(int, const Field&, const EnergyBreakdown&)>;

/// Runs the flow from a Gaussian seed. Returns the last iterate and a report.
/// The flow stops on convergence (energy change and strong residual below
/// tolerance), on max_iters, or on divergence: non-finite values, I_lambda
/// below the floor, or the dilation orbit of the iterate reaching the floor.
inline std::pair<Field, SolveReport> solve_ground_state(const ProblemParams& params, const GridSpec& grid,
                                                        const SolverOptions& opts,
                                                        const FlowObserver& observer = {}) {
  params.validate();
  opts.validate();
  WarningCapture capture;
  const Discretization disc(grid, params, opts.riesz);
  SolveReport report;
  report.grid = grid;
  report.params = params;
  report.options = opts;

  detail::FlowState st = detail::evaluate_state(seed_field(grid, params, opts.seed_width), disc);
  double dt = opts.dt;
  SolverOptions step_opts = opts;
  const double roundoff = 16.0 * std::numeric_limits<double>::epsilon() * std::sqrt(static_cast<double>(grid.size()));
  int it = 0;

  auto record = [&](int iteration, const EnergyBreakdown& eb, double eq_rel) {
    if (!opts.record_history) return;
    const double delta = -2.0 * lagrange_multiplier(eb, params);
    report.history.push_back({iteration, eb.I, eb.S, dt, nehari_residual(eb, params, delta).relative, eq_rel});
  };
  record(0, st.e, std::numeric_limits<double>::quiet_NaN());
  if (observer) observer(0, st.u, st.e);

  for (it = 1; it <= opts.max_iters; ++it) {
    step_opts.dt = dt;
    detail::FlowState next;
    try {
      next = detail::evaluate_state(detail::step_from(st, disc, step_opts), disc);
    } catch (const Error&) {
      report.diverged = true;
      report.divergence = Divergence::non_finite;
      break;
    }
    if (!std::isfinite(next.e.I)) {
      report.diverged = true;
      report.divergence = Divergence::non_finite;
      break;
    }
    const double increase = next.e.I - st.e.I;
    const double noise = roundoff * std::max({1.0, std::abs(st.e.I), st.e.T, params.mu * st.e.A});
    if (increase > noise) {
      report.max_energy_increase = std::max(report.max_energy_increase, increase);
      if (report.dt_halvings < opts.max_dt_halvings) {
        dt *= 0.5;
        ++report.dt_halvings;
        std::ostringstream os;
        os << "I_lambda increased by " << increase << " at iteration " << it << "; halving dt to " << dt;
        warn(os.str());
        --it;
        continue;
      }
    }
    const double change = std::abs(increase) / std::max(std::abs(next.e.I), 1e-300);
    st = std::move(next);
    if (observer) observer(it, st.u, st.e);

    if (st.e.I < opts.energy_floor) {
      report.diverged = true;
      report.divergence = Divergence::energy_floor;
      break;
    }

    const bool energy_ok = change < opts.tol_energy;
    double eq_rel = std::numeric_limits<double>::quiet_NaN();
    if (energy_ok || it % opts.check_every == 0) {
      eq_rel = detail::strong_residual(st, disc).relative;
      if (dilation_orbit_below_floor(st.e, params, opts.energy_floor)) {
        report.diverged = true;
        report.divergence = Divergence::dilation_orbit;
        record(it, st.e, eq_rel);
        break;
      }
      if (energy_ok && eq_rel <= opts.tol_residual) {
        report.converged = true;
        record(it, st.e, eq_rel);
        break;
      }
    }
    if (it % opts.check_every == 0) record(it, st.e, eq_rel);
  }
  Field u = std::move(st.u);
  report.iterations = std::min(it, opts.max_iters);
  report.final_dt = dt;
  detail::finalize_report(report, u, disc);
  if (!report.diverged && dilation_orbit_below_floor(report.breakdown, params, opts.energy_floor)) {
    report.diverged = true;
    report.divergence = Divergence::dilation_orbit;
  }
  if (report.diverged) report.converged = false;
  report.warnings = capture.messages();
  return {std::move(u), std::move(report)};
}

}  // namespace choquard
