#include "choquard/choquard.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace choquard;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

namespace {
constexpr double pi = std::numbers::pi;

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
}  // namespace

TEST_CASE("spectral Riesz convolution equals direct summation on 8^3", "[operators][oracle]") {
  const GridSpec g = make_grid(3, 8, 4.0);
  const Field f = random_field(g, 11);
  const MultiplierCache c = build_multiplier(g, MultiplierKind::riesz, 2.0);
  CHECK(max_rel(apply_multiplier(f, c), direct_convolve_oracle(f, c)) <= 1e-10);
}

TEST_CASE("spectral fractional Laplacian equals direct summation on 16 points", "[operators][oracle]") {
  const GridSpec g = make_grid(1, 16, 6.0);
  const Field f = random_field(g, 12);
  const MultiplierCache c = build_multiplier(g, MultiplierKind::fractional, 0.3);
  CHECK(max_rel(apply_multiplier(f, c), direct_convolve_oracle(f, c)) <= 1e-10);
}

TEST_CASE("multiplier tables match their symbols", "[operators]") {
  const GridSpec g = make_grid(3, 8, 5.0);
  const MultiplierCache c = build_multiplier(g, MultiplierKind::riesz, 1.5);
  std::size_t i = 0;
  for_each_mode(g, [&](std::size_t idx, const Mode& m) {
    if (m.k_sq == 0.0) {
      CHECK(c.table()[idx] == c.zero_mode());
      return;
    }
    const double w = 2.0 * pi * std::sqrt(m.k_sq) / g.L;
    CHECK_THAT(c.table()[idx], WithinRel(std::pow(w, -1.5), 1e-13));
    ++i;
  });
  CHECK(i + 1 == g.spectral_size());
  CHECK(c.symbol({1, 0, 0}) == Catch::Approx(std::pow(2.0 * pi / g.L, -1.5)));
}

TEST_CASE("zero-mode policies", "[operators]") {
  const GridSpec g = make_grid(3, 8, 4.0);
  CHECK(build_multiplier(g, MultiplierKind::riesz, 2.0, {ZeroModePolicy::zero, 0.0}).zero_mode() == 0.0);
  CHECK(build_multiplier(g, MultiplierKind::riesz, 2.0, {ZeroModePolicy::user, 3.5}).zero_mode() == 3.5);
  // Mean of |x|^{-1}/(4 pi) over the inscribed ball of radius L/2, times its volume ratio: (L/2)^2 / 2.
  CHECK_THAT(build_multiplier(g, MultiplierKind::riesz, 2.0).zero_mode(), WithinRel(2.0, 1e-12));
  CHECK(zero_mode_policy_from_string("user") == ZeroModePolicy::user);
  CHECK_THROWS_AS(zero_mode_policy_from_string("mean"), Error);
}

TEST_CASE("order ranges are validated", "[operators]") {
  const GridSpec g = make_grid(3, 8, 4.0);
  CHECK_THROWS_AS(build_multiplier(g, MultiplierKind::riesz, 3.0), Error);
  CHECK_THROWS_AS(build_multiplier(g, MultiplierKind::riesz, 0.0), Error);
  CHECK_THROWS_AS(build_multiplier(g, MultiplierKind::fractional, 1.5), Error);
  CHECK_THROWS_AS(mixed_apply(Field(g), 0.1, 1.0), Error);
  CHECK_THROWS_AS(MixedOperator(g, -0.1, 0.5), Error);
}

TEST_CASE("plane waves are eigenfunctions of the mixed operator", "[operators][oracle]") {
  const GridSpec g = make_grid(3, 16, 5.0);
  const double lambda = 0.3;
  const double s = 0.4;
  const Field u = sample(g, [&](const Point& x) { return std::cos(2.0 * pi * (2.0 * x[0] + x[2]) / g.L); });
  const double w2 = std::pow(2.0 * pi / g.L, 2) * 5.0;
  const double eig = w2 + lambda * std::pow(w2, s);
  const Field lu = mixed_apply(u, lambda, s);
  for (std::size_t i = 0; i < u.size(); ++i) REQUIRE_THAT(lu[i], WithinAbs(eig * u[i], 1e-10));
  const Field ru = riesz_convolve(u, 1.0, {RieszBoundary::periodic, {}});
  for (std::size_t i = 0; i < u.size(); ++i) REQUIRE_THAT(ru[i], WithinAbs(u[i] / std::sqrt(w2), 1e-12));
}

TEST_CASE("mixed operator is self-adjoint and nonnegative", "[operators]") {
  const GridSpec g = make_grid(2, 32, 6.0);
  const Field u = random_field(g, 1);
  const Field v = random_field(g, 2);
  const MixedOperator op(g, 0.2, 0.7);
  CHECK_THAT(inner(op.apply(u), v), WithinRel(inner(u, op.apply(v)), 1e-12));
  CHECK(inner(op.apply(u), u) >= 0.0);
  const auto parts = op.parts(transform(u));
  CHECK_THAT(parts.grad, WithinRel(grad_norm_sq(u), 1e-12));
  CHECK_THAT(parts.semi, WithinRel(frac_seminorm_sq(u, 0.7), 1e-12));
  CHECK_THAT(inner(op.apply(u), u), WithinRel(parts.grad + 0.2 * parts.semi, 1e-12));
}

TEST_CASE("implicit solve inverts (1 + dt c) + dt L", "[operators]") {
  const GridSpec g = make_grid(3, 16, 6.0);
  const Field rhs = random_field(g, 5);
  const double dt = 0.3;
  const double c = 1.5;
  const Field w = implicit_solve(rhs, dt, 0.05, 0.5, c);
  Field back = w * (1.0 + dt * c) + mixed_apply(w, 0.05, 0.5) * dt;
  CHECK(max_rel(back, rhs) < 1e-12);
  CHECK_THROWS_AS(implicit_solve(rhs, -1.0, 0.05, 0.5, c), Error);
}

TEST_CASE("Gaussian gradient norm and fractional seminorm", "[operators][oracle]") {
  WarningCapture quiet;
  const Field u = sample_gaussian(make_grid(3, 64, 16.0), 1.0, 1.0);
  CHECK_THAT(grad_norm_sq(u), WithinRel(3.0 * std::pow(pi / 2.0, 1.5), 1e-8));
  // n=1, s=1/2: [u]^2 = int |2 pi xi| pi exp(-2 pi^2 xi^2) d xi = 1 for u = exp(-x^2).
  const Field v = sample_gaussian(make_grid(1, std::size_t{1} << 19, 32768.0), 1.0, 1.0);
  CHECK_THAT(frac_seminorm_sq(v, 0.5), WithinRel(1.0, 1e-8));
  CHECK_THAT(frac_seminorm_sq(v, 1.0), WithinRel(grad_norm_sq(v), 1e-12));
}

TEST_CASE("Newtonian potential of a Gaussian matches the erf form", "[operators][oracle]") {
  WarningCapture quiet;
  const GridSpec g = make_grid(3, 64, 16.0);
  const Field v = riesz_convolve(sample_gaussian(g, 1.0, 1.0), 2.0);
  CHECK_THAT(v[g.origin()], WithinRel(0.5, 1e-3));
  for (std::size_t j = 1; j < 10; ++j) {
    const double r = g.coordinate(g.N / 2 + j);
    CHECK_THAT(v[g.origin() + j], WithinRel(std::sqrt(pi) * std::erf(r) / (4.0 * r), 1e-3));
  }
}

TEST_CASE("free-space Riesz beats the periodic one on the Newtonian oracle", "[operators]") {
  WarningCapture quiet;
  const GridSpec g = make_grid(3, 32, 16.0);
  const double free = verify::newtonian_error(g, {RieszBoundary::free_space, {}});
  const double periodic = verify::newtonian_error(g, {RieszBoundary::periodic, {}});
  CHECK(free < 1e-3);
  CHECK(free < periodic);
}

TEST_CASE("free-space Riesz is symmetric and reflection invariant", "[operators]") {
  WarningCapture quiet;
  const GridSpec g = make_grid(3, 16, 8.0);
  const Field f = sample_gaussian(g, 0.5, 1.0);
  const Field h = sample(g, [](const Point& x) { return std::exp(-std::pow(x[0] - 0.7, 2) - x[1] * x[1] - 0.5 * x[2] * x[2]); });
  const RieszOperator op(g, 1.5);
  CHECK_THAT(inner(op.apply(f), h), WithinRel(inner(f, op.apply(h)), 1e-12));
  const Field v = op.apply(f);
  // x -> -x maps lattice index i to N - i on interior points.
  const std::size_t N = g.N;
  for (std::size_t i = 1; i < N; ++i) {
    const std::size_t a = (8 * N + 8) * N + i;
    const std::size_t b = (8 * N + 8) * N + (N - i);
    REQUIRE_THAT(v[a], WithinRel(v[b], 1e-12));
  }
}

TEST_CASE("periodic Riesz semigroup away from the zero mode", "[operators]") {
  const GridSpec g = make_grid(3, 16, 6.0);
  const RieszOptions zero{RieszBoundary::periodic, {ZeroModePolicy::zero, 0.0}};
  const Field f = random_field(g, 9);
  const Field twice = riesz_convolve(riesz_convolve(f, 0.7, zero), 0.8, zero);
  const Field once = riesz_convolve(f, 1.5, zero);
  CHECK(max_rel(twice, once) <= 1e-6);
}

TEST_CASE("Riesz boundary names", "[operators]") {
  CHECK(riesz_boundary_from_string("periodic") == RieszBoundary::periodic);
  CHECK(to_string(RieszBoundary::free_space) == "free_space");
  CHECK_THROWS_AS(riesz_boundary_from_string("open"), Error);
}
