#include "choquard/choquard.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace choquard;
using Catch::Matchers::WithinRel;

TEST_CASE("rational parsing is exact", "[regimes]") {
  CHECK(parse_rational("5/3") == Rational(5) / Rational(3));
  CHECK(parse_rational("1.8") == Rational(9) / Rational(5));
  CHECK(parse_rational("2e-1") == Rational(1) / Rational(5));
  CHECK(parse_rational("-0.25") == Rational(-1) / Rational(4));
  CHECK(parse_rational("10/4").str() == "5/2");
  CHECK_THROWS_AS(parse_rational("abc"), Error);
  CHECK_THROWS_AS(parse_rational("1/0"), Error);
  CHECK_THROWS_AS(parse_rational(""), Error);
  CHECK_THROWS_AS(parse_rational("1e"), Error);
}

TEST_CASE("critical exponents at (3, 2, 1/2)", "[regimes]") {
  const auto ex = critical_exponents(3, parse_rational("2"), parse_rational("1/2"));
  CHECK(ex.lower.str() == "5/3");
  CHECK(ex.s_upper.str() == "2");
  CHECK(ex.l2_critical.str() == "7/3");
  REQUIRE(ex.hls_upper);
  CHECK(ex.hls_upper->str() == "5");
  const auto d = critical_exponents(3, 2.0, 0.5);
  CHECK_THAT(d.l2_critical, WithinRel(7.0 / 3.0, 1e-15));
  CHECK_FALSE(critical_exponents(2, 1.0, 0.5).hls_upper);
  CHECK_THROWS_AS(critical_exponents(3, 3.0, 0.5), Error);
  CHECK_THROWS_AS(critical_exponents(3, 2.0, 1.5), Error);
}

TEST_CASE("classification at and between the boundaries", "[regimes]") {
  auto label = [](const std::string& p) {
    return classify(3, parse_rational("2"), parse_rational("1/2"), parse_rational(p));
  };
  CHECK_THROWS_AS(label("1.6"), Error);
  CHECK(label("5/3") == RegimeLabel::LowerCritical);
  CHECK(label("1.8") == RegimeLabel::ExistenceWindow);
  CHECK(label("2") == RegimeLabel::BoundedBelowOpen);
  CHECK(label("2.2") == RegimeLabel::BoundedBelowOpen);
  CHECK(label("7/3") == RegimeLabel::L2Critical);
  CHECK(label("3") == RegimeLabel::UnboundedBelow);
  CHECK(label("5") == RegimeLabel::HLSCritical);
  CHECK(label("6") == RegimeLabel::Supercritical);
  CHECK(classify(3, 2.0, 0.5, 7.0 / 3.0) == RegimeLabel::L2Critical);
  CHECK(classify(3, 2.0, 0.5, 5.0 / 3.0) == RegimeLabel::LowerCritical);
  CHECK(classify(1, 0.5, 0.5, 10.0) == RegimeLabel::UnboundedBelow);
}

TEST_CASE("partition is total and monotone in p", "[regimes]") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> frac(0.01, 0.99);
  for (int t = 0; t < 1000; ++t) {
    const int n = dim(rng);
    const double alpha = frac(rng) * n;
    const double s = frac(rng);
    const CriticalExponents c = critical_exponents(n, alpha, s);
    const double top = c.hls_upper ? *c.hls_upper * 1.5 : c.l2_critical * 2.0;
    int previous = -1;
    for (int k = 0; k <= 200; ++k) {
      const double p = c.lower + (top - c.lower) * k / 200.0;
      const int cur = static_cast<int>(classify(n, alpha, s, p));
      REQUIRE(cur >= previous);
      previous = cur;
    }
    CHECK(classify(n, alpha, s, c.lower) == RegimeLabel::LowerCritical);
    CHECK(classify(n, alpha, s, c.l2_critical) == RegimeLabel::L2Critical);
    CHECK(classify(n, alpha, s, c.s_upper) == RegimeLabel::BoundedBelowOpen);
    if (c.hls_upper) {
      CHECK(classify(n, alpha, s, *c.hls_upper) == RegimeLabel::HLSCritical);
      CHECK(classify(n, alpha, s, *c.hls_upper * (1.0 + 1e-9)) == RegimeLabel::Supercritical);
    }
  }
}

TEST_CASE("mass thresholds", "[regimes]") {
  const double C = 0.1;
  CHECK_THAT(mu_star_l2critical(3, 2.0, 1.0, C), WithinRel(7.0 / (6.0 * C), 1e-14));
  CHECK_THAT(mu_star_l2critical(3, 2.0, 2.0, C), WithinRel(7.0 / (6.0 * C) / std::pow(2.0, 4.0 / 3.0), 1e-14));
  const double base = 3.0 + 2.0 + 2.0 - 3.0 * 1.8;
  CHECK_THAT(mu_star_equivalence(3, 2.0, 1.8, 1.0, C), WithinRel(1.8 / (C * std::pow(base, 0.5 * base)), 1e-14));
  CHECK_THROWS_AS(mu_star_equivalence(3, 2.0, 7.0 / 3.0, 1.0, C), Error);
  CHECK_THROWS_AS(mu_star_l2critical(3, 2.0, 1.0, 0.0), Error);
}

TEST_CASE("nonexistence identities have opposite signs on nonzero fields", "[regimes]") {
  WarningCapture quiet;
  const GridSpec g = make_grid(3, 16, 8.0);
  const Field u = sample_gaussian(g, 0.7, 1.0);
  const ProblemParams lower{3, 2.0, 0.5, 5.0 / 3.0, 0.05, 1.0, 1.0};
  const ContradictionReport a = nonexistence_contradiction(u, lower);
  CHECK(a.regime == RegimeLabel::LowerCritical);
  CHECK(a.lhs_sign == 1);
  CHECK(a.rhs_sign == -1);
  CHECK(a.opposite_signs);
  const ProblemParams hls{3, 2.0, 0.5, 5.0, 0.05, 1.0, 1.0};
  const ContradictionReport b = nonexistence_contradiction(u, hls);
  CHECK(b.regime == RegimeLabel::HLSCritical);
  CHECK(b.lhs_sign == -1);
  CHECK(b.rhs_sign == 1);
  CHECK(b.opposite_signs);
  CHECK_THROWS_AS(nonexistence_contradiction(u, ProblemParams{}), Error);
}

TEST_CASE("nonexistence labels", "[regimes]") {
  CHECK(is_nonexistence_label(RegimeLabel::LowerCritical));
  CHECK(is_nonexistence_label(RegimeLabel::HLSCritical));
  CHECK_FALSE(is_nonexistence_label(RegimeLabel::UnboundedBelow));
  CHECK(to_string(RegimeLabel::BoundedBelowOpen) == "BoundedBelowOpen");
}
