#pragma once

// Gamma function by two unrelated algorithms, plus the constants built on it.
// gamma_lanczos is the production path; gamma_stirling exists so the
// constant evaluators can be cross-checked against an independent route.

#include "choquard/diagnostics.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace choquard::special {

/// Lanczos approximation in rational form (13 terms, g ~ 6.0247), the
/// double-precision set popularized by Boost.Math. Relative error ~1e-15 on
/// the positive axis; reflection handles x < 1/2.
inline double gamma_lanczos(double x) {
  if (x < 0.5) {
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_lanczos(1.0 - x));
  }
  constexpr double g = 6.024680040776729583740234375;
  constexpr std::array<double, 13> num{23531376880.41075968857200767445163675473,
                                       42919803642.64909876895789904700198885093,
                                       35711959237.35566804944018545154716670596,
                                       17921034426.03720969991975575445893111267,
                                       6039542586.35202800506429164430729792107,
                                       1439720407.311721673663223072794912393972,
                                       248874557.8620541565114603864132294232163,
                                       31426415.58540019438061423162831820536287,
                                       2876370.628935372441225409051620849613599,
                                       186056.2653952234950402949897160456992822,
                                       8071.672002365816210638002902272250613822,
                                       210.8242777515793458725097339207133627117,
                                       2.506628274631000270164908177133837338626};
  constexpr std::array<double, 13> den{0.0,       39916800.0, 120543840.0, 150917976.0, 105258076.0,
                                       45995730.0, 13339535.0, 2637558.0,   357423.0,    32670.0,
                                       1925.0,     66.0,       1.0};
  // Horner in 1/x keeps the rational evaluation stable for large x.
  double p = 0.0;
  double q = 0.0;
  if (x <= 1.0) {
    for (std::size_t i = num.size(); i-- > 0;) {
      p = p * x + num[i];
      q = q * x + den[i];
    }
  } else {
    const double z = 1.0 / x;
    for (std::size_t i = 0; i < num.size(); ++i) {
      p = p * z + num[i];
      q = q * z + den[i];
    }
  }
  const double zgh = x + g - 0.5;
  // Split the power so large arguments do not overflow early.
  const double h = std::pow(zgh, 0.5 * (x - 0.5));
  return p / q * (h / std::exp(zgh)) * h;
}

/// log Gamma(x) for x > 0 by upward recurrence to x >= 20 followed by the
/// Stirling series with Bernoulli corrections through B_16.
inline double log_gamma_stirling(double x) {
  if (!(x > 0.0)) throw Error("log_gamma_stirling requires x > 0");
  double shift = 0.0;
  while (x < 20.0) {
    shift -= std::log(x);
    x += 1.0;
  }
  // B_2k / (2k (2k-1))
  constexpr std::array<double, 8> coef{1.0 / 12.0,          -1.0 / 360.0,     1.0 / 1260.0,  -1.0 / 1680.0,
                                       1.0 / 1188.0,        -691.0 / 360360.0, 1.0 / 156.0, -3617.0 / 122400.0};
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double p = inv;
  for (double ck : coef) {
    series += ck * p;
    p *= inv2;
  }
  return shift + (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

inline double gamma_stirling(double x) { return std::exp(log_gamma_stirling(x)); }

/// Surface area of the unit sphere in R^n, 2 pi^{n/2} / Gamma(n/2).
inline double unit_sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / gamma_lanczos(0.5 * n);
}

/// A_{n,alpha} = Gamma((n-alpha)/2) / (pi^{n/2} 2^alpha Gamma(alpha/2)), the
/// normalization that makes the Riesz potential's symbol |2 pi xi|^{-alpha}.
inline double riesz_constant(int n, double alpha) {
  if (!(alpha > 0.0 && alpha < n)) throw Error("Riesz order alpha must lie in (0, n)");
  return gamma_lanczos(0.5 * (n - alpha)) /
         (std::pow(std::numbers::pi, 0.5 * n) * std::pow(2.0, alpha) * gamma_lanczos(0.5 * alpha));
}

}  // namespace choquard::special
