#pragma once

// Critical exponents of the Choquard problem, the regime partition of the
// p-axis, the explicit coupling thresholds, and the sign probes behind the
// two nonexistence results.

#include "choquard/diagnostics.hpp"
#include "choquard/functionals.hpp"
#include "choquard/grid.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>

namespace choquard {

__extension__ using int128 = __int128;

/// Exact rational with 64-bit parts, normalized (den > 0, gcd 1).
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
    if (d == 0) throw Error("rational with zero denominator");
    normalize();
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend Rational operator+(const Rational& a, const Rational& b) { return make(wide(a.num) * b.den + wide(b.num) * a.den, wide(a.den) * b.den); }
  friend Rational operator-(const Rational& a, const Rational& b) { return make(wide(a.num) * b.den - wide(b.num) * a.den, wide(a.den) * b.den); }
  friend Rational operator*(const Rational& a, const Rational& b) { return make(wide(a.num) * b.num, wide(a.den) * b.den); }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num == 0) throw Error("rational division by zero");
    return make(wide(a.num) * b.den, wide(a.den) * b.num);
  }
  friend int compare(const Rational& a, const Rational& b) {
    const int128 l = wide(a.num) * b.den;
    const int128 r = wide(b.num) * a.den;
    return l < r ? -1 : (l > r ? 1 : 0);
  }
  friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
  friend bool operator<(const Rational& a, const Rational& b) { return compare(a, b) < 0; }

  std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

 private:
  static int128 wide(std::int64_t v) { return static_cast<int128>(v); }

  static Rational make(int128 n, int128 d) {
    if (d == 0) throw Error("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    int128 a = n < 0 ? -n : n;
    int128 b = d;
    while (b != 0) {
      const int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      n /= a;
      d /= a;
    }
    constexpr int128 lim = static_cast<int128>(INT64_MAX);
    if (n > lim || n < -lim || d > lim) throw Error("rational overflow");
    Rational r;
    r.num = static_cast<std::int64_t>(n);
    r.den = static_cast<std::int64_t>(d);
    return r;
  }

  void normalize() { *this = make(num, den); }
};

/// Parses "5/3", "-2", "1.8", "0.05" or "1e-2" exactly.
inline Rational parse_rational(const std::string& text) {
  auto fail = [&]() -> Rational { throw Error("cannot parse '" + text + "' as a rational number"); };
  if (text.empty()) return fail();
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const Rational a = parse_rational(text.substr(0, slash));
    const Rational b = parse_rational(text.substr(slash + 1));
    return a / b;
  }
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') negative = text[i++] == '-';
  std::int64_t mantissa = 0;
  int exponent = 0;
  bool digits = false;
  bool dot = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c >= '0' && c <= '9') {
      if (mantissa > (INT64_MAX - 9) / 10) throw Error("rational overflow parsing '" + text + "'");
      mantissa = mantissa * 10 + (c - '0');
      if (dot) --exponent;
      digits = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else if (c == 'e' || c == 'E') {
      const std::string rest = text.substr(i + 1);
      if (rest.empty()) return fail();
      std::size_t used = 0;
      int e = 0;
      try {
        e = std::stoi(rest, &used);
      } catch (const std::exception&) {
        return fail();
      }
      if (used != rest.size()) return fail();
      exponent += e;
      i = text.size();
      break;
    } else {
      return fail();
    }
  }
  if (!digits) return fail();
  Rational r(negative ? -mantissa : mantissa);
  if (std::abs(exponent) > 18) throw Error("exponent out of range parsing '" + text + "'");
  std::int64_t scale = 1;
  for (int k = 0; k < std::abs(exponent); ++k) scale *= 10;
  return exponent >= 0 ? r * Rational(scale) : r / Rational(scale);
}

struct CriticalExponents {
  double lower = 0.0;        ///< (n + alpha) / n
  double s_upper = 0.0;      ///< (2s + n + alpha) / n
  double l2_critical = 0.0;  ///< (2 + n + alpha) / n
  std::optional<double> hls_upper;  ///< (n + alpha) / (n - 2), n >= 3
};

struct ExactCriticalExponents {
  Rational lower;
  Rational s_upper;
  Rational l2_critical;
  std::optional<Rational> hls_upper;
};

inline void check_orders(int n, double alpha, double s) {
  if (n < 1 || n > 3) throw Error("n must be 1, 2 or 3");
  if (!(alpha > 0.0 && alpha < n)) throw Error("alpha must satisfy 0 < alpha < n");
  if (!(s > 0.0 && s <= 1.0)) throw Error("s must satisfy 0 < s <= 1");
}

inline CriticalExponents critical_exponents(int n, double alpha, double s) {
  check_orders(n, alpha, s);
  CriticalExponents c;
  c.lower = (n + alpha) / n;
  c.s_upper = (2.0 * s + n + alpha) / n;
  c.l2_critical = (2.0 + n + alpha) / n;
  if (n >= 3) c.hls_upper = (n + alpha) / (n - 2.0);
  return c;
}

inline ExactCriticalExponents critical_exponents(int n, const Rational& alpha, const Rational& s) {
  check_orders(n, alpha.value(), s.value());
  const Rational nn(n);
  ExactCriticalExponents c;
  c.lower = (nn + alpha) / nn;
  c.s_upper = (Rational(2) * s + nn + alpha) / nn;
  c.l2_critical = (Rational(2) + nn + alpha) / nn;
  if (n >= 3) c.hls_upper = (nn + alpha) / Rational(n - 2);
  return c;
}

enum class RegimeLabel { LowerCritical, ExistenceWindow, BoundedBelowOpen, L2Critical, UnboundedBelow, HLSCritical, Supercritical };

inline std::string to_string(RegimeLabel r) {
  switch (r) {
    case RegimeLabel::LowerCritical: return "LowerCritical";
    case RegimeLabel::ExistenceWindow: return "ExistenceWindow";
    case RegimeLabel::BoundedBelowOpen: return "BoundedBelowOpen";
    case RegimeLabel::L2Critical: return "L2Critical";
    case RegimeLabel::UnboundedBelow: return "UnboundedBelow";
    case RegimeLabel::HLSCritical: return "HLSCritical";
    case RegimeLabel::Supercritical: return "Supercritical";
  }
  return "?";
}

/// Labels that the CLI reports as a regime finding rather than a solution.
inline bool is_nonexistence_label(RegimeLabel r) {
  return r == RegimeLabel::LowerCritical || r == RegimeLabel::HLSCritical;
}

namespace detail {
/// Partition given a three-way comparison of p against each boundary.
template <class Cmp>
RegimeLabel partition(Cmp cmp_lower, Cmp cmp_s_upper, Cmp cmp_l2, std::optional<Cmp> cmp_hls) {
  const int lo = cmp_lower();
  if (lo < 0) throw Error("p lies below the admissible bound (n+alpha)/n");
  if (lo == 0) return RegimeLabel::LowerCritical;
  const int l2 = cmp_l2();
  if (l2 == 0) return RegimeLabel::L2Critical;
  if (l2 < 0) return cmp_s_upper() < 0 ? RegimeLabel::ExistenceWindow : RegimeLabel::BoundedBelowOpen;
  if (cmp_hls) {
    const int h = (*cmp_hls)();
    if (h == 0) return RegimeLabel::HLSCritical;
    if (h > 0) return RegimeLabel::Supercritical;
  }
  return RegimeLabel::UnboundedBelow;
}

inline int tolerant_compare(double p, double b) {
  if (std::abs(p - b) <= 1e-12 * std::max(std::abs(p), std::abs(b))) return 0;
  return p < b ? -1 : 1;
}
}  // namespace detail

/// Regime of p for (n, alpha, s); boundaries match within 1e-12 relative.
inline RegimeLabel classify(int n, double alpha, double s, double p) {
  const CriticalExponents c = critical_exponents(n, alpha, s);
  using F = std::function<int()>;
  std::optional<F> hls;
  if (c.hls_upper) hls = F([&] { return detail::tolerant_compare(p, *c.hls_upper); });
  return detail::partition<F>([&] { return detail::tolerant_compare(p, c.lower); },
                              [&] { return detail::tolerant_compare(p, c.s_upper); },
                              [&] { return detail::tolerant_compare(p, c.l2_critical); }, hls);
}

inline RegimeLabel classify(const ProblemParams& pp) { return classify(pp.n, pp.alpha, pp.s, pp.p); }

/// Exact classification for rational inputs.
inline RegimeLabel classify(int n, const Rational& alpha, const Rational& s, const Rational& p) {
  const ExactCriticalExponents c = critical_exponents(n, alpha, s);
  using F = std::function<int()>;
  std::optional<F> hls;
  if (c.hls_upper) hls = F([&] { return compare(p, *c.hls_upper); });
  return detail::partition<F>([&] { return compare(p, c.lower); }, [&] { return compare(p, c.s_upper); },
                              [&] { return compare(p, c.l2_critical); }, hls);
}

/// mu_* = (2 + n + alpha) / (2 n C tau^{(alpha+2)/n}).
inline double mu_star_l2critical(int n, double alpha, double tau, double C_np) {
  if (!(C_np > 0.0) || !(tau > 0.0)) throw Error("mu_star_l2critical needs C_np > 0 and tau > 0");
  if (!(alpha > 0.0 && alpha < n)) throw Error("alpha must satisfy 0 < alpha < n");
  return (2.0 + n + alpha) / (2.0 * n * C_np * std::pow(tau, (alpha + 2.0) / n));
}

/// mu^* = p tau^{1-p} / (C (n + alpha + 2 - np)^{(n + alpha + 2 - np)/2}).
inline double mu_star_equivalence(int n, double alpha, double p, double tau, double C_np) {
  if (!(C_np > 0.0) || !(tau > 0.0)) throw Error("mu_star_equivalence needs C_np > 0 and tau > 0");
  if (!(alpha > 0.0 && alpha < n)) throw Error("alpha must satisfy 0 < alpha < n");
  const double base = n + alpha + 2.0 - n * p;
  if (!(base > 0.0)) throw Error("mu_star_equivalence needs p < (2+n+alpha)/n");
  if (!(p > 1.0)) throw Error("mu_star_equivalence needs p > 1");
  return p * std::pow(tau, 1.0 - p) / (C_np * std::pow(base, 0.5 * base));
}

/// Two sides of the identity that any solution would have to satisfy at a
/// critical exponent, evaluated on an arbitrary field:
///   LowerCritical: ||grad u||^2 = -s lambda [u]^2
///   HLSCritical:   -||u||^2     = (1-s) lambda [u]^2
struct ContradictionReport {
  RegimeLabel regime = RegimeLabel::LowerCritical;
  std::string identity;
  double lhs = 0.0;
  double rhs = 0.0;
  int lhs_sign = 0;
  int rhs_sign = 0;
  bool opposite_signs = false;  ///< strict: one side > 0, the other < 0
  double gap = 0.0;             ///< |lhs - rhs|
};

inline int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

inline ContradictionReport nonexistence_contradiction(const EnergyBreakdown& e, const ProblemParams& pp) {
  ContradictionReport r;
  r.regime = classify(pp);
  if (r.regime == RegimeLabel::LowerCritical) {
    r.identity = "grad = -s*lambda*semi";
    r.lhs = e.grad;
    r.rhs = -pp.s * pp.lambda * e.semi;
  } else if (r.regime == RegimeLabel::HLSCritical) {
    r.identity = "-H = (1-s)*lambda*semi";
    r.lhs = -e.H;
    r.rhs = (1.0 - pp.s) * pp.lambda * e.semi;
  } else {
    throw Error("nonexistence_contradiction applies only at p = (n+alpha)/n or p = (n+alpha)/(n-2), not in regime " +
                to_string(r.regime));
  }
  r.lhs_sign = sign_of(r.lhs);
  r.rhs_sign = sign_of(r.rhs);
  r.opposite_signs = r.lhs_sign * r.rhs_sign < 0;
  r.gap = std::abs(r.lhs - r.rhs);
  return r;
}

inline ContradictionReport nonexistence_contradiction(const Field& u, const ProblemParams& pp,
                                                      const RieszOptions& riesz = {}) {
  return nonexistence_contradiction(action(u, pp, riesz), pp);
}

}  // namespace choquard
