#pragma once

// Truncated periodic domain [-L/2, L/2)^n, grid functions on it and the
// transforms between physical and spectral representations.
//
// Conventions: the lattice point with multi-index j sits at x_j = -L/2 + j h,
// h = L / N, so the origin is a lattice point (j = N/2). Spectral coefficients
// approximate the continuum transform with kernel exp(-2 pi i x.xi) up to the
// constant phase of the lattice offset:
//
//   uhat_k = h^n sum_j u_j exp(-2 pi i j.k / N),   xi_k = k / L,
//
// so that Parseval reads  h^n sum_j u_j^2 = L^-n sum_k |uhat_k|^2.

#include "choquard/diagnostics.hpp"
#include "choquard/fft.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

namespace choquard {

using complex = std::complex<double>;
using Point = std::array<double, 3>;
using Index = std::array<std::size_t, 3>;

struct GridSpec {
  int n = 3;            ///< spatial dimension, 1..3
  std::size_t N = 32;   ///< points per axis, power of two
  double L = 16.0;      ///< box side

  double spacing() const { return L / static_cast<double>(N); }
  double cell_volume() const { return std::pow(spacing(), n); }
  double box_volume() const { return std::pow(L, n); }
  std::size_t size() const { return fft::real_size(n, N); }
  std::size_t spectral_size() const { return fft::half_spectrum_size(n, N); }

  /// Coordinate of lattice index i along any axis.
  double coordinate(std::size_t i) const { return -0.5 * L + static_cast<double>(i) * spacing(); }

  /// Multi-index of a flat (row-major, last axis fastest) position.
  Index unflatten(std::size_t flat) const {
    Index idx{0, 0, 0};
    for (int d = n - 1; d >= 0; --d) {
      idx[static_cast<std::size_t>(d)] = flat % N;
      flat /= N;
    }
    return idx;
  }

  Point position(std::size_t flat) const {
    Index idx = unflatten(flat);
    Point x{0.0, 0.0, 0.0};
    for (int d = 0; d < n; ++d) x[static_cast<std::size_t>(d)] = coordinate(idx[static_cast<std::size_t>(d)]);
    return x;
  }

  /// Flat position of the origin x = 0.
  std::size_t origin() const {
    std::size_t flat = 0;
    for (int d = 0; d < n; ++d) flat = flat * N + N / 2;
    return flat;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline GridSpec make_grid(int n, std::size_t N, double L) {
  if (n < 1 || n > 3) throw Error("dimension n must be 1, 2 or 3");
  if (!is_power_of_two(N)) throw Error("N must be power of two");
  if (N < 8) throw Error("N must be at least 8");
  if (!(L > 0.0) || !std::isfinite(L)) throw Error("box length L must be positive");
  return GridSpec{n, N, L};
}

inline std::string describe(const GridSpec& g) {
  std::ostringstream os;
  os << "GridSpec{n=" << g.n << ",N=" << g.N << ",L=" << g.L << "}";
  return os.str();
}

/// Real grid function with cell-volume weighted norms.
class Field {
 public:
  Field() = default;
  explicit Field(const GridSpec& grid) : grid_(grid), values_(grid.size(), 0.0) {}
  Field(const GridSpec& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw Error("field size does not match grid");
  }

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  Field& operator+=(const Field& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  Field& operator*=(double c) {
    for (double& v : values_) v *= c;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, double c) { return a *= c; }
  friend Field operator*(double c, Field a) { return a *= c; }

  void check_same_grid(const Field& o) const {
    if (!(grid_ == o.grid_)) throw Error("grid mismatch: " + describe(grid_) + " vs " + describe(o.grid_));
  }

 private:
  GridSpec grid_{};
  std::vector<double> values_;
};

/// Weighted L2 inner product, h^n sum u v.
inline double inner(const Field& u, const Field& v) {
  u.check_same_grid(v);
  double acc = 0.0;
  auto a = u.values();
  auto b = v.values();
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc * u.grid().cell_volume();
}

/// H(u) = ||u||_2^2.
inline double mass(const Field& u) { return inner(u, u); }

/// ||u||_t for any t >= 1 (pointwise |u|^t with cell weighting).
inline double lp_norm(const Field& u, double t) {
  double acc = 0.0;
  for (double v : u.values()) acc += std::pow(std::abs(v), t);
  return std::pow(acc * u.grid().cell_volume(), 1.0 / t);
}

inline double max_abs(const Field& u) {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

/// Field sampled from a function of position.
inline Field sample(const GridSpec& grid, const std::function<double(const Point&)>& fn) {
  Field u(grid);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = fn(grid.position(i));
  return u;
}

inline double radius_sq(const Point& x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; }

/// c exp(-a |x|^2) on the lattice.
inline Field sample_gaussian(const GridSpec& grid, double a, double c) {
  if (!(a > 0.0)) throw Error("Gaussian width parameter a must be positive");
  const double edge = std::exp(-a * 0.25 * grid.L * grid.L);
  if (c != 0.0 && edge > 1e-10) {
    std::ostringstream os;
    os << "Gaussian exp(-a|x|^2) with a=" << a << " is " << edge << " at the box edge L/2=" << 0.5 * grid.L
       << "; box too small for decay";
    warn(os.str());
  }
  return sample(grid, [a, c](const Point& x) { return c * std::exp(-a * radius_sq(x)); });
}

// ---------------------------------------------------------------------------
// Spectral side

/// Integer wave numbers of a half-spectrum position. Axes other than the last
/// run over [-N/2, N/2); the last axis holds k in [0, N/2].
struct Mode {
  std::array<int, 3> k{0, 0, 0};
  double weight = 1.0;  ///< multiplicity in full-lattice sums (1 or 2)
  double k_sq = 0.0;    ///< |k|^2 in integer units
};

template <typename Fn>
void for_each_mode(const GridSpec& grid, Fn&& fn) {
  const int n = grid.n;
  const auto N = static_cast<long>(grid.N);
  const long half = N / 2;
  std::array<long, 3> ext{1, 1, 1};
  for (int d = 0; d < n - 1; ++d) ext[static_cast<std::size_t>(d)] = N;
  ext[static_cast<std::size_t>(n - 1)] = half + 1;
  std::size_t flat = 0;
  std::array<long, 3> idx{0, 0, 0};
  const std::size_t total = grid.spectral_size();
  for (; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int d = n - 1; d >= 0; --d) {
      auto e = static_cast<std::size_t>(ext[static_cast<std::size_t>(d)]);
      idx[static_cast<std::size_t>(d)] = static_cast<long>(rem % e);
      rem /= e;
    }
    Mode m;
    for (int d = 0; d < n; ++d) {
      long i = idx[static_cast<std::size_t>(d)];
      long k = (d == n - 1) ? i : (i < half ? i : i - N);
      m.k[static_cast<std::size_t>(d)] = static_cast<int>(k);
      m.k_sq += static_cast<double>(k * k);
    }
    long last = idx[static_cast<std::size_t>(n - 1)];
    m.weight = (last == 0 || last == half) ? 1.0 : 2.0;
    fn(flat, m);
  }
}

/// Coefficients on the half lattice; the other half follows from Hermitian
/// symmetry of real fields.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const GridSpec& grid) : grid_(grid), coeffs_(grid.spectral_size()) {}

  const GridSpec& grid() const { return grid_; }
  std::span<const complex> coefficients() const { return coeffs_; }
  std::span<complex> coefficients() { return coeffs_; }

  /// Coefficient at an arbitrary full-lattice wave vector k (components taken
  /// modulo N, so both -N/2 and N/2 name the Nyquist mode).
  complex coefficient(std::array<int, 3> k) const {
    const auto N = static_cast<int>(grid_.N);
    auto wrap = [N](int v) { return ((v % N) + N) % N; };
    const int last = grid_.n - 1;
    int kl = wrap(k[static_cast<std::size_t>(last)]);
    bool conj = false;
    if (kl > N / 2) {
      conj = true;
      for (int d = 0; d < grid_.n; ++d) k[static_cast<std::size_t>(d)] = -k[static_cast<std::size_t>(d)];
      kl = wrap(k[static_cast<std::size_t>(last)]);
    }
    std::size_t flat = 0;
    for (int d = 0; d < last; ++d) flat = flat * grid_.N + static_cast<std::size_t>(wrap(k[static_cast<std::size_t>(d)]));
    flat = flat * (grid_.N / 2 + 1) + static_cast<std::size_t>(kl);
    complex c = coeffs_[flat];
    return conj ? std::conj(c) : c;
  }

  /// L^-n sum_k |uhat_k|^2 over the full lattice.
  double energy() const {
    double acc = 0.0;
    for_each_mode(grid_, [&](std::size_t i, const Mode& m) { acc += m.weight * std::norm(coeffs_[i]); });
    return acc / grid_.box_volume();
  }

 private:
  GridSpec grid_{};
  std::vector<complex> coeffs_;
};

inline SpectralField transform(const Field& u) {
  const GridSpec& g = u.grid();
  SpectralField out(g);
  fft::plan_for(g.n, g.N)->forward(u.values(), out.coefficients());
  const double h = g.cell_volume();
  for (complex& c : out.coefficients()) c *= h;
  return out;
}

inline Field inverse_transform(const SpectralField& spec) {
  const GridSpec& g = spec.grid();
  Field out(g);
  fft::plan_for(g.n, g.N)->backward(spec.coefficients(), out.values());
  out *= 1.0 / g.box_volume();
  return out;
}

/// Consumes the spectrum (avoids the copy c2r would otherwise need).
inline Field inverse_transform(SpectralField&& spec) {
  const GridSpec& g = spec.grid();
  Field out(g);
  fft::plan_for(g.n, g.N)->backward_destructive(spec.coefficients(), out.values());
  out *= 1.0 / g.box_volume();
  return out;
}

// ---------------------------------------------------------------------------
// Band-limited resampling

namespace detail {

/// Row j holds the weights that evaluate the trigonometric interpolant of N
/// periodic samples at scale * x_j. Points that land outside the box get a
/// zero row: fields are taken to vanish outside the computational domain.
inline std::vector<double> interpolation_matrix(const GridSpec& g, double scale) {
  const std::size_t N = g.N;
  const double L = g.L;
  std::vector<double> w(N * N, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    const double t = scale * g.coordinate(j);
    if (std::abs(t) > 0.5 * L * (1.0 + 1e-12)) continue;
    for (std::size_t i = 0; i < N; ++i) {
      const double theta = 2.0 * std::numbers::pi * (t - g.coordinate(i)) / L;
      double acc = 1.0;
      for (std::size_t k = 1; k < N / 2; ++k) acc += 2.0 * std::cos(static_cast<double>(k) * theta);
      acc += std::cos(0.5 * static_cast<double>(N) * theta);
      w[j * N + i] = acc / static_cast<double>(N);
    }
  }
  return w;
}

/// Applies the same 1-D matrix along every axis of the field.
inline Field apply_separable(const Field& u, const std::vector<double>& w) {
  const GridSpec& g = u.grid();
  const std::size_t N = g.N;
  Field cur = u;
  for (int axis = 0; axis < g.n; ++axis) {
    std::size_t stride = 1;
    for (int d = axis + 1; d < g.n; ++d) stride *= N;
    Field next(g);
    std::vector<double> line(N);
    const std::size_t total = g.size();
    for (std::size_t base = 0; base < total; ++base) {
      // Visit each line once, from its first element.
      if ((base / stride) % N != 0) continue;
      for (std::size_t i = 0; i < N; ++i) line[i] = cur[base + i * stride];
      for (std::size_t j = 0; j < N; ++j) {
        double acc = 0.0;
        const double* row = &w[j * N];
        for (std::size_t i = 0; i < N; ++i) acc += row[i] * line[i];
        next[base + j * stride] = acc;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

/// Fraction of spectral energy in modes with some |k_d| above `cutoff`.
inline double spectral_fraction_above(const Field& u, double cutoff) {
  SpectralField s = transform(u);
  double total = 0.0;
  double above = 0.0;
  auto coeffs = s.coefficients();
  for_each_mode(u.grid(), [&](std::size_t i, const Mode& m) {
    double e = m.weight * std::norm(coeffs[i]);
    total += e;
    for (int d = 0; d < u.grid().n; ++d)
      if (std::abs(m.k[static_cast<std::size_t>(d)]) > cutoff) {
        above += e;
        break;
      }
  });
  return total > 0.0 ? above / total : 0.0;
}

/// Fraction of mass outside the centred cube of half-width `half_width`.
inline double mass_fraction_outside(const Field& u, double half_width) {
  const GridSpec& g = u.grid();
  double total = 0.0;
  double outside = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v2 = u[i] * u[i];
    total += v2;
    Point x = g.position(i);
    for (int d = 0; d < g.n; ++d)
      if (std::abs(x[static_cast<std::size_t>(d)]) > half_width) {
        outside += v2;
        break;
      }
  }
  return total > 0.0 ? outside / total : 0.0;
}

}  // namespace detail

/// Values of the band-limited interpolant of u at the points scale * x_j,
/// i.e. u(scale x), with zero outside the box. Warns when the map loses
/// resolved content (Nyquist spill for scale > 1, truncated mass for scale < 1).
inline Field resample_scaled(const Field& u, double scale) {
  if (!(scale > 0.0)) throw Error("dilation factor must be positive");
  if (scale == 1.0) return u;
  const GridSpec& g = u.grid();
  if (scale > 1.0) {
    const double spill = detail::spectral_fraction_above(u, 0.5 * static_cast<double>(g.N) / scale);
    if (spill > 1e-10) {
      std::ostringstream os;
      os << "dilation by " << scale << " pushes spectral energy fraction " << spill << " past the Nyquist frequency";
      warn(os.str());
    }
  } else {
    const double lost = detail::mass_fraction_outside(u, 0.5 * g.L * scale);
    if (lost > 1e-10) {
      std::ostringstream os;
      os << "dilation by " << scale << " moves mass fraction " << lost << " outside the box";
      warn(os.str());
    }
  }
  return detail::apply_separable(u, detail::interpolation_matrix(g, scale));
}

/// Mass-preserving dilation u_K(x) = K^{n/2} u(K x).
inline Field fourier_interpolate(const Field& u, double K) {
  Field out = resample_scaled(u, K);
  out *= std::pow(K, 0.5 * u.grid().n);
  return out;
}

}  // namespace choquard
