#pragma once

// Fourier-multiplier operators on the periodic box:
//
//   -Delta        <->  |2 pi xi|^2
//   (-Delta)^s    <->  |2 pi xi|^{2s}
//   I_alpha *     <->  |2 pi xi|^{-alpha}
//
// With this normalization the constants C(n,s) and A_{n,alpha} never appear
// in the numerics. The Riesz symbol is singular at xi = 0; its value there is
// set by a ZeroMode policy. A second, free-space route (FreeSpaceRiesz)
// convolves with the truncated kernel on a padded grid and reproduces the
// R^n potential of fields supported in the box.

#include "choquard/diagnostics.hpp"
#include "choquard/grid.hpp"
#include "choquard/special.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

namespace choquard {

enum class MultiplierKind { laplacian, fractional, riesz };

enum class ZeroModePolicy {
  box_mean,  ///< A_{n,a} sigma_{n-1} (L/2)^a / a: mean of the kernel truncated to the inscribed ball
  zero,
  user,
};

struct ZeroMode {
  ZeroModePolicy policy = ZeroModePolicy::box_mean;
  double value = 0.0;  ///< used when policy == user
};

inline std::string to_string(ZeroModePolicy p) {
  switch (p) {
    case ZeroModePolicy::box_mean: return "box_mean";
    case ZeroModePolicy::zero: return "zero";
    case ZeroModePolicy::user: return "user";
  }
  return "?";
}

inline ZeroModePolicy zero_mode_policy_from_string(const std::string& s) {
  if (s == "box_mean") return ZeroModePolicy::box_mean;
  if (s == "zero") return ZeroModePolicy::zero;
  if (s == "user") return ZeroModePolicy::user;
  throw Error("unknown zero-mode policy '" + s + "'");
}

/// Zero-mode value of the Riesz symbol under `zm`.
inline double riesz_zero_mode(const GridSpec& g, double alpha, const ZeroMode& zm) {
  switch (zm.policy) {
    case ZeroModePolicy::box_mean:
      return special::riesz_constant(g.n, alpha) * special::unit_sphere_area(g.n) * std::pow(0.5 * g.L, alpha) /
             alpha;
    case ZeroModePolicy::zero: return 0.0;
    case ZeroModePolicy::user: return zm.value;
  }
  return 0.0;
}

/// |2 pi xi|^2 for the wave vector of a mode.
inline double wavenumber_sq(const GridSpec& g, const Mode& m) {
  const double scale = 2.0 * std::numbers::pi / g.L;
  return scale * scale * m.k_sq;
}

class MultiplierCache {
 public:
  MultiplierCache(const GridSpec& grid, MultiplierKind kind, double param, double zero_mode,
                  std::vector<double> table)
      : grid_(grid), kind_(kind), param_(param), zero_mode_(zero_mode), table_(std::move(table)) {}

  const GridSpec& grid() const { return grid_; }
  MultiplierKind kind() const { return kind_; }
  double param() const { return param_; }
  double zero_mode() const { return zero_mode_; }
  std::span<const double> table() const { return table_; }

  /// Symbol at a full-lattice wave vector.
  double symbol(std::array<int, 3> k) const {
    double ksq = 0.0;
    for (int d = 0; d < grid_.n; ++d) ksq += static_cast<double>(k[static_cast<std::size_t>(d)]) * k[static_cast<std::size_t>(d)];
    if (ksq == 0.0) return zero_mode_;
    Mode m;
    m.k_sq = ksq;
    const double w2 = wavenumber_sq(grid_, m);
    switch (kind_) {
      case MultiplierKind::laplacian: return w2;
      case MultiplierKind::fractional: return std::pow(w2, param_);
      case MultiplierKind::riesz: return std::pow(w2, -0.5 * param_);
    }
    return 0.0;
  }

  /// Test hook: overwrite one table entry (fault injection for the verify suite).
  void corrupt_entry(std::size_t i, double value) { table_.at(i) = value; }

 private:
  GridSpec grid_;
  MultiplierKind kind_;
  double param_;
  double zero_mode_;
  std::vector<double> table_;
};

inline MultiplierCache build_multiplier(const GridSpec& grid, MultiplierKind kind, double param = 0.0,
                                        const ZeroMode& zm = {}) {
  double zero = 0.0;
  switch (kind) {
    case MultiplierKind::laplacian: param = 1.0; break;
    case MultiplierKind::fractional:
      if (!(param > 0.0 && param <= 1.0)) throw Error("fractional order s must lie in (0, 1]");
      break;
    case MultiplierKind::riesz:
      if (!(param > 0.0 && param < grid.n)) throw Error("Riesz order alpha must lie in (0, n)");
      zero = riesz_zero_mode(grid, param, zm);
      break;
  }
  std::vector<double> table(grid.spectral_size());
  for_each_mode(grid, [&](std::size_t i, const Mode& m) {
    if (m.k_sq == 0.0) {
      table[i] = zero;
      return;
    }
    const double w2 = wavenumber_sq(grid, m);
    switch (kind) {
      case MultiplierKind::laplacian: table[i] = w2; break;
      case MultiplierKind::fractional: table[i] = std::pow(w2, param); break;
      case MultiplierKind::riesz: table[i] = std::pow(w2, -0.5 * param); break;
    }
  });
  return MultiplierCache(grid, kind, param, zero, std::move(table));
}

/// inverse_transform(m(xi) uhat(xi)).
inline Field apply_multiplier(const Field& u, const MultiplierCache& cache) {
  if (!(u.grid() == cache.grid())) throw Error("grid mismatch between field and multiplier");
  SpectralField s = transform(u);
  auto c = s.coefficients();
  auto m = cache.table();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= m[i];
  return inverse_transform(std::move(s));
}

/// Symbol-weighted spectral energy L^-n sum_k m_k |uhat_k|^2.
inline double spectral_quadratic(const SpectralField& s, std::span<const double> table) {
  double acc = 0.0;
  auto c = s.coefficients();
  for_each_mode(s.grid(), [&](std::size_t i, const Mode& m) { acc += m.weight * table[i] * std::norm(c[i]); });
  return acc / s.grid().box_volume();
}

/// ||grad u||_2^2 = sum |2 pi xi|^2 |uhat|^2.
inline double grad_norm_sq(const Field& u) {
  SpectralField s = transform(u);
  double acc = 0.0;
  auto c = s.coefficients();
  for_each_mode(u.grid(), [&](std::size_t i, const Mode& m) { acc += m.weight * wavenumber_sq(u.grid(), m) * std::norm(c[i]); });
  return acc / u.grid().box_volume();
}

/// Spectral form of the Gagliardo seminorm [u]^2 = sum_{xi != 0} |2 pi xi|^{2s} |uhat|^2.
inline double frac_seminorm_sq(const Field& u, double s) {
  if (!(s > 0.0 && s <= 1.0)) throw Error("fractional order s must lie in (0, 1]");
  SpectralField sp = transform(u);
  double acc = 0.0;
  auto c = sp.coefficients();
  for_each_mode(u.grid(), [&](std::size_t i, const Mode& m) {
    if (m.k_sq == 0.0) return;
    acc += m.weight * std::pow(wavenumber_sq(u.grid(), m), s) * std::norm(c[i]);
  });
  return acc / u.grid().box_volume();
}

/// The mixed operator -Delta + lambda (-Delta)^s with its tables kept for
/// repeated application inside the flow.
class MixedOperator {
 public:
  MixedOperator(const GridSpec& grid, double lambda, double s)
      : grid_(grid), lambda_(lambda), s_(s), laplacian_(grid.spectral_size()), fractional_(grid.spectral_size()) {
    if (!(lambda >= 0.0)) throw Error("mixing weight lambda must be nonnegative");
    if (!(s > 0.0 && s <= 1.0)) throw Error("fractional order s must lie in (0, 1]");
    for_each_mode(grid, [&](std::size_t i, const Mode& m) {
      const double w2 = wavenumber_sq(grid, m);
      laplacian_[i] = w2;
      fractional_[i] = m.k_sq == 0.0 ? 0.0 : std::pow(w2, s);
    });
  }

  const GridSpec& grid() const { return grid_; }
  double lambda() const { return lambda_; }
  double s() const { return s_; }
  std::span<const double> laplacian_table() const { return laplacian_; }
  std::span<const double> fractional_table() const { return fractional_; }
  double symbol(std::size_t i) const { return laplacian_[i] + lambda_ * fractional_[i]; }

  Field apply(const Field& u) const {
    check(u);
    SpectralField sp = transform(u);
    auto c = sp.coefficients();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= symbol(i);
    return inverse_transform(std::move(sp));
  }

  /// Solves (1 + dt c) w + dt L w = rhs.
  Field implicit_solve(const Field& rhs, double dt, double shift) const {
    check(rhs);
    if (!(dt >= 0.0)) throw Error("time step must be nonnegative");
    if (!(shift >= 0.0)) throw Error("stabilization shift must be nonnegative");
    SpectralField sp = transform(rhs);
    auto c = sp.coefficients();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] /= 1.0 + dt * (shift + symbol(i));
    return inverse_transform(std::move(sp));
  }

  struct Parts {
    double grad = 0.0;
    double semi = 0.0;
  };
  /// ||grad u||^2 and [u]^2 from an existing spectrum.
  Parts parts(const SpectralField& sp) const {
    return {spectral_quadratic(sp, laplacian_), spectral_quadratic(sp, fractional_)};
  }

 private:
  void check(const Field& u) const {
    if (!(u.grid() == grid_)) throw Error("grid mismatch: " + describe(u.grid()) + " vs " + describe(grid_));
  }
  GridSpec grid_;
  double lambda_;
  double s_;
  std::vector<double> laplacian_;
  std::vector<double> fractional_;
};

/// L u = -Delta u + lambda (-Delta)^s u.
inline Field mixed_apply(const Field& u, double lambda, double s) {
  if (!(s > 0.0 && s < 1.0)) throw Error("fractional order s must lie in (0, 1)");
  return MixedOperator(u.grid(), lambda, s).apply(u);
}

/// Unique w with (1 + dt c) w + dt L w = rhs.
inline Field implicit_solve(const Field& rhs, double dt, double lambda, double s, double c) {
  if (!(s > 0.0 && s < 1.0)) throw Error("fractional order s must lie in (0, 1)");
  return MixedOperator(rhs.grid(), lambda, s).implicit_solve(rhs, dt, c);
}

/// O(N^{2n}) periodic convolution with the kernel whose transform is the
/// multiplier table. Correctness oracle for apply_multiplier; refuses grids
/// with more than 4096 points.
inline Field direct_convolve_oracle(const Field& f, const MultiplierCache& cache) {
  const GridSpec& g = f.grid();
  if (!(g == cache.grid())) throw Error("grid mismatch between field and multiplier");
  if (g.size() > 4096) throw Error("direct convolution oracle is limited to N^n <= 4096 points");
  // Kernel in displacement-index layout: G_d = L^-n sum_k m_k exp(2 pi i k.d / N).
  SpectralField symbol(g);
  auto c = symbol.coefficients();
  auto m = cache.table();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = m[i];
  const Field kernel = inverse_transform(symbol);

  const std::size_t N = g.N;
  const double h = g.cell_volume();
  Field out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Index xi = g.unflatten(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const Index xj = g.unflatten(j);
      std::size_t d = 0;
      for (int a = 0; a < g.n; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        d = d * N + (xi[ua] + N - xj[ua]) % N;
      }
      acc += kernel[d] * f[j];
    }
    out[i] = h * acc;
  }
  return out;
}

/// Writes frequency tuple and symbol value per half-lattice mode.
inline void dump_multiplier_csv(const MultiplierCache& cache, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path);
  os.precision(17);
  const GridSpec& g = cache.grid();
  for (int d = 0; d < g.n; ++d) os << "xi" << d << ',';
  os << "symbol\n";
  auto t = cache.table();
  for_each_mode(g, [&](std::size_t i, const Mode& m) {
    for (int d = 0; d < g.n; ++d) os << m.k[static_cast<std::size_t>(d)] / g.L << ',';
    os << t[i] << '\n';
  });
}

// ---------------------------------------------------------------------------
// Free-space Riesz potential

/// Transform of the kernel A |x|^{a-n} truncated to the ball of radius R,
/// evaluated at frequency magnitude rho:
///   A sigma_{n-1} int_0^R r^{a-1} Phi_n(2 pi rho r) dr,
/// with Phi_n the angular average of exp(-i k.x): cos, J_0 or sinc for n = 1, 2, 3.
inline double truncated_riesz_symbol(int n, double alpha, double R, double rho) {
  const double A = special::riesz_constant(n, alpha);
  const double sigma = special::unit_sphere_area(n);
  if (rho == 0.0) return A * sigma * std::pow(R, alpha) / alpha;
  const double k = 2.0 * std::numbers::pi * rho;
  auto phi = [n](double z) -> double {
    switch (n) {
      case 1: return std::cos(z);
      case 2: return std::cyl_bessel_j(0.0, z);
      default: return z == 0.0 ? 1.0 : std::sin(z) / z;
    }
  };
  using boost::math::quadrature::gauss;
  const double kR = k * R;
  double integral = 0.0;
  if (alpha < 1.0) {
    // r = R t^{1/alpha} removes the r^{alpha-1} endpoint singularity.
    const auto panels = static_cast<int>(std::ceil(kR / alpha / 2.0)) + 4;
    auto f = [&](double t) { return phi(kR * std::pow(t, 1.0 / alpha)); };
    for (int p = 0; p < panels; ++p) {
      const double a = static_cast<double>(p) / panels;
      const double b = static_cast<double>(p + 1) / panels;
      integral += gauss<double, 20>::integrate(f, a, b);
    }
    integral *= std::pow(R, alpha) / alpha;
  } else {
    const auto panels = static_cast<int>(std::ceil(kR / 2.0)) + 4;
    auto f = [&](double r) { return std::pow(r, alpha - 1.0) * phi(k * r); };
    const double width = R / panels;
    // Geometric grading of the first panel for the r^{alpha-1} kink at 0.
    double lo = width;
    for (int level = 0; level < 12; ++level) {
      const double a = 0.5 * lo;
      integral += gauss<double, 20>::integrate(f, a, lo);
      lo = a;
    }
    integral += gauss<double, 20>::integrate(f, 0.0, lo);
    for (int p = 1; p < panels; ++p) integral += gauss<double, 20>::integrate(f, p * width, (p + 1) * width);
  }
  return A * sigma * integral;
}

/// Free-space convolution I_alpha * f for f supported in the box, exact up to
/// the resolution of f: the kernel truncated at R = sqrt(n) L is transformed
/// analytically on a 4x oversampled frequency lattice, brought back to real
/// space, restricted to displacements inside [-L, L]^n and applied on a
/// 2x zero-padded grid. The boundary planes x_d = -L/2 have no mirror image in
/// the box, so they are excluded from both input and output; this keeps the
/// operator symmetric and invariant under x -> -x.
class FreeSpaceRiesz {
 public:
  FreeSpaceRiesz(const GridSpec& grid, double alpha) : grid_(grid), alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < grid.n)) throw Error("Riesz order alpha must lie in (0, n)");
    padded_ = GridSpec{grid.n, 2 * grid.N, 2 * grid.L};
    build();
  }

  const GridSpec& grid() const { return grid_; }
  double alpha() const { return alpha_; }
  std::span<const double> padded_table() const { return table_; }

  Field apply(const Field& f) const {
    if (!(f.grid() == grid_)) throw Error("grid mismatch between field and Riesz operator");
    const std::size_t M = padded_.N;
    Field pad(padded_);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!on_boundary(i)) pad[embed(i, M)] = f[i];
    }
    SpectralField s = transform(pad);
    auto c = s.coefficients();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= table_[i];
    Field full = inverse_transform(std::move(s));
    Field out(grid_);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = on_boundary(i) ? 0.0 : full[embed(i, M)];
    return out;
  }

 private:
  bool on_boundary(std::size_t flat) const {
    const Index idx = grid_.unflatten(flat);
    for (int d = 0; d < grid_.n; ++d) {
      if (idx[static_cast<std::size_t>(d)] == 0) return true;
    }
    return false;
  }

  std::size_t embed(std::size_t flat, std::size_t M) const {
    const Index idx = grid_.unflatten(flat);
    std::size_t out = 0;
    for (int d = 0; d < grid_.n; ++d) out = out * M + idx[static_cast<std::size_t>(d)];
    return out;
  }

  void build() {
    const int n = grid_.n;
    const std::size_t N = grid_.N;
    const double P = 4.0 * grid_.L;  // oversampled period, >= (1 + sqrt(n)) L
    const double R = std::sqrt(static_cast<double>(n)) * grid_.L;
    const std::size_t E = 2 * N + 1;  // cosine-transform extent, k = 0..2N

    // Symbol values depend only on |k|^2; cache by integer key.
    std::vector<double> by_ksq(static_cast<std::size_t>(n) * 4 * N * N + 1, std::nan(""));
    auto symbol = [&](std::size_t ksq) {
      double& v = by_ksq[ksq];
      if (std::isnan(v)) v = truncated_riesz_symbol(n, alpha_, R, std::sqrt(static_cast<double>(ksq)) / P);
      return v;
    };

    std::vector<double> x(fft::real_size(n, E));
    for (std::size_t flat = 0; flat < x.size(); ++flat) {
      std::size_t rem = flat;
      std::size_t ksq = 0;
      for (int d = 0; d < n; ++d) {
        const std::size_t k = rem % E;
        rem /= E;
        ksq += k * k;
      }
      x[flat] = symbol(ksq);
    }

    // Even extension of the 4N-periodic spectrum: a type-I cosine transform
    // gives sum_k X_|k| exp(2 pi i k.d / 4N) for d = 0..2N.
    std::vector<double> y(x.size());
    {
      std::array<int, 3> dims{};
      std::array<fftw_r2r_kind, 3> kinds{};
      for (int d = 0; d < n; ++d) {
        dims[static_cast<std::size_t>(d)] = static_cast<int>(E);
        kinds[static_cast<std::size_t>(d)] = FFTW_REDFT00;
      }
      fftw_plan plan;
      {
        std::lock_guard lock(fft::Plan::planner_mutex());
        plan = fftw_plan_r2r(n, dims.data(), x.data(), y.data(), kinds.data(), FFTW_ESTIMATE);
      }
      fftw_execute(plan);
      std::lock_guard lock(fft::Plan::planner_mutex());
      fftw_destroy_plan(plan);
    }
    const double inv_volume = 1.0 / std::pow(P, n);

    // Real-space kernel on the 2N-periodic padded grid, displacement layout.
    const std::size_t M = padded_.N;
    Field kernel(padded_);
    for (std::size_t flat = 0; flat < kernel.size(); ++flat) {
      std::size_t rem = flat;
      std::size_t src = 0;
      std::size_t stride = 1;
      for (int d = n - 1; d >= 0; --d) {
        const std::size_t j = rem % M;
        rem /= M;
        const std::size_t disp = j <= N ? j : M - j;
        src += disp * stride;
        stride *= E;
      }
      kernel[flat] = y[src] * inv_volume;
    }
    SpectralField ks = transform(kernel);
    table_.resize(ks.coefficients().size());
    for (std::size_t i = 0; i < table_.size(); ++i) table_[i] = ks.coefficients()[i].real();
  }

  GridSpec grid_;
  GridSpec padded_;
  double alpha_;
  std::vector<double> table_;
};

enum class RieszBoundary { periodic, free_space };

inline std::string to_string(RieszBoundary b) { return b == RieszBoundary::periodic ? "periodic" : "free_space"; }

inline RieszBoundary riesz_boundary_from_string(const std::string& s) {
  if (s == "periodic") return RieszBoundary::periodic;
  if (s == "free_space") return RieszBoundary::free_space;
  throw Error("unknown Riesz boundary '" + s + "'");
}

struct RieszOptions {
  RieszBoundary boundary = RieszBoundary::free_space;
  ZeroMode zero_mode{};  ///< periodic boundary only
};

/// I_alpha * f under either boundary treatment. Construction is memoized
/// process-wide; instances are immutable and shareable across threads.
class RieszOperator {
 public:
  RieszOperator(const GridSpec& grid, double alpha, const RieszOptions& opts = {}) : opts_(opts) {
    if (!(alpha > 0.0 && alpha < grid.n)) throw Error("Riesz order alpha must lie in (0, n)");
    if (opts.boundary == RieszBoundary::periodic)
      periodic_ = std::make_shared<const MultiplierCache>(build_multiplier(grid, MultiplierKind::riesz, alpha, opts.zero_mode));
    else
      free_ = memoized_free_space(grid, alpha);
  }

  const RieszOptions& options() const { return opts_; }

  Field apply(const Field& f) const { return periodic_ ? apply_multiplier(f, *periodic_) : free_->apply(f); }

 private:
  static std::shared_ptr<const FreeSpaceRiesz> memoized_free_space(const GridSpec& g, double alpha) {
    static std::mutex mutex;
    static std::map<std::tuple<int, std::size_t, double, double>, std::shared_ptr<const FreeSpaceRiesz>> cache;
    const auto key = std::make_tuple(g.n, g.N, g.L, alpha);
    {
      std::lock_guard lock(mutex);
      if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto op = std::make_shared<const FreeSpaceRiesz>(g, alpha);
    std::lock_guard lock(mutex);
    return cache.emplace(key, op).first->second;
  }

  RieszOptions opts_;
  std::shared_ptr<const MultiplierCache> periodic_;
  std::shared_ptr<const FreeSpaceRiesz> free_;
};

/// I_alpha * f.
inline Field riesz_convolve(const Field& f, double alpha, const RieszOptions& opts = {}) {
  return RieszOperator(f.grid(), alpha, opts).apply(f);
}

}  // namespace choquard
