#pragma once

// Thin RAII layer over FFTW's real-to-complex transforms.
//
// Plans are created once per (rank, extent) and shared. Planning goes
// through a global mutex because the FFTW planner is not re-entrant;
// execution uses the new-array interface, which is thread safe.

#include <fftw3.h>

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace choquard::fft {

using complex = std::complex<double>;

/// Number of complex coefficients kept by an r2c transform of a cube of side
/// `extent` in `rank` dimensions (last axis halved).
constexpr std::size_t half_spectrum_size(int rank, std::size_t extent) {
  std::size_t size = extent / 2 + 1;
  for (int d = 1; d < rank; ++d) size *= extent;
  return size;
}

constexpr std::size_t real_size(int rank, std::size_t extent) {
  std::size_t size = 1;
  for (int d = 0; d < rank; ++d) size *= extent;
  return size;
}

class Plan {
 public:
  Plan(int rank, std::size_t extent) : rank_(rank), extent_(extent) {
    std::array<int, 3> dims{};
    for (int d = 0; d < rank; ++d) dims[static_cast<std::size_t>(d)] = static_cast<int>(extent);
    std::vector<double> real(real_size(rank, extent));
    std::vector<complex> spec(half_spectrum_size(rank, extent));
    auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_r2c(rank, dims.data(), real.data(), cplx, flags);
    backward_ = fftw_plan_dft_c2r(rank, dims.data(), cplx, real.data(), flags);
    if (forward_ == nullptr || backward_ == nullptr) throw std::runtime_error("fftw planning failed");
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  int rank() const { return rank_; }
  std::size_t extent() const { return extent_; }

  /// Unnormalized forward DFT, sum_j x_j exp(-2 pi i j.k / N).
  void forward(std::span<const double> in, std::span<complex> out) const {
    // FFTW never writes to the input of an out-of-place r2c transform.
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
  }

  /// Unnormalized inverse DFT. The input is copied since c2r clobbers it.
  void backward(std::span<const complex> in, std::span<double> out) const {
    std::vector<complex> scratch(in.begin(), in.end());
    fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  }

  /// In-place-input variant for callers that no longer need the spectrum.
  void backward_destructive(std::span<complex> in, std::span<double> out) const {
    fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  }

  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

 private:
  int rank_;
  std::size_t extent_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

/// Shared plan for a given cube shape.
inline std::shared_ptr<const Plan> plan_for(int rank, std::size_t extent) {
  static std::map<std::pair<int, std::size_t>, std::shared_ptr<const Plan>> cache;
  std::lock_guard lock(Plan::planner_mutex());
  auto key = std::make_pair(rank, extent);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto plan = std::make_shared<const Plan>(rank, extent);
  cache.emplace(key, plan);
  return plan;
}

}  // namespace choquard::fft
