#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>

#include "kfbi/errors.hpp"

namespace kfbi {

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

/// Complex DFT of a fixed length backed by an FFTW plan. Planning happens once
/// in the constructor; `forward` may then be called from any thread.
class Fft {
 public:
  using complex = std::complex<double>;

  explicit Fft(std::size_t n) : n_(n) {
    if (n == 0) throw ConfigError("FFT length must be positive");
    std::vector<complex> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan p;
    {
      // The FFTW planner is not thread-safe.
      std::lock_guard lock(planner_mutex());
      p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (!p) throw SolverError("FFTW could not create a plan of length " + std::to_string(n));
    plan_ = std::shared_ptr<fftw_plan_s>(p, [](fftw_plan q) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(q);
    });
  }

  std::size_t size() const noexcept { return n_; }

  /// X_k = sum_j x_j exp(-2 pi i jk / n), in place.
  void forward(std::span<complex> data) const {
    if (data.size() != n_) throw ConfigError("FFT input length mismatch");
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan_.get(), buf, buf);
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  std::size_t n_;
  std::shared_ptr<fftw_plan_s> plan_;
};

}  // namespace kfbi
