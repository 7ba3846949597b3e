#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "kfbi/errors.hpp"
#include "kfbi/fft.hpp"
#include "kfbi/grid.hpp"
#include "kfbi/parallel.hpp"

namespace kfbi {

template <class T>
struct is_complex : std::false_type {};
template <class R>
struct is_complex<std::complex<R>> : std::true_type {};
template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

/// Homogeneous condition imposed on the bounding box.
enum class BoxBoundary { dirichlet_zero, neumann_zero };

inline std::string to_string(BoxBoundary bc) {
  return bc == BoxBoundary::dirichlet_zero ? "dirichlet" : "neumann";
}

/// Separable 2D type-I sine (Dirichlet) or cosine (Neumann) transform of an
/// n x n real array, computed with complex FFTs of length 2M on the odd/even
/// extension. Two real rows are packed into one complex FFT.
///
/// Sine:   S(x)_k = sum_{j=1}^{M-1} x_j sin(pi jk/M),       S S = (M/2) I
/// Cosine: C(x)_k = x_0/2 + (-1)^k x_M/2 + sum_{j=1}^{M-1} x_j cos(pi jk/M),  C C = (M/2) I
class TrigTransform2D {
 public:
  TrigTransform2D(BoxBoundary kind, int m)
      : kind_(kind), m_(m), n_(kind == BoxBoundary::dirichlet_zero ? m - 1 : m + 1), fft_(2 * static_cast<std::size_t>(m)) {}

  int extent() const noexcept { return n_; }

  /// Applies the 2D transform in place to a row-major n x n array.
  void apply(std::span<double> data, Executor& exec) const {
    const std::size_t n = static_cast<std::size_t>(n_);
    if (data.size() != n * n) throw ConfigError("transform input has the wrong size");
    const std::size_t pairs = (n + 1) / 2;
    exec.dispatch(kernels::transform_rows, pairs, [&](std::size_t p) {
      const std::size_t r0 = 2 * p, r1 = r0 + 1;
      double* a = data.data() + r0 * n;
      double* b = r1 < n ? data.data() + r1 * n : nullptr;
      transform_pair(a, b, 1);
    });
    exec.dispatch(kernels::transform_cols, pairs, [&](std::size_t p) {
      const std::size_t c0 = 2 * p, c1 = c0 + 1;
      double* a = data.data() + c0;
      double* b = c1 < n ? data.data() + c1 : nullptr;
      transform_pair(a, b, n);
    });
  }

 private:
  // Transforms the strided sequences a and b (b may be null) in place.
  void transform_pair(double* a, double* b, std::size_t stride) const {
    using complex = std::complex<double>;
    thread_local std::vector<complex> buf;
    const std::size_t m = static_cast<std::size_t>(m_);
    buf.assign(2 * m, complex{});
    auto at = [&](double* base, std::size_t j) -> double& { return base[j * stride]; };
    if (kind_ == BoxBoundary::dirichlet_zero) {
      for (std::size_t j = 1; j < m; ++j) {
        const complex z(at(a, j - 1), b ? at(b, j - 1) : 0.0);
        buf[j] = z;
        buf[2 * m - j] = -z;
      }
      fft_.forward(buf);
      // FFT of the odd extension is -2i S(z).
      for (std::size_t k = 1; k < m; ++k) {
        at(a, k - 1) = -0.5 * buf[k].imag();
        if (b) at(b, k - 1) = 0.5 * buf[k].real();
      }
    } else {
      for (std::size_t j = 0; j <= m; ++j) {
        const complex z(at(a, j), b ? at(b, j) : 0.0);
        buf[j] = z;
        if (j > 0 && j < m) buf[2 * m - j] = z;
      }
      fft_.forward(buf);
      // FFT of the even extension is 2 C(z).
      for (std::size_t k = 0; k <= m; ++k) {
        at(a, k) = 0.5 * buf[k].real();
        if (b) at(b, k) = 0.5 * buf[k].imag();
      }
    }
  }

  BoxBoundary kind_;
  int m_;
  int n_;
  Fft fft_;
};

/// Description of one box solve: Lap_h U - kappa U = rhs on the whole box.
template <class T>
struct BoxProblem {
  const CartesianGrid* grid = nullptr;
  T kappa{};
  BoxBoundary boundary = BoxBoundary::dirichlet_zero;
  const GridField<T>* rhs = nullptr;
};

/// Fast solver for the five-point modified Helmholtz operator on the box,
/// (U_E + U_W + U_N + U_S - 4 U)/h^2 - kappa U = rhs, with U = 0 on the box
/// edge (Dirichlet) or mirror ghost nodes (Neumann). Exact diagonalization by
/// sine/cosine transforms. Immutable after construction; `solve` is reentrant.
class BoxSolver {
 public:
  BoxSolver(const CartesianGrid& grid, BoxBoundary boundary)
      : grid_(grid), boundary_(boundary), transform_(boundary, grid.intervals) {
    const int m = grid.intervals;
    if (!is_power_of_two(static_cast<std::size_t>(m))) throw ConfigError("box solver needs a power-of-two M");
    const int n = transform_.extent();
    const int offset = boundary == BoxBoundary::dirichlet_zero ? 1 : 0;
    eigen_.resize(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) {
      const double k = p + offset;
      eigen_[static_cast<std::size_t>(p)] = (2.0 * std::cos(std::numbers::pi * k / m) - 2.0) / (grid.h * grid.h);
    }
  }

  const CartesianGrid& grid() const noexcept { return grid_; }
  BoxBoundary boundary() const noexcept { return boundary_; }

  /// Discrete eigenvalue of mode (p, q) including the -kappa shift; p, q index
  /// the transform array (offset by one for the sine basis).
  template <class K>
  K eigenvalue(std::size_t p, std::size_t q, K kappa) const {
    return K(eigen_[p] + eigen_[q]) - kappa;
  }

  template <class T>
  void solve(T kappa, const GridField<T>& rhs, GridField<T>& out, Executor& exec) const {
    if (rhs.size() != grid_.size()) throw ConfigError("box solve: right-hand side has the wrong size");
    if (boundary_ == BoxBoundary::neumann_zero && kappa == T{}) {
      throw SolverError("box solve: Neumann box condition with kappa = 0 is singular");
    }
    if (out.size() != grid_.size()) out = GridField<T>(grid_);
    const std::size_t n = static_cast<std::size_t>(transform_.extent());
    const int offset = boundary_ == BoxBoundary::dirichlet_zero ? 1 : 0;
    const double scale = std::pow(2.0 / grid_.intervals, 2);

    auto gather = [&](auto part, std::vector<double>& work) {
      work.resize(n * n);
      for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t p = 0; p < n; ++p) {
          work[p + q * n] = part(rhs(static_cast<int>(p) + offset, static_cast<int>(q) + offset));
        }
      }
    };

    if constexpr (is_complex_v<T>) {
      std::vector<double> re, im;
      gather([](T v) { return v.real(); }, re);
      gather([](T v) { return v.imag(); }, im);
      transform_.apply(re, exec);
      transform_.apply(im, exec);
      exec.dispatch(kernels::diagonal_scale, n * n, [&](std::size_t k) {
        const T lambda = eigenvalue(k % n, k / n, kappa);
        const T v = T(re[k], im[k]) / lambda;
        re[k] = v.real();
        im[k] = v.imag();
      });
      check_finite(re);
      transform_.apply(re, exec);
      transform_.apply(im, exec);
      scatter(out, [&](std::size_t k) { return T(scale * re[k], scale * im[k]); }, offset);
    } else {
      std::vector<double> work;
      gather([](T v) { return v; }, work);
      transform_.apply(work, exec);
      exec.dispatch(kernels::diagonal_scale, n * n, [&](std::size_t k) {
        work[k] /= eigenvalue(k % n, k / n, kappa);
      });
      check_finite(work);
      transform_.apply(work, exec);
      scatter(out, [&](std::size_t k) { return scale * work[k]; }, offset);
    }
  }

 private:
  static void check_finite(const std::vector<double>& v) {
    for (double x : v) {
      if (!std::isfinite(x)) throw SolverError("box solve: singular mode encountered");
    }
  }

  template <class T, class Fn>
  void scatter(GridField<T>& out, Fn value, int offset) const {
    const std::size_t n = static_cast<std::size_t>(transform_.extent());
    if (offset == 1) out.fill(T{});
    for (std::size_t q = 0; q < n; ++q) {
      for (std::size_t p = 0; p < n; ++p) {
        out(static_cast<int>(p) + offset, static_cast<int>(q) + offset) = value(p + q * n);
      }
    }
  }

  CartesianGrid grid_;
  BoxBoundary boundary_;
  TrigTransform2D transform_;
  std::vector<double> eigen_;
};

/// One-shot box solve.
template <class T>
GridField<T> solve_box(const BoxProblem<T>& problem, Executor& exec) {
  if (!problem.grid || !problem.rhs) throw ConfigError("box problem is incomplete");
  if (problem.rhs->size() != problem.grid->size()) throw ConfigError("box problem: dimension mismatch");
  BoxSolver solver(*problem.grid, problem.boundary);
  GridField<T> out(*problem.grid);
  solver.solve(problem.kappa, *problem.rhs, out, exec);
  return out;
}

}  // namespace kfbi
