#pragma once

#include <stdexcept>
#include <string>

namespace kfbi {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate or invalid curve / grid geometry.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration or violated precondition on inputs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A discrete system could not be solved (singular mode, bad stencil, ...).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Time integration produced a diverging solution.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, int step, double time, double norm)
      : Error(what), step_(step), time_(time), norm_(norm) {}

  int step() const noexcept { return step_; }
  double time() const noexcept { return time_; }
  double norm() const noexcept { return norm_; }

 private:
  int step_;
  double time_;
  double norm_;
};

/// A kernel work item failed inside the executor.
class DispatchError : public Error {
 public:
  DispatchError(const std::string& kernel, const std::string& what)
      : Error("kernel '" + kernel + "' failed: " + what), kernel_(kernel) {}

  const std::string& kernel() const noexcept { return kernel_; }

 private:
  std::string kernel_;
};

}  // namespace kfbi
