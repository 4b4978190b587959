#pragma once

// Shared numerical plumbing: error type, constants, small fitting and
// minimization helpers, and a bounded parallel-for.

#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace latres {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

enum class ErrorCode {
  invalid_argument,
  threshold_degeneracy,
  window_too_small,
  singular_system,
  region_violation,
  lost_track,
  newton_divergence,
  no_root,
  fit_failed,
  continuation_failure,
  instability,
};

const char* to_string(ErrorCode code);

// All library failures are reported through this exception; `code()` lets
// callers (and the CLI's structured diagnostics) branch on the failure kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// e^{2 pi i x}
inline cplx phase(cplx x) { return std::exp(kI * kTwoPi * x); }
inline cplx phase(double x) { return std::polar(1.0, kTwoPi * x); }

// Least-squares fit y ~ sum_{p in powers} c_p x^p. Returns c in the order of
// `powers`. Throws fit_failed if the design matrix is rank deficient.
std::vector<cplx> polyfit(const std::vector<double>& x,
                          const std::vector<cplx>& y,
                          const std::vector<int>& powers);
std::vector<double> polyfit(const std::vector<double>& x,
                            const std::vector<double>& y,
                            const std::vector<int>& powers);

// Slope of the least-squares line through (log x, log y).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
};

// Derivative-free Nelder-Mead. `scale` sets the initial simplex edge per
// coordinate. Stops when the simplex diameter falls below `xtol` in every
// coordinate or after `max_eval` evaluations.
MinimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> x0, const std::vector<double>& scale,
                           double xtol = 1e-13, int max_eval = 4000);

// Golden-section search for a minimum of a unimodal f on [a, b].
double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double xtol = 1e-14);

// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware
// concurrency). Each index is processed exactly once; results written by
// index keep output order deterministic.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

// Evenly spaced samples, endpoints included (count >= 2) or the midpoint.
std::vector<double> linspace(double a, double b, std::size_t count);
std::vector<double> logspace(double log10_a, double log10_b, std::size_t count);

}  // namespace latres
