#pragma once

// Transmission anomalies around a nonrobust guided mode: exact peak/dip
// curves, the two-variable factor-form fit, the asymptotic transmission
// formula, amplitude enhancement, and the tangent bifurcation in gamma_0.

#include <vector>

#include "latres/guided_modes.hpp"

namespace latres {

struct PeakDipOptions {
  SolveOptions solve;
  // Initial bracket half-width is max(bracket_factor |ell2| kt^2, min_half_width).
  double bracket_factor = 10.0;
  double min_half_width = 1e-12;
  int doublings = 4;
  int grid = 81;
  int newton_iterations = 30;
};

struct PeakDipPoint {
  double kappa_tilde = 0.0;
  double kappa = 0.0;
  double omega_a = 0.0;  // reflection zero: T = 1
  double omega_b = 0.0;  // transmission zero: T = 0
  double T_at_a = 1.0;
  double T_at_b = 0.0;
};

// Root-finds the exact peak and dip frequency at kappa0 + kt for each kt.
// At kt = 0 both curves take the limit value omega0 (T entries NaN). Requires exactly one
// propagating order around the mode; throws no_root if a curve leaves the
// largest bracket.
std::vector<PeakDipPoint> peak_dip_curves(const StructureParams& params,
                                          const DispersionFit& dispersion,
                                          const std::vector<double>& kappa_tilde,
                                          const PeakDipOptions& opts = {},
                                          unsigned threads = 1);

struct AnomalyFit {
  double kappa0 = 0.0;
  double omega0 = 0.0;
  double ell1 = 0.0;
  cplx ell2;
  double r2 = 0.0;  // peak curve: omega_a = omega0 - ell1 kt - r2 kt^2
  double t2 = 0.0;  // dip curve:  omega_b = omega0 - ell1 kt - t2 kt^2
  double t0 = 0.0;
  double r0 = 0.0;
  // Background slopes at kappa0: T / t0 = |1 + zeta1 w| and
  // |b / a| = (t0 / r0) |1 + eta w|. Only the real parts are observable from
  // moduli to first order, so both are stored as real numbers.
  double zeta1 = 0.0;
  double eta = 0.0;

  // Diagnostics.
  double ell1_peak = 0.0;  // linear coefficients of the two curve fits
  double ell1_dip = 0.0;
  double omega0_peak = 0.0;  // intercepts of the two curve fits
  double omega0_dip = 0.0;
  double unitarity = 0.0;  // |r0^2 + t0^2 - 1|
  double curve_fit_residual = 0.0;
  double background_fit_residual = 0.0;
};

struct AnomalyOptions {
  SolveOptions solve;
  // Background samples at kappa0 use omega offsets of +-k * background_step.
  double background_step = 2e-3;
  int background_half = 4;
};

AnomalyFit fit_anomaly(const StructureParams& params, const DispersionFit& dispersion,
                       const std::vector<PeakDipPoint>& curves,
                       const AnomalyOptions& opts = {});

// One-sided form: t0 |w + ell1 k + t2 k^2| / |w + ell1 k + ell2 k^2| |1 + zeta1 w|,
// with the value t0 at the removable point (0, 0).
double approx_transmission(const AnomalyFit& fit, double kappa_tilde, double omega_tilde);

// Two-sided form built from |b / a| with the peak and dip quadratics.
double approx_transmission_two_sided(const AnomalyFit& fit, double kappa_tilde,
                                     double omega_tilde);

enum class ApproxVariant { one_sided, two_sided };

struct ApproxError {
  double sup_error = 0.0;
  double max_approx = 0.0;  // overshoot check: should stay <= 1.05
  double kappa_at_sup = 0.0;
  double omega_at_sup = 0.0;
};

// Sup of |T_approx - T_direct| over the anomaly window of half-width K:
// kt in [-K, K], w = -ell1 kt - Re(ell2) kt^2 + s * 4 |ell2| K^2, s in [-1, 1].
ApproxError approximation_error(const StructureParams& params, const AnomalyFit& fit, double K,
                                ApproxVariant variant = ApproxVariant::one_sided,
                                int samples = 41, unsigned threads = 1,
                                const SolveOptions& solve = {});

struct EnhancementRow {
  double kappa_tilde;
  double omega_opt;
  double amplitude;
  // Condition above the solve limit: the resonant component was projected
  // out and the amplitude is not meaningful.
  bool near_singular = false;
};

// Waveguide amplitude sqrt(sum |c_l|^2) for unit incidence at the optimally
// detuned frequency omega0 - ell1 kt - Re(ell2) kt^2. kt = 0 is rejected.
// The resonant system is ill-conditioned but regular, so the default solve
// keeps the full solution up to condition 1e16.
std::vector<EnhancementRow> enhancement_scan(const StructureParams& params,
                                             const DispersionFit& dispersion,
                                             const std::vector<double>& kappa_tilde,
                                             unsigned threads = 1,
                                             const SolveOptions& solve = {.model = {}, .singular_condition = 1e16});

// Near-singular rows are excluded; throws fit_failed with fewer than two left.
struct EnhancementFit {
  double slope = 0.0;  // log-log slope of amplitude vs |kt|
  double d1 = 0.0;     // amplitude ~ d1 / |kt| + d2
  double d2 = 0.0;
  std::size_t rows_used = 0;
};

EnhancementFit fit_enhancement(const std::vector<EnhancementRow>& rows);

struct BifurcationPoint {
  double gamma_star = 0.0;
  double omega_star = 0.0;
  double residual = 0.0;
  // det d(Re ell, Im ell) / d(omega, gamma_0) at the root, divided by
  // |d ell / d omega| |d ell / d gamma_0|: the sine of the angle between the
  // two complex derivatives. It vanishes when Im omega(gamma_0) along
  // kappa = 0 is tangent to zero at the root.
  double determinant = 0.0;
};

struct BifurcationOptions {
  int gamma_index = 0;  // which coupling constant is the free parameter
  int omega_seeds = 24;
  int newton_iterations = 60;
  ModelOptions model;
};

// Solves the two N = 2 criteria at kappa = 0 for (omega, gamma) with gamma
// confined to [gamma_min, gamma_max]. Throws no_root otherwise.
BifurcationPoint find_bifurcation(const StructureParams& params, double gamma_min,
                                  double gamma_max, const BifurcationOptions& opts = {});

struct BranchSample {
  double gamma0;
  double kappa0;  // >= 0; -kappa0 is a mode as well
  double omega0;
  double sigma_min;
  double mirror_residual;  // criteria residual at -kappa0
};

struct BifurcationBranch {
  double gamma_star = 0.0;
  double omega_star = 0.0;
  int g_curvature_sign = 0;  // sign of g''(0), g the mode curve gamma_0 = g(kappa_0)
  double g_curvature = 0.0;
  double sqrt_slope = 0.0;  // log-log slope of kappa0 vs |gamma* - gamma0|
  std::vector<BranchSample> samples;
};

// Follows the pair of modes +-kappa0(gamma0) away from the critical point.
// Every gamma must lie on the mode-supporting side of gamma*; throws
// invalid_argument otherwise and continuation_failure if a solve fails.
BifurcationBranch trace_branch(const StructureParams& params, const BifurcationPoint& point,
                               const std::vector<double>& gammas,
                               const BifurcationOptions& opts = {});

// Three-variable coefficients from a stencil of branch modes: ell1, and the
// peak/dip linear coefficients, are linear in kappa0; ell2, r2, t2 tend to
// ell_{0,2}, r_{0,2}, t_{0,2}. rho0, tau0 are the background amplitudes at
// the innermost mode.
struct ThreeVariableFit {
  double ell11 = 0.0;
  cplx ell02;
  double r11 = 0.0;
  double t11 = 0.0;
  double r02 = 0.0;
  double t02 = 0.0;
  double rho0 = 0.0;
  double tau0 = 0.0;
  double unitarity = 0.0;  // |rho0^2 + tau0^2 - 1|
};

ThreeVariableFit three_variable_fit(const StructureParams& params, const BifurcationBranch& branch,
                                    double kappa_tilde_radius = 2e-3,
                                    const BifurcationOptions& opts = {});

}  // namespace latres
