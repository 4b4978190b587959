#pragma once

#include <utility>
#include <vector>

#include "latres/scattering.hpp"

namespace latres {

struct GuidedMode {
  double kappa = 0.0;
  double omega = 0.0;
  // Full 3N coefficient vector (a-, b+, c); propagating a-, b+ entries are
  // exactly zero. Unit norm.
  CVector null_vector;
  double sigma_min = 0.0;
  int region_id = 0;  // |P| at the mode
  // Max |criterion residual| after polishing; N = 2 only, else negative.
  double criteria_residual = -1.0;
};

// Smallest over largest singular value of B with the propagating a-, b+
// columns removed (3N x (3N - 2|P|)).
double sigma_min(const StructureParams& params, const BlochPoint& point,
                 const ModelOptions& opts = {});

// Same reduction; returns the right singular vector embedded back into 3N.
std::pair<double, CVector> sigma_min_vector(const StructureParams& params,
                                            const BlochPoint& point,
                                            const ModelOptions& opts = {});

// Region I for N = 2: 2 - 2 cos(pi kappa) < omega < 2 + 2 cos(pi kappa).
bool in_region_one(double kappa, double omega);

// Left-hand sides of the two N = 2 guided-mode criteria. Complex kappa and
// omega are accepted for continuation; real points outside region I throw
// region_violation.
std::pair<cplx, cplx> criterion_residuals_N2(const StructureParams& params, cplx kappa,
                                            cplx omega);

struct SearchWindow {
  double kappa_min = -0.5;
  double kappa_max = 0.5;
  double omega_min = 0.0;
  double omega_max = 8.0;
};

struct GuidedSearchOptions {
  long kappa_samples = 400;
  long omega_samples = 400;
  // Grid minima above this are not refined.
  double candidate_threshold = 0.05;
  // Refined points are accepted as modes below this normalized sigma_min.
  double accept_tol = 1e-8;
  double merge_tol = 1e-6;
  // Embedded modes only (|P| >= 1); robust modes below the light line form
  // curves and are located with trace_robust_modes.
  bool embedded_only = true;
  unsigned threads = 1;
  ModelOptions model;
};

std::vector<GuidedMode> find_guided_modes(const StructureParams& params,
                                          const SearchWindow& window,
                                          const GuidedSearchOptions& opts = {});

// Polishes a seed to an isolated mode: Nelder-Mead on sigma_min, then a
// bordered Gauss-Newton solve, then (N = 2) the criteria. Throws no_root if
// the refined sigma_min stays above accept_tol.
GuidedMode refine_guided_mode(const StructureParams& params, double kappa, double omega,
                              const GuidedSearchOptions& opts = {},
                              double kappa_scale = 1e-3, double omega_scale = 1e-3);

// Refines omega alone at a fixed kappa (standing modes at kappa = 0 are
// double roots in kappa, so a joint refinement only resolves kappa to about
// sqrt(eps)). Golden section on sigma_min over omega +- omega_scale.
GuidedMode refine_at_kappa(const StructureParams& params, double kappa, double omega,
                           const GuidedSearchOptions& opts = {}, double omega_scale = 1e-3);

// Gauss-Newton on (Re, Im) of both N = 2 criteria for real (kappa, omega).
std::pair<double, double> polish_criteria_N2(const StructureParams& params, double kappa,
                                             double omega, int iterations = 50);

struct RobustModePoint {
  double kappa;
  double omega;
  double sigma_min;
};

// Zeros of sigma_min in omega for each kappa, restricted to points with no
// propagating order.
std::vector<RobustModePoint> trace_robust_modes(const StructureParams& params,
                                                const std::vector<double>& kappas,
                                                double omega_min, double omega_max,
                                                long omega_samples = 800,
                                                double accept_tol = 1e-10);

struct EllValue {
  cplx value;
  CVector eigenvector;  // unit norm
  double overlap = 1.0;
};

// Eigenvalue of B(kappa, omega) whose eigenvector best matches `reference`;
// throws lost_track if the best overlap is below min_overlap. An empty
// reference selects the smallest-magnitude eigenvalue.
EllValue eigenvalue_ell(const StructureParams& params, const BlochPoint& point,
                        const CVector& reference, double min_overlap = 0.7,
                        const ModelOptions& opts = {});

// Tracks ell along a sequence of points, updating the reference eigenvector.
class EllTracker {
 public:
  EllTracker(StructureParams params, const GuidedMode& mode, ModelOptions opts = {});
  EllValue operator()(const BlochPoint& point);
  const CVector& reference() const { return reference_; }
  void set_reference(CVector ref) { reference_ = std::move(ref); }

 private:
  StructureParams params_;
  CVector reference_;
  ModelOptions opts_;
};

struct DispersionSample {
  double kappa_tilde;
  cplx omega;
};

// Zeros of ell sit on omega = omega0 - ell1 kt - ell2 kt^2 - ... (factor form).
struct DispersionFit {
  double kappa0 = 0.0;
  double omega0 = 0.0;
  double ell1 = 0.0;
  cplx ell2;
  double ell1_imag = 0.0;  // discarded imaginary part of the linear term
  std::vector<cplx> higher;  // kt^3, kt^4 coefficients of omega - omega0
  double fit_radius = 0.0;
  double fit_residual = 0.0;
  double max_imag_omega = 0.0;
  std::vector<DispersionSample> samples;
};

struct DispersionOptions {
  int newton_iterations = 40;
  double newton_tol = 1e-14;
  double max_ell1_imag = 1e-6;
  ModelOptions model;
};

// Newton-continues ell(kappa0 + kt, omega) = 0 in complex omega outward from
// kt = 0 in both directions and fits the polynomial.
DispersionFit continue_and_fit_dispersion(const StructureParams& params, const GuidedMode& mode,
                                          const std::vector<double>& kappa_tilde,
                                          const DispersionOptions& opts = {});

// Symmetric default sample set: 2 * half + 1 points on [-radius, radius].
std::vector<double> symmetric_samples(double radius, int half = 8);

}  // namespace latres
