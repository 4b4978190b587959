#pragma once

#include "latres/scattering.hpp"

namespace latres {

// Per-order multiplier (1 - e^{2 pi i theta_l}) acting on kappa-twisted
// traces v_n = sum_l vhat_l e^{2 pi i (l + kappa) n / N}.
CMatrix dtn_matrix(const HarmonicSet& hs);
CVector dtn_apply(const HarmonicSet& hs, const CVector& trace);

// Smallest M with e^{-2 pi tau_min M} < target, tau_min the slowest decay
// among non-propagating orders; never below 2.
long default_truncation(const HarmonicSet& hs, double target = 1e-10);

struct TruncatedOptions {
  SolveOptions solve;
  // Skip the sparse factorization and return the dense minimum-norm solution.
  bool min_norm = false;
  // Dense fallback is attempted only up to this many unknowns.
  long dense_limit = 6000;
};

struct TruncatedSolution {
  StructureParams params;
  BlochPoint point;
  HarmonicSet harmonics;
  IncidentField incident;
  long M = 0;
  Eigen::MatrixXcd u;  // row m + M + 1 for m = -M-1 .. M+1 (halo rows included)
  CVector z;
  CVector g_plus;   // boundary data at m = +M
  CVector g_minus;  // boundary data at m = -M
  double condition = 0.0;  // estimate
  bool near_singular = false;
  double relative_residual = 0.0;

  // Valid for |m| <= M + 1; n is reduced using pseudo-periodicity.
  cplx u_at(long m, long n) const;
};

TruncatedSolution solve_truncated(const StructureParams& params, const BlochPoint& point,
                                  const IncidentField& incident, long M,
                                  const TruncatedOptions& opts = {});

// Outgoing amplitudes of the propagating orders, read off the boundary rows
// m = +-M by a discrete Fourier projection over one period. Entries of
// non-propagating orders are left at zero. T and R use the same flux weights
// as the Fourier solver.
struct FarField {
  CVector a_minus;
  CVector b_plus;
  double T = 0.0;
  double R = 0.0;
};

FarField far_field(const TruncatedSolution& sol);

struct CrossValidation {
  double discrepancy = 0.0;
  long M = 0;
  bool near_singular = false;  // guided-mode caveat: the mode was projected out
};

// M <= 0 selects default_truncation.
CrossValidation cross_validate(const StructureParams& params, const BlochPoint& point,
                               const IncidentField& incident, long M = 0,
                               const TruncatedOptions& opts = {});

struct VariationalReport {
  double lattice = 0.0;    // max over unit test fields v
  double waveguide = 0.0;  // max over unit test fields w
  double scale = 0.0;      // max |u|, |z| on the window
};

// Evaluates the weak form of the truncated problem against every unit test
// field supported on m = -M-1 .. M (lattice) and on one period (waveguide).
VariationalReport variational_residual(const TruncatedSolution& sol);

}  // namespace latres
