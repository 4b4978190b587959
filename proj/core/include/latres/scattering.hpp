#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "latres/model.hpp"

namespace latres {

// Incident amplitudes per order: a_inc from the left (a+), b_inc from the
// right (b-). Entries outside the propagating set must be zero.
struct IncidentField {
  std::vector<cplx> a_inc;
  std::vector<cplx> b_inc;

  static IncidentField none(int N);
  // a+_order = 1; order < 0 picks the lowest propagating order.
  static IncidentField unit_left(const HarmonicSet& hs, int order = -1);
  static IncidentField unit_right(const HarmonicSet& hs, int order = -1);
};

// Unknowns are ordered (a-_0..a-_{N-1}, b+_0..b+_{N-1}, c_0..c_{N-1}); rows are
// the continuity, lattice and waveguide families sampled at n = 0..N-1.
struct ScatteringSystem {
  CMatrix B;
  CVector F;
  HarmonicSet harmonics;
};

struct SolveOptions {
  ModelOptions model;
  // Above this condition number the minimum-norm solution is returned.
  double singular_condition = 1e12;
  double singular_cutoff = 1e-12;  // relative singular value cutoff
};

struct ScatteringSolution {
  StructureParams params;
  BlochPoint point;
  HarmonicSet harmonics;
  IncidentField incident;
  CVector a_minus;
  CVector b_plus;
  CVector c;
  // Amplitude ratios sqrt(flux / incident flux) of the outgoing waves on the
  // right (T, from b+) and on the left (R, from a-). For incidence from the
  // right the transmitted wave is therefore R.
  double T = 0.0;
  double R = 0.0;
  double incident_flux = 0.0;
  double energy_residual = 0.0;
  double condition = 0.0;
  bool near_singular = false;
  bool multi_propagating = false;
};

// Row coefficient of c_l in the waveguide family at site n:
// omega - (Omega1 e^{2 pi i phi_l (.)})_n / e^{2 pi i phi_l n}.
cplx waveguide_symbol(const StructureParams& params, long n, cplx omega, cplx phi);

CMatrix assemble_matrix(const StructureParams& params, const BlochPoint& point,
                        const HarmonicSet& hs);
ScatteringSystem assemble_system(const StructureParams& params, const BlochPoint& point,
                                 const IncidentField& incident, const SolveOptions& opts = {});

ScatteringSolution solve_scattering(const StructureParams& params, const BlochPoint& point,
                                    const IncidentField& incident, const SolveOptions& opts = {});

// Convenience: unit incidence from the left in the lowest propagating order.
ScatteringSolution solve_unit_left(const StructureParams& params, const BlochPoint& point,
                                   const SolveOptions& opts = {});

struct FieldValue {
  cplx u;
  cplx z;
};

// Left expansion for m < 0, right for m > 0; at m = 0 the two agree and the
// right one is returned.
FieldValue reconstruct_field(const ScatteringSolution& sol, long m, long n);
cplx reconstruct_left(const ScatteringSolution& sol, long m, long n);
cplx reconstruct_right(const ScatteringSolution& sol, long m, long n);

// Im sum_{n=0}^{N-1} conj(u_{mn}) (u_{m+1,n} - u_{mn}).
double column_flux(const ScatteringSolution& sol, long m);

// Lattice-equation residual omega u - Gamma^dagger z - Omega2 u at (m, n).
cplx lattice_residual(const ScatteringSolution& sol, long m, long n);

enum ScanFlag : unsigned {
  scan_threshold = 1u,
  scan_no_propagating = 2u,
  scan_near_singular = 4u,
  scan_multi_propagating = 8u,
  scan_failed = 16u,
};

struct ScanRow {
  double kappa = 0.0;
  double omega = 0.0;
  double T = 0.0;
  double R = 0.0;
  double energy_residual = 0.0;
  unsigned flags = 0;
};

using IncidentFactory = std::function<IncidentField(const HarmonicSet&)>;

// Row-major over kappa, then omega. Threshold and non-propagating points are
// skipped with a flag and NaN values; per-point failures are recorded in-row.
std::vector<ScanRow> scan_transmission(const StructureParams& params,
                                       const std::vector<double>& kappas,
                                       const std::vector<double>& omegas,
                                       const IncidentFactory& incident = {}, unsigned threads = 1,
                                       const SolveOptions& opts = {});

std::string describe_flags(unsigned flags);
void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows);

}  // namespace latres
