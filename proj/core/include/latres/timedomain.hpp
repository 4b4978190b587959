#pragma once

// Explicit RK4 integration of x' = -i Omega x on a strip of the lattice,
// |m| <= Mx, closed by zero Dirichlet rows at m = +-(Mx + 1) and twisted by
// e^{2 pi i kappa} across the period in n.

#include <cstdint>
#include <vector>

#include "latres/model.hpp"

namespace latres {

struct LatticeState {
  double kappa = 0.0;
  double t = 0.0;
  long Mx = 0;
  CVector z;          // length N
  Eigen::MatrixXcd u;  // (2 Mx + 1) x N, row m + Mx

  static LatticeState zeros(int N, long Mx, double kappa);
  cplx& at(long m, long n) { return u(m + Mx, n); }
  cplx at(long m, long n) const { return u(m + Mx, n); }
};

// sum |z|^2 + sum |u|^2
double norm2(const LatticeState& s);
double waveguide_energy(const LatticeState& s);
// <a, b> = sum conj(a) b over both components.
cplx inner(const LatticeState& a, const LatticeState& b);

// (Omega_1 z + Gamma u_0, Gamma^dagger z + Omega_2 u); t is copied.
LatticeState apply_omega(const StructureParams& params, const LatticeState& s);

// Gershgorin bound on the spectral radius of Omega.
double omega_norm_bound(const StructureParams& params);

// Smallest distance d with (bound t)^d / d! below tol: amplitude that can
// reach d rows away from the initial support within time t.
long light_cone_margin(double bound, double t, double tol = 1e-10);

struct EvolveOptions {
  // Requires dt * omega_norm_bound <= max_dt_norm.
  double max_dt_norm = 0.1;
  double drift_limit = 1e-4;
  long record_every = 1;
};

struct EvolveResult {
  LatticeState state;
  std::vector<double> t;
  std::vector<double> norm;
  std::vector<double> waveguide_energy;
  double drift = 0.0;  // max relative |norm^2(t) - norm^2(0)| over all steps
  double max_z = 0.0;  // max |z_n(t)| over all steps
};

// Throws invalid_argument for an oversized step and instability when the
// drift exceeds drift_limit.
EvolveResult evolve(const StructureParams& params, const LatticeState& initial, double dt,
                    long steps, const EvolveOptions& opts = {});

// Initial data, all with z = 0 and unit norm. The pulse profile in m is a
// Gaussian of the given width; across n it follows e^{2 pi i kappa n / N}.
LatticeState symmetric_pulse(int N, long Mx, double kappa, double width);
LatticeState antisymmetric_pulse(int N, long Mx, double kappa, double width);
// Gaussian random entries on |m| <= radius and in z.
LatticeState random_localized(int N, long Mx, double kappa, long radius, std::uint64_t seed);

// u_m -> (u_m - u_{-m}) / 2, z -> 0.
LatticeState antisymmetrize(const LatticeState& s);

}  // namespace latres
