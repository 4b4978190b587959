#pragma once

#include <iosfwd>
#include <vector>

#include "latres/numerics.hpp"

namespace latres {

// Periodic chain of N masses coupled along the line m = 0 of the square
// lattice. Index j runs over one period; all arrays are N-periodic.
struct StructureParams {
  int N = 1;
  std::vector<double> masses;
  std::vector<double> springs;
  std::vector<cplx> gammas;

  // Throws invalid_argument unless N >= 1, every array has length N and all
  // masses and springs are strictly positive.
  void validate() const;

  double mass(long j) const;
  double spring(long j) const;
  cplx gamma(long j) const;

  static StructureParams uniform(int N, double mass, double spring, cplx gamma);
};

struct BlochPoint {
  cplx kappa;
  cplx omega;
  bool real_physical = false;

  static BlochPoint real(double kappa, double omega) { return {kappa, omega, true}; }
  static BlochPoint complex(cplx kappa, cplx omega) { return {kappa, omega, false}; }
};

enum class HarmonicClass { propagating, evanescent, linear_threshold, band_edge_evanescent };

const char* to_string(HarmonicClass c);

struct Harmonic {
  int order = 0;
  cplx phi;    // (kappa + order) / N
  cplx chi;    // (4 - omega)/2 - cos(2 pi phi) == cos(2 pi theta)
  cplx theta;
  HarmonicClass cls = HarmonicClass::evanescent;
};

struct HarmonicSet {
  std::vector<Harmonic> harmonics;
  std::vector<int> propagating;  // ascending orders with cls == propagating
  bool has_threshold = false;

  bool is_propagating(int order) const;
};

struct ModelOptions {
  double threshold_tol = 1e-9;
  // Largest |Im omega| accepted for complex points.
  double continuation_radius = 0.5;
};

// 4 - 2 cos(2 pi theta) - 2 cos(2 pi phi)
cplx ambient_dispersion(cplx theta, cplx phi);

// Threshold orders are reported with cls == linear_threshold and
// has_threshold set; callers that cannot work on a threshold use
// require_off_threshold.
HarmonicSet classify_harmonics(const StructureParams& params, const BlochPoint& point,
                               const ModelOptions& opts = {});

// Throws threshold_degeneracy if any order sits on a threshold.
void require_off_threshold(const HarmonicSet& hs);

// N x N Floquet restriction of the waveguide operator in reduced variables
// z_j = sqrt(M_j) x_j, with z_{j+N} = e^{2 pi i kappa} z_j. Hermitian for real kappa.
CMatrix floquet_matrix(const StructureParams& params, cplx kappa);

std::vector<double> waveguide_bands(const StructureParams& params, double kappa);

struct RegionDiagram {
  std::vector<double> kappas;
  std::vector<double> omegas;
  // counts[i * omegas.size() + j] is |P| at (kappas[i], omegas[j]); -1 marks
  // a threshold sample.
  std::vector<int> counts;

  int at(std::size_t i, std::size_t j) const { return counts[i * omegas.size() + j]; }
};

RegionDiagram region_diagram(const StructureParams& params, const std::vector<double>& kappas,
                             const std::vector<double>& omegas, unsigned threads = 1,
                             const ModelOptions& opts = {});

// Frequencies where order `order` crosses chi = +1 (lower) and chi = -1 (upper).
std::pair<double, double> threshold_curves(int N, int order, double kappa);

void write_region_csv(std::ostream& out, const RegionDiagram& diagram);

}  // namespace latres
