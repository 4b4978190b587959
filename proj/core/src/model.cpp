#include "latres/model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "latres/structure_io.hpp"

namespace latres {

namespace {

long wrap(long j, int N) {
  long r = j % N;
  return r < 0 ? r + N : r;
}

}  // namespace

void StructureParams::validate() const {
  if (N < 1) throw Error(ErrorCode::invalid_argument, "structure: N must be >= 1");
  const auto n = static_cast<std::size_t>(N);
  if (masses.size() != n || springs.size() != n || gammas.size() != n) {
    throw Error(ErrorCode::invalid_argument,
                "structure: masses, springs and gammas must each have length N");
  }
  for (double m : masses) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw Error(ErrorCode::invalid_argument, "structure: masses must be positive");
    }
  }
  for (double k : springs) {
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw Error(ErrorCode::invalid_argument, "structure: springs must be positive");
    }
  }
  for (cplx g : gammas) {
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag())) {
      throw Error(ErrorCode::invalid_argument, "structure: couplings must be finite");
    }
  }
}

double StructureParams::mass(long j) const { return masses[wrap(j, N)]; }
double StructureParams::spring(long j) const { return springs[wrap(j, N)]; }
cplx StructureParams::gamma(long j) const { return gammas[wrap(j, N)]; }

StructureParams StructureParams::uniform(int N, double mass, double spring, cplx gamma) {
  StructureParams p;
  p.N = N;
  p.masses.assign(N, mass);
  p.springs.assign(N, spring);
  p.gammas.assign(N, gamma);
  return p;
}

const char* to_string(HarmonicClass c) {
  switch (c) {
    case HarmonicClass::propagating: return "propagating";
    case HarmonicClass::evanescent: return "evanescent";
    case HarmonicClass::linear_threshold: return "linear_threshold";
    case HarmonicClass::band_edge_evanescent: return "band_edge_evanescent";
  }
  return "unknown";
}

bool HarmonicSet::is_propagating(int order) const {
  return std::find(propagating.begin(), propagating.end(), order) != propagating.end();
}

cplx ambient_dispersion(cplx theta, cplx phi) {
  return 4.0 - 2.0 * std::cos(kTwoPi * theta) - 2.0 * std::cos(kTwoPi * phi);
}

HarmonicSet classify_harmonics(const StructureParams& params, const BlochPoint& point,
                               const ModelOptions& opts) {
  params.validate();
  if (point.real_physical && (point.kappa.imag() != 0.0 || point.omega.imag() != 0.0)) {
    throw Error(ErrorCode::invalid_argument, "classify: real point carries imaginary parts");
  }
  if (std::abs(point.omega.imag()) > opts.continuation_radius) {
    throw Error(ErrorCode::invalid_argument, "classify: |Im omega| exceeds continuation radius");
  }
  const int N = params.N;
  HarmonicSet hs;
  hs.harmonics.reserve(N);
  for (int l = 0; l < N; ++l) {
    Harmonic h;
    h.order = l;
    h.phi = (point.kappa + double(l)) / double(N);
    h.chi = (4.0 - point.omega) / 2.0 - std::cos(kTwoPi * h.phi);
    const double re = h.chi.real();
    if (std::abs(h.chi - 1.0) < opts.threshold_tol) {
      h.cls = HarmonicClass::linear_threshold;
      h.theta = 0.0;
      hs.has_threshold = true;
    } else if (std::abs(h.chi + 1.0) < opts.threshold_tol) {
      h.cls = HarmonicClass::linear_threshold;
      h.theta = 0.5;
      hs.has_threshold = true;
    } else if (re > -1.0 && re < 1.0) {
      // Principal arccos: real part in (0, pi) and Im theta has the sign of
      // Im omega, since Im chi = -Im omega / 2.
      h.cls = HarmonicClass::propagating;
      h.theta = std::acos(h.chi) / kTwoPi;
      hs.propagating.push_back(l);
    } else if (re >= 1.0) {
      h.cls = HarmonicClass::evanescent;
      h.theta = kI * std::acosh(h.chi) / kTwoPi;
    } else {
      h.cls = HarmonicClass::band_edge_evanescent;
      h.theta = 0.5 + kI * std::acosh(-h.chi) / kTwoPi;
    }
    if (h.cls != HarmonicClass::linear_threshold) {
      const double residual = std::abs(std::cos(kTwoPi * h.theta) - h.chi);
      if (residual > 1e-8 * std::max(1.0, std::abs(h.chi))) {
        throw Error(ErrorCode::region_violation, "classify: branch residual too large");
      }
      if (h.cls == HarmonicClass::propagating && point.omega.imag() != 0.0 &&
          std::abs(h.theta.imag()) > 1e-300 &&
          std::signbit(h.theta.imag()) != std::signbit(point.omega.imag())) {
        throw Error(ErrorCode::region_violation, "classify: continuation sign law violated");
      }
    }
    hs.harmonics.push_back(h);
  }
  return hs;
}

void require_off_threshold(const HarmonicSet& hs) {
  if (hs.has_threshold) {
    throw Error(ErrorCode::threshold_degeneracy, "point lies on a linear threshold");
  }
}

CMatrix floquet_matrix(const StructureParams& params, cplx kappa) {
  params.validate();
  const int N = params.N;
  CMatrix A = CMatrix::Zero(N, N);
  const cplx twist = phase(kappa);
  for (int j = 0; j < N; ++j) {
    A(j, j) += (params.spring(j) + params.spring(j - 1)) / params.mass(j);
  }
  for (int j = 0; j < N; ++j) {
    const int jp = (j + 1) % N;
    const double off = -params.spring(j) / std::sqrt(params.mass(j) * params.mass(j + 1));
    if (N == 1) {
      A(0, 0) += off * (twist + 1.0 / twist);
      continue;
    }
    // Coupling j -> j+1 wraps through the period boundary at j = N-1.
    const cplx w = (jp == 0) ? twist : cplx(1.0);
    A(j, jp) += off * w;
    A(jp, j) += off / w;
  }
  return A;
}

std::vector<double> waveguide_bands(const StructureParams& params, double kappa) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(floquet_matrix(params, kappa),
                                            Eigen::EigenvaluesOnly);
  std::vector<double> out(es.eigenvalues().data(),
                          es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<double, double> threshold_curves(int N, int order, double kappa) {
  const double c = std::cos(kTwoPi * (kappa + order) / N);
  return {2.0 - 2.0 * c, 6.0 - 2.0 * c};
}

RegionDiagram region_diagram(const StructureParams& params, const std::vector<double>& kappas,
                             const std::vector<double>& omegas, unsigned threads,
                             const ModelOptions& opts) {
  params.validate();
  RegionDiagram d{kappas, omegas, std::vector<int>(kappas.size() * omegas.size(), 0)};
  parallel_for(kappas.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < omegas.size(); ++j) {
      auto hs = classify_harmonics(params, BlochPoint::real(kappas[i], omegas[j]), opts);
      d.counts[i * omegas.size() + j] =
          hs.has_threshold ? -1 : static_cast<int>(hs.propagating.size());
    }
  });
  return d;
}

void write_region_csv(std::ostream& out, const RegionDiagram& d) {
  out << "kappa,omega,num_propagating\n";
  for (std::size_t i = 0; i < d.kappas.size(); ++i) {
    for (std::size_t j = 0; j < d.omegas.size(); ++j) {
      out << format_real(d.kappas[i]) << ',' << format_real(d.omegas[j]) << ',' << d.at(i, j)
          << '\n';
    }
  }
}

}  // namespace latres
