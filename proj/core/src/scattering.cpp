#include "latres/scattering.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "latres/structure_io.hpp"

namespace latres {

namespace {

int pick_order(const HarmonicSet& hs, int order) {
  if (order < 0) {
    if (hs.propagating.empty()) {
      throw Error(ErrorCode::invalid_argument, "incident: no propagating order at this point");
    }
    return hs.propagating.front();
  }
  if (!hs.is_propagating(order)) {
    throw Error(ErrorCode::invalid_argument, "incident: requested order is not propagating");
  }
  return order;
}

void check_incident(const HarmonicSet& hs, const IncidentField& inc) {
  const auto N = hs.harmonics.size();
  if (inc.a_inc.size() != N || inc.b_inc.size() != N) {
    throw Error(ErrorCode::invalid_argument, "incident: amplitude arrays must have length N");
  }
  for (std::size_t l = 0; l < N; ++l) {
    if (!hs.is_propagating(static_cast<int>(l)) &&
        (inc.a_inc[l] != 0.0 || inc.b_inc[l] != 0.0)) {
      throw Error(ErrorCode::invalid_argument, "incident: amplitude on a non-propagating order");
    }
  }
}

double sin2pi(cplx theta) { return std::sin(kTwoPi * theta).real(); }

}  // namespace

IncidentField IncidentField::none(int N) {
  return {std::vector<cplx>(N, 0.0), std::vector<cplx>(N, 0.0)};
}

IncidentField IncidentField::unit_left(const HarmonicSet& hs, int order) {
  auto inc = none(static_cast<int>(hs.harmonics.size()));
  inc.a_inc[pick_order(hs, order)] = 1.0;
  return inc;
}

IncidentField IncidentField::unit_right(const HarmonicSet& hs, int order) {
  auto inc = none(static_cast<int>(hs.harmonics.size()));
  inc.b_inc[pick_order(hs, order)] = 1.0;
  return inc;
}

cplx waveguide_symbol(const StructureParams& p, long n, cplx omega, cplx phi) {
  const double Mn = p.mass(n);
  return omega - (p.spring(n) + p.spring(n - 1)) / Mn +
         p.spring(n) * phase(phi) / std::sqrt(Mn * p.mass(n + 1)) +
         p.spring(n - 1) * phase(-phi) / std::sqrt(Mn * p.mass(n - 1));
}

CMatrix assemble_matrix(const StructureParams& p, const BlochPoint& point,
                        const HarmonicSet& hs) {
  const int N = p.N;
  CMatrix B = CMatrix::Zero(3 * N, 3 * N);
  for (int n = 0; n < N; ++n) {
    for (int l = 0; l < N; ++l) {
      const Harmonic& h = hs.harmonics[l];
      const cplx e = phase(double(l) * n / N);
      const cplx E = phase(h.theta);
      B(n, l) = e;
      B(n, N + l) = -e;
      B(N + n, l) = E * e;
      B(N + n, N + l) = -e / E;
      B(N + n, 2 * N + l) = -std::conj(p.gamma(n)) * e;
      B(2 * N + n, N + l) = -p.gamma(n) * e;
      B(2 * N + n, 2 * N + l) = waveguide_symbol(p, n, point.omega, h.phi) * e;
    }
  }
  return B;
}

ScatteringSystem assemble_system(const StructureParams& p, const BlochPoint& point,
                                 const IncidentField& incident, const SolveOptions& opts) {
  ScatteringSystem sys;
  sys.harmonics = classify_harmonics(p, point, opts.model);
  require_off_threshold(sys.harmonics);
  check_incident(sys.harmonics, incident);
  sys.B = assemble_matrix(p, point, sys.harmonics);
  const int N = p.N;
  sys.F = CVector::Zero(3 * N);
  for (int n = 0; n < N; ++n) {
    for (int l = 0; l < N; ++l) {
      const cplx a = incident.a_inc[l], b = incident.b_inc[l];
      if (a == 0.0 && b == 0.0) continue;
      const cplx e = phase(double(l) * n / N);
      const cplx E = phase(sys.harmonics.harmonics[l].theta);
      sys.F(n) += (b - a) * e;
      sys.F(N + n) += (b * E - a / E) * e;
      sys.F(2 * N + n) += p.gamma(n) * b * e;
    }
  }
  return sys;
}

ScatteringSolution solve_scattering(const StructureParams& p, const BlochPoint& point,
                                    const IncidentField& incident, const SolveOptions& opts) {
  auto sys = assemble_system(p, point, incident, opts);
  const int N = p.N;
  Eigen::JacobiSVD<CMatrix> svd(sys.B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s(0), smin = s(s.size() - 1);
  ScatteringSolution sol;
  sol.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  sol.near_singular = !(sol.condition <= opts.singular_condition);
  // Eigen's default rank threshold would silently truncate above condition
  // ~1/(6 eps); below the limit every singular value is kept.
  svd.setThreshold(sol.near_singular ? opts.singular_cutoff : 0.0);
  const CVector X = svd.solve(sys.F);

  sol.params = p;
  sol.point = point;
  sol.harmonics = std::move(sys.harmonics);
  sol.incident = incident;
  sol.a_minus = X.segment(0, N);
  sol.b_plus = X.segment(N, N);
  sol.c = X.segment(2 * N, N);
  sol.multi_propagating = sol.harmonics.propagating.size() > 1;

  double in_flux = 0.0, trans = 0.0, refl = 0.0, balance = 0.0;
  for (int l : sol.harmonics.propagating) {
    const double s2 = sin2pi(sol.harmonics.harmonics[l].theta);
    const double in = std::norm(incident.a_inc[l]) + std::norm(incident.b_inc[l]);
    const double out = std::norm(sol.b_plus(l)) + std::norm(sol.a_minus(l));
    in_flux += in * s2;
    trans += std::norm(sol.b_plus(l)) * s2;
    refl += std::norm(sol.a_minus(l)) * s2;
    balance += (out - in) * s2;
  }
  sol.incident_flux = in_flux;
  sol.energy_residual = std::abs(balance);
  if (in_flux > 0.0) {
    sol.T = std::sqrt(trans / in_flux);
    sol.R = std::sqrt(refl / in_flux);
  }
  return sol;
}

ScatteringSolution solve_unit_left(const StructureParams& p, const BlochPoint& point,
                                   const SolveOptions& opts) {
  const auto hs = classify_harmonics(p, point, opts.model);
  return solve_scattering(p, point, IncidentField::unit_left(hs), opts);
}

cplx reconstruct_left(const ScatteringSolution& sol, long m, long n) {
  cplx u = 0.0;
  for (const Harmonic& h : sol.harmonics.harmonics) {
    const auto l = static_cast<std::size_t>(h.order);
    u += (sol.a_minus(h.order) * phase(-double(m) * h.theta) +
          sol.incident.a_inc[l] * phase(double(m) * h.theta)) *
         phase(double(n) * h.phi);
  }
  return u;
}

cplx reconstruct_right(const ScatteringSolution& sol, long m, long n) {
  cplx u = 0.0;
  for (const Harmonic& h : sol.harmonics.harmonics) {
    const auto l = static_cast<std::size_t>(h.order);
    u += (sol.incident.b_inc[l] * phase(-double(m) * h.theta) +
          sol.b_plus(h.order) * phase(double(m) * h.theta)) *
         phase(double(n) * h.phi);
  }
  return u;
}

FieldValue reconstruct_field(const ScatteringSolution& sol, long m, long n) {
  FieldValue fv;
  fv.u = m < 0 ? reconstruct_left(sol, m, n) : reconstruct_right(sol, m, n);
  fv.z = 0.0;
  for (const Harmonic& h : sol.harmonics.harmonics) {
    fv.z += sol.c(h.order) * phase(double(n) * h.phi);
  }
  return fv;
}

double column_flux(const ScatteringSolution& sol, long m) {
  double f = 0.0;
  for (long n = 0; n < sol.params.N; ++n) {
    const cplx u0 = reconstruct_field(sol, m, n).u;
    const cplx u1 = reconstruct_field(sol, m + 1, n).u;
    f += (std::conj(u0) * (u1 - u0)).imag();
  }
  return f;
}

cplx lattice_residual(const ScatteringSolution& sol, long m, long n) {
  auto u = [&](long mm, long nn) { return reconstruct_field(sol, mm, nn).u; };
  const cplx omega2u =
      4.0 * u(m, n) - u(m + 1, n) - u(m - 1, n) - u(m, n + 1) - u(m, n - 1);
  cplx r = sol.point.omega * u(m, n) - omega2u;
  if (m == 0) r -= std::conj(sol.params.gamma(n)) * reconstruct_field(sol, 0, n).z;
  return r;
}

std::vector<ScanRow> scan_transmission(const StructureParams& p,
                                       const std::vector<double>& kappas,
                                       const std::vector<double>& omegas,
                                       const IncidentFactory& incident, unsigned threads,
                                       const SolveOptions& opts) {
  p.validate();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<ScanRow> rows(kappas.size() * omegas.size());
  parallel_for(rows.size(), threads, [&](std::size_t idx) {
    ScanRow& row = rows[idx];
    row.kappa = kappas[idx / omegas.size()];
    row.omega = omegas[idx % omegas.size()];
    row.T = row.R = row.energy_residual = nan;
    const auto point = BlochPoint::real(row.kappa, row.omega);
    try {
      const auto hs = classify_harmonics(p, point, opts.model);
      if (hs.has_threshold) {
        row.flags |= scan_threshold;
        return;
      }
      if (hs.propagating.empty()) {
        row.flags |= scan_no_propagating;
        return;
      }
      const auto inc = incident ? incident(hs) : IncidentField::unit_left(hs);
      const auto sol = solve_scattering(p, point, inc, opts);
      row.T = sol.T;
      row.R = sol.R;
      row.energy_residual = sol.energy_residual;
      if (sol.near_singular) row.flags |= scan_near_singular;
      if (sol.multi_propagating) row.flags |= scan_multi_propagating;
    } catch (const Error&) {
      row.flags |= scan_failed;
    }
  });
  return rows;
}

std::string describe_flags(unsigned flags) {
  if (flags == 0) return "ok";
  std::string s;
  auto add = [&](unsigned bit, const char* name) {
    if (flags & bit) {
      if (!s.empty()) s += '|';
      s += name;
    }
  };
  add(scan_threshold, "threshold");
  add(scan_no_propagating, "no_propagating");
  add(scan_near_singular, "near_singular");
  add(scan_multi_propagating, "multi_propagating");
  add(scan_failed, "failed");
  return s;
}

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
  out << "kappa,omega,T,R,energy_residual,flags\n";
  for (const auto& r : rows) {
    out << format_real(r.kappa) << ',' << format_real(r.omega) << ',' << format_real(r.T) << ','
        << format_real(r.R) << ',' << format_real(r.energy_residual) << ','
        << describe_flags(r.flags) << '\n';
  }
}

}  // namespace latres
