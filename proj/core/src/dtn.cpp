#include "latres/dtn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace latres {

namespace {

using SpMat = Eigen::SparseMatrix<cplx>;

long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

// Incident field of one order at row m: a+ e^{2 pi i theta m} + b- e^{-2 pi i theta m}.
cplx incident_mode(const Harmonic& h, const IncidentField& inc, long m) {
  const auto l = static_cast<std::size_t>(h.order);
  return inc.a_inc[l] * phase(double(m) * h.theta) + inc.b_inc[l] * phase(-double(m) * h.theta);
}

// d_nu u^inc + T u^inc at the boundary row mb, stepping outward by `out`.
CVector boundary_data(const HarmonicSet& hs, const IncidentField& inc, long mb, long out) {
  const auto N = static_cast<long>(hs.harmonics.size());
  CVector g = CVector::Zero(N);
  for (const Harmonic& h : hs.harmonics) {
    const cplx at = incident_mode(h, inc, mb);
    const cplx gl = incident_mode(h, inc, mb + out) - at + (1.0 - phase(h.theta)) * at;
    if (gl == 0.0) continue;
    for (long n = 0; n < N; ++n) g(n) += gl * phase(double(n) * h.phi);
  }
  return g;
}

struct Layout {
  long M, N;
  long u(long m, long n) const { return (m + M) * N + n; }
  long z(long n) const { return (2 * M + 1) * N + n; }
  long size() const { return (2 * M + 2) * N; }
};

// Largest and smallest singular values by power and inverse power iteration.
double condition_estimate(const SpMat& A, Eigen::SparseLU<SpMat>& lu) {
  const long n = A.rows();
  CVector x = CVector::Ones(n).normalized();
  double smax = 0.0;
  for (int it = 0; it < 30; ++it) {
    CVector y = A.adjoint() * (A * x);
    const double nrm = y.norm();
    if (nrm == 0.0) break;
    smax = std::sqrt(nrm);
    x = y / nrm;
  }
  CVector v = CVector::Ones(n).normalized();
  double inv = 0.0;
  for (int it = 0; it < 12; ++it) {
    CVector w = lu.solve(v);
    CVector y = lu.adjoint().solve(w);
    const double nrm = y.norm();
    if (!std::isfinite(nrm) || nrm == 0.0) return std::numeric_limits<double>::infinity();
    inv = std::sqrt(nrm);
    v = y / nrm;
  }
  return smax * inv;
}

}  // namespace

CMatrix dtn_matrix(const HarmonicSet& hs) {
  const auto N = static_cast<long>(hs.harmonics.size());
  CMatrix T = CMatrix::Zero(N, N);
  for (const Harmonic& h : hs.harmonics) {
    const cplx mult = (1.0 - phase(h.theta)) / double(N);
    for (long n = 0; n < N; ++n)
      for (long np = 0; np < N; ++np) T(n, np) += mult * phase(double(n - np) * h.phi);
  }
  return T;
}

CVector dtn_apply(const HarmonicSet& hs, const CVector& trace) {
  if (trace.size() != static_cast<long>(hs.harmonics.size())) {
    throw Error(ErrorCode::invalid_argument, "dtn_apply: trace length must equal N");
  }
  return dtn_matrix(hs) * trace;
}

long default_truncation(const HarmonicSet& hs, double target) {
  double tau = std::numeric_limits<double>::infinity();
  for (const Harmonic& h : hs.harmonics) {
    if (h.cls == HarmonicClass::evanescent || h.cls == HarmonicClass::band_edge_evanescent) {
      tau = std::min(tau, h.theta.imag());
    }
  }
  if (!std::isfinite(tau)) return 2;
  const double M = std::ceil(-std::log(target) / (kTwoPi * tau));
  return std::max(2L, static_cast<long>(M));
}

cplx TruncatedSolution::u_at(long m, long n) const {
  const long N = params.N;
  const long q = floor_div(n, N);
  return u(m + M + 1, n - q * N) * phase(double(q) * point.kappa);
}

TruncatedSolution solve_truncated(const StructureParams& p, const BlochPoint& point,
                                  const IncidentField& incident, long M,
                                  const TruncatedOptions& opts) {
  if (M < 2) throw Error(ErrorCode::invalid_argument, "solve_truncated: M must be >= 2");
  TruncatedSolution sol;
  sol.harmonics = classify_harmonics(p, point, opts.solve.model);
  require_off_threshold(sol.harmonics);
  // Validates the incident amplitudes against the propagating set.
  (void)assemble_system(p, point, incident, opts.solve);
  const long N = p.N;
  const Layout L{M, N};
  const cplx omega = point.omega;
  const cplx twist = phase(point.kappa);
  const CMatrix T = dtn_matrix(sol.harmonics);
  const CMatrix W = floquet_matrix(p, point.kappa);
  sol.g_plus = boundary_data(sol.harmonics, incident, M, +1);
  sol.g_minus = boundary_data(sol.harmonics, incident, -M, -1);

  std::vector<Eigen::Triplet<cplx>> trip;
  CVector rhs = CVector::Zero(L.size());
  auto add = [&](long r, long c, cplx v) { trip.emplace_back(r, c, v); };

  for (long m = -M; m <= M; ++m) {
    for (long n = 0; n < N; ++n) {
      const long r = L.u(m, n);
      add(r, r, omega - 4.0);
      // Transverse neighbours with the kappa twist across the period edge.
      if (N == 1) {
        add(r, r, twist + 1.0 / twist);
      } else {
        add(r, L.u(m, (n + 1) % N), n + 1 == N ? twist : cplx(1.0));
        add(r, L.u(m, (n + N - 1) % N), n == 0 ? 1.0 / twist : cplx(1.0));
      }
      // Normal neighbours; the halo rows are eliminated through the DtN relation.
      for (long s : {-1L, 1L}) {
        const long mm = m + s;
        if (std::abs(mm) <= M) {
          add(r, L.u(mm, n), 1.0);
          continue;
        }
        const CVector& g = s > 0 ? sol.g_plus : sol.g_minus;
        add(r, L.u(m, n), 1.0);
        for (long np = 0; np < N; ++np) add(r, L.u(m, np), -T(n, np));
        rhs(r) -= g(n);
      }
      if (m == 0) add(r, L.z(n), -std::conj(p.gamma(n)));
    }
  }
  for (long n = 0; n < N; ++n) {
    const long r = L.z(n);
    add(r, r, omega);
    for (long np = 0; np < N; ++np) add(r, L.z(np), -W(n, np));
    add(r, L.u(0, n), -p.gamma(n));
  }

  SpMat A(L.size(), L.size());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  CVector x;
  bool dense = opts.min_norm;
  if (!dense) {
    Eigen::SparseLU<SpMat> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) {
      dense = true;
      sol.condition = std::numeric_limits<double>::infinity();
    } else {
      sol.condition = condition_estimate(A, lu);
      if (sol.condition > opts.solve.singular_condition) {
        dense = true;
      } else {
        x = lu.solve(rhs);
      }
    }
  }
  if (dense) {
    if (L.size() > opts.dense_limit) {
      throw Error(ErrorCode::singular_system,
                  "solve_truncated: near-singular system too large for the dense fallback");
    }
    const CMatrix Ad = CMatrix(A);
    Eigen::BDCSVD<CMatrix> svd(Ad, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    sol.condition = smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
    svd.setThreshold(opts.solve.singular_cutoff);
    x = svd.solve(rhs);
  }
  sol.near_singular = !(sol.condition <= opts.solve.singular_condition);
  const double bn = rhs.norm();
  sol.relative_residual = (A * x - rhs).norm() / (bn > 0.0 ? bn : 1.0);

  sol.params = p;
  sol.point = point;
  sol.incident = incident;
  sol.M = M;
  sol.u.resize(2 * M + 3, N);
  for (long m = -M; m <= M; ++m)
    for (long n = 0; n < N; ++n) sol.u(m + M + 1, n) = x(L.u(m, n));
  sol.z = x.segment(L.z(0), N);
  // Halo rows from d_nu u + T u = g.
  const CVector tp = T * sol.u.row(2 * M + 1).transpose();
  const CVector tm = T * sol.u.row(1).transpose();
  for (long n = 0; n < N; ++n) {
    sol.u(2 * M + 2, n) = sol.u(2 * M + 1, n) - tp(n) + sol.g_plus(n);
    sol.u(0, n) = sol.u(1, n) - tm(n) + sol.g_minus(n);
  }
  return sol;
}

FarField far_field(const TruncatedSolution& sol) {
  const long N = sol.params.N, M = sol.M;
  FarField ff;
  ff.a_minus = CVector::Zero(N);
  ff.b_plus = CVector::Zero(N);
  double in = 0.0, trans = 0.0, refl = 0.0;
  for (int l : sol.harmonics.propagating) {
    const Harmonic& h = sol.harmonics.harmonics[static_cast<std::size_t>(l)];
    const auto li = static_cast<std::size_t>(l);
    cplx right = 0.0, left = 0.0;
    for (long n = 0; n < N; ++n) {
      const cplx w = phase(-double(n) * h.phi) / double(N);
      right += sol.u_at(M, n) * w;
      left += sol.u_at(-M, n) * w;
    }
    const cplx EM = phase(double(M) * h.theta);
    ff.b_plus(l) = (right - sol.incident.b_inc[li] / EM) / EM;
    ff.a_minus(l) = (left - sol.incident.a_inc[li] / EM) / EM;
    const double s2 = std::sin(kTwoPi * h.theta).real();
    in += (std::norm(sol.incident.a_inc[li]) + std::norm(sol.incident.b_inc[li])) * s2;
    trans += std::norm(ff.b_plus(l)) * s2;
    refl += std::norm(ff.a_minus(l)) * s2;
  }
  if (in > 0.0) {
    ff.T = std::sqrt(trans / in);
    ff.R = std::sqrt(refl / in);
  }
  return ff;
}

CrossValidation cross_validate(const StructureParams& p, const BlochPoint& point,
                               const IncidentField& incident, long M,
                               const TruncatedOptions& opts) {
  const auto four = solve_scattering(p, point, incident, opts.solve);
  if (M <= 0) M = default_truncation(four.harmonics);
  TruncatedOptions topts = opts;
  topts.min_norm = topts.min_norm || four.near_singular;
  const auto trunc = solve_truncated(p, point, incident, M, topts);

  const long N = p.N;
  const long size = (2 * M + 1) * N + N;
  CVector diff(size), mode = CVector::Zero(size);
  auto pack = [&](CVector& out, auto&& u, auto&& z) {
    long k = 0;
    for (long m = -M; m <= M; ++m)
      for (long n = 0; n < N; ++n) out(k++) = u(m, n);
    for (long n = 0; n < N; ++n) out(k++) = z(n);
  };
  CVector uf(size), ut(size);
  pack(uf, [&](long m, long n) { return reconstruct_field(four, m, n).u; },
       [&](long n) { return reconstruct_field(four, 0, n).z; });
  pack(ut, [&](long m, long n) { return trunc.u_at(m, n); }, [&](long n) { return trunc.z(n); });
  diff = uf - ut;

  CrossValidation cv;
  cv.M = M;
  cv.near_singular = four.near_singular || trunc.near_singular;
  if (cv.near_singular) {
    // The guided mode spans the nullspace; compare modulo that direction.
    auto sys = assemble_system(p, point, IncidentField::none(p.N), opts.solve);
    Eigen::JacobiSVD<CMatrix> svd(sys.B, Eigen::ComputeFullV);
    const CVector null = svd.matrixV().col(3 * N - 1);
    ScatteringSolution gm = four;
    gm.incident = IncidentField::none(p.N);
    gm.a_minus = null.segment(0, N);
    gm.b_plus = null.segment(N, N);
    gm.c = null.segment(2 * N, N);
    pack(mode, [&](long m, long n) { return reconstruct_field(gm, m, n).u; },
         [&](long n) { return reconstruct_field(gm, 0, n).z; });
    const cplx coef = mode.dot(diff) / mode.squaredNorm();
    diff -= coef * mode;
  }
  cv.discrepancy = diff.cwiseAbs().maxCoeff();
  return cv;
}

VariationalReport variational_residual(const TruncatedSolution& sol) {
  const auto& p = sol.params;
  const long N = p.N;
  const long M = sol.M;
  const cplx omega = sol.point.omega;
  const CMatrix T = dtn_matrix(sol.harmonics);
  const CVector rp = -T * sol.u.row(2 * M + 1).transpose() + sol.g_plus;
  const CVector rm = -T * sol.u.row(1).transpose() + sol.g_minus;

  VariationalReport rep;
  for (long i = 0; i < sol.u.size(); ++i) rep.scale = std::max(rep.scale, std::abs(sol.u(i)));
  for (long n = 0; n < N; ++n) rep.scale = std::max(rep.scale, std::abs(sol.z(n)));

  // Unit test field at (m0, n0) extended pseudo-periodically in n.
  for (long m0 = -M - 1; m0 <= M; ++m0) {
    for (long n0 = 0; n0 < N; ++n0) {
      auto vbar = [&](long m, long n) -> cplx {
        if (m != m0) return 0.0;
        const long q = floor_div(n, N);
        if (n - q * N != n0) return 0.0;
        return std::conj(phase(double(q) * sol.point.kappa));
      };
      cplx acc = 0.0;
      for (long m = -M; m <= M; ++m) {
        for (long n = 0; n < N; ++n) {
          cplx source = omega * sol.u_at(m, n);
          if (m == 0) source -= std::conj(p.gamma(n)) * sol.z(n);
          acc += vbar(m, n) * source;
          acc -= (vbar(m, n) - vbar(m - 1, n)) * (sol.u_at(m, n) - sol.u_at(m - 1, n));
          acc -= (vbar(m, n) - vbar(m, n - 1)) * (sol.u_at(m, n) - sol.u_at(m, n - 1));
        }
      }
      for (long n = 0; n < N; ++n) {
        acc += vbar(M, n) * rp(n) + vbar(-M - 1, n) * rm(n);
      }
      rep.lattice = std::max(rep.lattice, std::abs(acc));
    }
  }

  auto zf = [&](long n) {
    const long q = floor_div(n, N);
    return sol.z(n - q * N) * phase(double(q) * sol.point.kappa) / std::sqrt(p.mass(n));
  };
  for (long n0 = 0; n0 < N; ++n0) {
    auto hbar = [&](long n) -> cplx {
      const long q = floor_div(n, N);
      if (n - q * N != n0) return 0.0;
      return std::conj(phase(double(q) * sol.point.kappa)) / std::sqrt(p.mass(n));
    };
    cplx acc = omega * sol.z(n0) - p.gamma(n0) * sol.u_at(0, n0);
    for (long n = 0; n < N; ++n) {
      acc -= p.spring(n) * (zf(n + 1) - zf(n)) * (hbar(n + 1) - hbar(n));
    }
    rep.waveguide = std::max(rep.waveguide, std::abs(acc));
  }
  return rep;
}

}  // namespace latres
