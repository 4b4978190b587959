#include "latres/timedomain.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace latres {

namespace {

void check_shape(const StructureParams& p, const LatticeState& s) {
  if (s.Mx < 0 || s.z.size() != p.N || s.u.rows() != 2 * s.Mx + 1 || s.u.cols() != p.N) {
    throw Error(ErrorCode::invalid_argument, "timedomain: state shape does not match the structure");
  }
  if (!s.z.allFinite() || !s.u.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "timedomain: non-finite state");
  }
}

// s += c * d, component-wise.
void axpy(LatticeState& s, cplx c, const LatticeState& d) {
  s.z += c * d.z;
  s.u += c * d.u;
}

void normalize(LatticeState& s) {
  const double n = std::sqrt(norm2(s));
  s.z /= n;
  s.u /= n;
}

LatticeState pulse(int N, long Mx, double kappa, double width, bool odd) {
  if (!(width > 0.0)) throw Error(ErrorCode::invalid_argument, "pulse: width must be positive");
  auto s = LatticeState::zeros(N, Mx, kappa);
  for (long m = -Mx; m <= Mx; ++m) {
    const double g = std::exp(-0.5 * double(m * m) / (width * width)) * (odd ? double(m) : 1.0);
    for (long n = 0; n < N; ++n) s.at(m, n) = g * phase(kappa * double(n) / N);
  }
  normalize(s);
  return s;
}

}  // namespace

LatticeState LatticeState::zeros(int N, long Mx, double kappa) {
  if (N < 1 || Mx < 0) throw Error(ErrorCode::invalid_argument, "LatticeState: bad shape");
  LatticeState s;
  s.kappa = kappa;
  s.Mx = Mx;
  s.z = CVector::Zero(N);
  s.u = Eigen::MatrixXcd::Zero(2 * Mx + 1, N);
  return s;
}

double norm2(const LatticeState& s) { return s.z.squaredNorm() + s.u.squaredNorm(); }

double waveguide_energy(const LatticeState& s) { return s.z.squaredNorm(); }

cplx inner(const LatticeState& a, const LatticeState& b) {
  return a.z.dot(b.z) + (a.u.conjugate().cwiseProduct(b.u)).sum();
}

LatticeState apply_omega(const StructureParams& p, const LatticeState& s) {
  check_shape(p, s);
  const int N = p.N;
  const long rows = 2 * s.Mx + 1;
  const cplx w = phase(s.kappa);
  LatticeState out = s;
  out.z = floquet_matrix(p, s.kappa) * s.z;
  for (long r = 0; r < rows; ++r) {
    for (long n = 0; n < N; ++n) {
      const cplx right = n + 1 < N ? s.u(r, n + 1) : w * s.u(r, 0);
      const cplx left = n > 0 ? s.u(r, n - 1) : std::conj(w) * s.u(r, N - 1);
      const cplx up = r + 1 < rows ? s.u(r + 1, n) : 0.0;
      const cplx down = r > 0 ? s.u(r - 1, n) : 0.0;
      out.u(r, n) = 4.0 * s.u(r, n) - right - left - up - down;
    }
  }
  for (long n = 0; n < N; ++n) {
    out.z(n) += p.gamma(n) * s.u(s.Mx, n);
    out.u(s.Mx, n) += std::conj(p.gamma(n)) * s.z(n);
  }
  return out;
}

double omega_norm_bound(const StructureParams& p) {
  p.validate();
  double bound = 0.0;
  for (long n = 0; n < p.N; ++n) {
    const double Mn = p.mass(n);
    const double wave = (p.spring(n) + p.spring(n - 1)) / Mn +
                        p.spring(n) / std::sqrt(Mn * p.mass(n + 1)) +
                        p.spring(n - 1) / std::sqrt(Mn * p.mass(n - 1));
    bound = std::max({bound, wave + std::abs(p.gamma(n)), 8.0 + std::abs(p.gamma(n))});
  }
  return bound;
}

long light_cone_margin(double bound, double t, double tol) {
  // log((bound t)^d / d!) evaluated incrementally.
  const double x = bound * std::abs(t);
  double logterm = 0.0;
  for (long d = 1;; ++d) {
    logterm += std::log(x) - std::log(double(d));
    if (double(d) > x && logterm < std::log(tol)) return d;
  }
}

EvolveResult evolve(const StructureParams& p, const LatticeState& initial, double dt, long steps,
                    const EvolveOptions& opts) {
  check_shape(p, initial);
  if (!(dt > 0.0) || steps < 0 || opts.record_every < 1) {
    throw Error(ErrorCode::invalid_argument, "evolve: need dt > 0, steps >= 0, record_every >= 1");
  }
  const double bound = omega_norm_bound(p);
  if (dt * bound > opts.max_dt_norm) {
    throw Error(ErrorCode::invalid_argument, "evolve: dt * |Omega| exceeds the stability margin");
  }
  EvolveResult res;
  res.state = initial;
  LatticeState& x = res.state;
  const double n0 = norm2(initial);
  auto record = [&] {
    res.t.push_back(x.t);
    res.norm.push_back(std::sqrt(norm2(x)));
    res.waveguide_energy.push_back(waveguide_energy(x));
  };
  record();
  res.max_z = x.z.cwiseAbs().maxCoeff();
  const cplx mi = -kI;
  for (long step = 1; step <= steps; ++step) {
    const LatticeState k1 = apply_omega(p, x);
    LatticeState y = x;
    axpy(y, mi * (0.5 * dt), k1);
    const LatticeState k2 = apply_omega(p, y);
    y = x;
    axpy(y, mi * (0.5 * dt), k2);
    const LatticeState k3 = apply_omega(p, y);
    y = x;
    axpy(y, mi * dt, k3);
    const LatticeState k4 = apply_omega(p, y);
    axpy(x, mi * (dt / 6.0), k1);
    axpy(x, mi * (dt / 3.0), k2);
    axpy(x, mi * (dt / 3.0), k3);
    axpy(x, mi * (dt / 6.0), k4);
    x.t = initial.t + double(step) * dt;

    const double nn = norm2(x);
    res.drift = std::max(res.drift, n0 > 0.0 ? std::abs(nn - n0) / n0 : nn);
    res.max_z = std::max(res.max_z, x.z.cwiseAbs().maxCoeff());
    if (!(res.drift <= opts.drift_limit)) {
      throw Error(ErrorCode::instability, "evolve: norm drift " + std::to_string(res.drift) +
                                              " at step " + std::to_string(step));
    }
    if (step % opts.record_every == 0 || step == steps) record();
  }
  return res;
}

LatticeState symmetric_pulse(int N, long Mx, double kappa, double width) {
  return pulse(N, Mx, kappa, width, false);
}

LatticeState antisymmetric_pulse(int N, long Mx, double kappa, double width) {
  return pulse(N, Mx, kappa, width, true);
}

LatticeState random_localized(int N, long Mx, double kappa, long radius, std::uint64_t seed) {
  auto s = LatticeState::zeros(N, Mx, kappa);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (long m = -std::min(radius, Mx); m <= std::min(radius, Mx); ++m) {
    for (long n = 0; n < N; ++n) s.at(m, n) = {g(rng), g(rng)};
  }
  for (long n = 0; n < N; ++n) s.z(n) = {g(rng), g(rng)};
  normalize(s);
  return s;
}

LatticeState antisymmetrize(const LatticeState& s) {
  LatticeState out = s;
  out.z.setZero();
  for (long m = -s.Mx; m <= s.Mx; ++m) {
    out.u.row(m + s.Mx) = 0.5 * (s.u.row(m + s.Mx) - s.u.row(-m + s.Mx));
  }
  return out;
}

}  // namespace latres
