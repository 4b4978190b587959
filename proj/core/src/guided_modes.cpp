#include "latres/guided_modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Eigenvalues>

namespace latres {

namespace {

// Columns kept when the propagating outgoing coefficients are forced to zero.
std::vector<int> kept_columns(const HarmonicSet& hs, int N) {
  std::vector<int> keep;
  for (int i = 0; i < 3 * N; ++i) {
    if (i < 2 * N && hs.is_propagating(i % N)) continue;
    keep.push_back(i);
  }
  return keep;
}

CMatrix reduced_matrix(const StructureParams& p, const BlochPoint& point, const HarmonicSet& hs,
                       const std::vector<int>& keep) {
  const CMatrix B = assemble_matrix(p, point, hs);
  CMatrix R(B.rows(), static_cast<long>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) R.col(static_cast<long>(j)) = B.col(keep[j]);
  return R;
}

// sigma_min, treating thresholds and the outside of a search as "far".
double sigma_or_large(const StructureParams& p, double kappa, double omega,
                      const ModelOptions& opts) {
  try {
    return sigma_min(p, BlochPoint::real(kappa, omega), opts);
  } catch (const Error&) {
    return 1.0;
  }
}

}  // namespace

std::pair<double, CVector> sigma_min_vector(const StructureParams& p, const BlochPoint& point,
                                            const ModelOptions& opts) {
  const auto hs = classify_harmonics(p, point, opts);
  require_off_threshold(hs);
  const int N = p.N;
  const auto keep = kept_columns(hs, N);
  const CMatrix R = reduced_matrix(p, point, hs, keep);
  Eigen::JacobiSVD<CMatrix> svd(R, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const long K = static_cast<long>(keep.size());
  CVector v = CVector::Zero(3 * N);
  const CVector vr = svd.matrixV().col(K - 1);
  for (long j = 0; j < K; ++j) v(keep[j]) = vr(j);
  return {s(K - 1) / s(0), v};
}

double sigma_min(const StructureParams& p, const BlochPoint& point, const ModelOptions& opts) {
  const auto hs = classify_harmonics(p, point, opts);
  require_off_threshold(hs);
  const auto keep = kept_columns(hs, p.N);
  Eigen::JacobiSVD<CMatrix> svd(reduced_matrix(p, point, hs, keep));
  const auto& s = svd.singularValues();
  return s(s.size() - 1) / s(0);
}

bool in_region_one(double kappa, double omega) {
  const double c = std::cos(kPi * kappa);
  return omega > 2.0 - 2.0 * c && omega < 2.0 + 2.0 * c;
}

std::pair<cplx, cplx> criterion_residuals_N2(const StructureParams& p, cplx kappa, cplx omega) {
  p.validate();
  if (p.N != 2) throw Error(ErrorCode::invalid_argument, "criteria: N must be 2");
  if (kappa.imag() == 0.0 && omega.imag() == 0.0 && !in_region_one(kappa.real(), omega.real())) {
    throw Error(ErrorCode::region_violation, "criteria: point outside region I");
  }
  const double M0 = p.masses[0], M1 = p.masses[1];
  const double k0 = p.springs[0], k1 = p.springs[1];
  const cplx g0 = p.gammas[0], g1 = p.gammas[1];
  const cplx G0 = std::conj(g0), G1 = std::conj(g1);
  const double sq = std::sqrt(M0 * M1);
  const cplx ck = std::cos(kPi * kappa), sk = std::sin(kPi * kappa);
  const cplx chi = 2.0 - omega / 2.0 + ck;
  // sin(2 pi theta_1) = sqrt(1 - chi^2) on the branch i sqrt(chi^2 - 1) for
  // chi > 1; the factored form avoids signed-zero branch flips.
  const cplx s = kI * std::sqrt(chi - 1.0) * std::sqrt(chi + 1.0);
  const cplx ratio = (G1 - G0) / (G0 + G1);
  const cplx r1 = ratio * ((k0 + k1) * (1.0 / M1 - 1.0 / M0) + 2.0 * kI * sk / sq * (k0 - k1)) -
                  G0 * G1 * (g0 + g1) / ((G0 + G1) * kI * s) + 2.0 * omega +
                  (k0 + k1) * (-1.0 / M0 - 1.0 / M1 - 2.0 * ck / sq);
  const cplx r2 = ratio * (2.0 * omega + (k0 + k1) * (2.0 * ck / sq - 1.0 / M0 - 1.0 / M1)) +
                  G0 * G1 * (g1 - g0) / ((G0 + G1) * kI * s) + (k0 + k1) * (1.0 / M1 - 1.0 / M0) +
                  2.0 * kI * sk * (k1 - k0) / sq;
  return {r1, r2};
}

std::pair<double, double> polish_criteria_N2(const StructureParams& p, double kappa,
                                             double omega, int iterations) {
  auto F = [&](double k, double w) {
    const auto [r1, r2] = criterion_residuals_N2(p, k, w);
    Eigen::Vector4d v(r1.real(), r1.imag(), r2.real(), r2.imag());
    return v;
  };
  for (int it = 0; it < iterations; ++it) {
    const Eigen::Vector4d f = F(kappa, omega);
    const double h = 1e-7;
    Eigen::Matrix<double, 4, 2> J;
    J.col(0) = (F(kappa + h, omega) - F(kappa - h, omega)) / (2 * h);
    J.col(1) = (F(kappa, omega + h) - F(kappa, omega - h)) / (2 * h);
    const Eigen::Vector2d step = J.colPivHouseholderQr().solve(-f);
    kappa += step(0);
    omega += step(1);
    if (step.norm() < 1e-15) break;
  }
  return {kappa, omega};
}

GuidedMode refine_guided_mode(const StructureParams& p, double kappa, double omega,
                              const GuidedSearchOptions& opts, double kappa_scale,
                              double omega_scale) {
  const int N = p.N;
  auto nm = nelder_mead(
      [&](const std::vector<double>& x) { return sigma_or_large(p, x[0], x[1], opts.model); },
      {kappa, omega}, {kappa_scale, omega_scale}, 1e-14, 3000);
  kappa = nm.x[0];
  omega = nm.x[1];

  // Bordered Gauss-Newton: R(kappa, omega) x = 0 with v0^H x = 1.
  auto start = sigma_min_vector(p, BlochPoint::real(kappa, omega), opts.model);
  const auto hs0 = classify_harmonics(p, BlochPoint::real(kappa, omega), opts.model);
  const auto keep = kept_columns(hs0, N);
  const long K = static_cast<long>(keep.size());
  CVector v0(K);
  for (long j = 0; j < K; ++j) v0(j) = start.second(keep[j]);
  CVector x = v0;
  auto Rat = [&](double k, double w) {
    const auto point = BlochPoint::real(k, w);
    const auto hs = classify_harmonics(p, point, opts.model);
    require_off_threshold(hs);
    if (kept_columns(hs, N) != keep) {
      throw Error(ErrorCode::region_violation, "refine: propagating set changed");
    }
    return reduced_matrix(p, point, hs, keep);
  };
  const long rows = 3 * N + 1;
  try {
    double best = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 40; ++it) {
      const CMatrix R = Rat(kappa, omega);
      CMatrix A(rows, K);
      A.topRows(3 * N) = R;
      A.row(3 * N) = v0.adjoint();
      CVector r = A * x;
      r(3 * N) -= 1.0;
      const double rn = r.norm();
      if (rn >= best && it > 3) break;
      best = std::min(best, rn);
      const double h = 1e-7;
      const CVector dk = (Rat(kappa + h, omega) - Rat(kappa - h, omega)) * x / (2 * h);
      const CVector dw = (Rat(kappa, omega + h) - Rat(kappa, omega - h)) * x / (2 * h);
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * rows, 2 * K + 2);
      J.block(0, 0, rows, K) = A.real();
      J.block(rows, 0, rows, K) = A.imag();
      J.block(0, K, rows, K) = -A.imag();
      J.block(rows, K, rows, K) = A.real();
      J.block(0, 2 * K, 3 * N, 1) = dk.real();
      J.block(rows, 2 * K, 3 * N, 1) = dk.imag();
      J.block(0, 2 * K + 1, 3 * N, 1) = dw.real();
      J.block(rows, 2 * K + 1, 3 * N, 1) = dw.imag();
      Eigen::VectorXd rr(2 * rows);
      rr << r.real(), r.imag();
      const Eigen::VectorXd step = J.colPivHouseholderQr().solve(-rr);
      x += step.segment(0, K) + kI * step.segment(K, K);
      kappa += step(2 * K);
      omega += step(2 * K + 1);
      if (std::abs(step(2 * K)) + std::abs(step(2 * K + 1)) < 1e-16) break;
    }
  } catch (const Error&) {
    // Keep the Nelder-Mead point; acceptance below decides.
    kappa = nm.x[0];
    omega = nm.x[1];
  }

  GuidedMode gm;
  auto final = sigma_min_vector(p, BlochPoint::real(kappa, omega), opts.model);
  if (final.first > nm.value) {
    kappa = nm.x[0];
    omega = nm.x[1];
    final = sigma_min_vector(p, BlochPoint::real(kappa, omega), opts.model);
  }
  if (!(final.first <= opts.accept_tol)) {
    throw Error(ErrorCode::no_root, "refine: sigma_min did not vanish");
  }
  gm.kappa = kappa;
  gm.omega = omega;
  gm.sigma_min = final.first;
  gm.null_vector = final.second;
  const auto hs = classify_harmonics(p, BlochPoint::real(kappa, omega), opts.model);
  gm.region_id = static_cast<int>(hs.propagating.size());
  if (N == 2 && in_region_one(kappa, omega)) {
    const auto [r1, r2] = criterion_residuals_N2(p, kappa, omega);
    gm.criteria_residual = std::max(std::abs(r1), std::abs(r2));
  }
  return gm;
}

GuidedMode refine_at_kappa(const StructureParams& p, double kappa, double omega,
                           const GuidedSearchOptions& opts, double omega_scale) {
  omega = golden_section_min(
      [&](double w) { return sigma_or_large(p, kappa, w, opts.model); }, omega - omega_scale,
      omega + omega_scale, 1e-15);
  const auto final = sigma_min_vector(p, BlochPoint::real(kappa, omega), opts.model);
  if (!(final.first <= opts.accept_tol)) {
    throw Error(ErrorCode::no_root, "refine_at_kappa: sigma_min did not vanish");
  }
  GuidedMode gm;
  gm.kappa = kappa;
  gm.omega = omega;
  gm.sigma_min = final.first;
  gm.null_vector = final.second;
  gm.region_id = static_cast<int>(
      classify_harmonics(p, BlochPoint::real(kappa, omega), opts.model).propagating.size());
  if (p.N == 2 && in_region_one(kappa, omega)) {
    const auto [r1, r2] = criterion_residuals_N2(p, kappa, omega);
    gm.criteria_residual = std::max(std::abs(r1), std::abs(r2));
  }
  return gm;
}

std::vector<GuidedMode> find_guided_modes(const StructureParams& p, const SearchWindow& w,
                                          const GuidedSearchOptions& opts) {
  p.validate();
  const long nk = opts.kappa_samples, nw = opts.omega_samples;
  if (nk < 3 || nw < 3) throw Error(ErrorCode::invalid_argument, "guided: grid too coarse");
  const auto ks = linspace(w.kappa_min, w.kappa_max, static_cast<std::size_t>(nk));
  const auto ws = linspace(w.omega_min, w.omega_max, static_cast<std::size_t>(nw));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> grid(static_cast<std::size_t>(nk * nw), nan);
  parallel_for(static_cast<std::size_t>(nk), opts.threads, [&](std::size_t i) {
    for (long j = 0; j < nw; ++j) {
      const auto point = BlochPoint::real(ks[i], ws[j]);
      try {
        const auto hs = classify_harmonics(p, point, opts.model);
        if (hs.has_threshold) continue;
        if (opts.embedded_only && hs.propagating.empty()) continue;
        grid[i * nw + j] = sigma_min(p, point, opts.model);
      } catch (const Error&) {
      }
    }
  });

  struct Seed {
    double k, w;
  };
  std::vector<Seed> seeds;
  for (long i = 0; i < nk; ++i) {
    for (long j = 0; j < nw; ++j) {
      const double v = grid[i * nw + j];
      if (!(v < opts.candidate_threshold)) continue;
      bool minimum = true;
      for (long di = -1; di <= 1 && minimum; ++di) {
        for (long dj = -1; dj <= 1; ++dj) {
          const long ii = i + di, jj = j + dj;
          if ((di == 0 && dj == 0) || ii < 0 || jj < 0 || ii >= nk || jj >= nw) continue;
          const double u = grid[ii * nw + jj];
          if (std::isfinite(u) && u < v) {
            minimum = false;
            break;
          }
        }
      }
      if (minimum) seeds.push_back({ks[i], ws[j]});
    }
  }

  const double dk = (w.kappa_max - w.kappa_min) / double(nk - 1);
  const double dw = (w.omega_max - w.omega_min) / double(nw - 1);
  std::vector<std::optional<GuidedMode>> refined(seeds.size());
  parallel_for(seeds.size(), opts.threads, [&](std::size_t s) {
    try {
      refined[s] = refine_guided_mode(p, seeds[s].k, seeds[s].w, opts, 0.5 * dk, 0.5 * dw);
    } catch (const Error&) {
    }
  });

  std::vector<GuidedMode> modes;
  auto inside = [&](double k, double om) {
    return k >= w.kappa_min - 1e-12 && k <= w.kappa_max + 1e-12 && om >= w.omega_min &&
           om <= w.omega_max;
  };
  auto known = [&](double k, double om) {
    return std::any_of(modes.begin(), modes.end(), [&](const GuidedMode& m) {
      return std::abs(m.kappa - k) < opts.merge_tol && std::abs(m.omega - om) < opts.merge_tol;
    });
  };
  auto admit = [&](const GuidedMode& m) {
    if (!inside(m.kappa, m.omega) || known(m.kappa, m.omega)) return;
    if (opts.embedded_only && m.region_id == 0) return;
    if (p.N == 2 && m.region_id == 1 && !in_region_one(m.kappa, m.omega)) return;
    modes.push_back(m);
  };
  for (const auto& r : refined) {
    if (r) admit(*r);
  }
  // Modes come in +-kappa pairs; complete any pair whose mirror was missed.
  const std::size_t found = modes.size();
  for (std::size_t i = 0; i < found; ++i) {
    const GuidedMode m = modes[i];
    if (std::abs(m.kappa) < opts.merge_tol || known(-m.kappa, m.omega)) continue;
    if (!inside(-m.kappa, m.omega)) continue;
    try {
      admit(refine_guided_mode(p, -m.kappa, m.omega, opts, 0.5 * dk, 0.5 * dw));
    } catch (const Error&) {
    }
  }
  std::sort(modes.begin(), modes.end(), [](const GuidedMode& a, const GuidedMode& b) {
    return a.omega != b.omega && std::abs(a.omega - b.omega) > 1e-9 ? a.omega < b.omega
                                                                   : a.kappa < b.kappa;
  });
  return modes;
}

std::vector<RobustModePoint> trace_robust_modes(const StructureParams& p,
                                                const std::vector<double>& kappas,
                                                double omega_min, double omega_max,
                                                long omega_samples, double accept_tol) {
  std::vector<RobustModePoint> out;
  const auto ws = linspace(omega_min, omega_max, static_cast<std::size_t>(omega_samples));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double k : kappas) {
    std::vector<double> vals(ws.size(), nan);
    for (std::size_t j = 0; j < ws.size(); ++j) {
      try {
        const auto point = BlochPoint::real(k, ws[j]);
        const auto hs = classify_harmonics(p, point);
        if (hs.has_threshold || !hs.propagating.empty()) continue;
        vals[j] = sigma_min(p, point);
      } catch (const Error&) {
      }
    }
    for (std::size_t j = 1; j + 1 < ws.size(); ++j) {
      if (!(vals[j] <= vals[j - 1] && vals[j] <= vals[j + 1])) continue;
      auto f = [&](double om) { return sigma_or_large(p, k, om, {}); };
      const double om = golden_section_min(f, ws[j - 1], ws[j + 1], 1e-15);
      const double s = f(om);
      if (s <= accept_tol) out.push_back({k, om, s});
    }
  }
  return out;
}

EllValue eigenvalue_ell(const StructureParams& p, const BlochPoint& point,
                        const CVector& reference, double min_overlap, const ModelOptions& opts) {
  const auto hs = classify_harmonics(p, point, opts);
  require_off_threshold(hs);
  Eigen::ComplexEigenSolver<CMatrix> es(assemble_matrix(p, point, hs));
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::lost_track, "eigenvalue_ell: eigensolver failed");
  }
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  long best = 0;
  double score = -1.0;
  for (long i = 0; i < vals.size(); ++i) {
    const double s = reference.size() == 0
                         ? -std::abs(vals(i))
                         : std::abs(reference.dot(vecs.col(i))) /
                               (reference.norm() * vecs.col(i).norm());
    if (s > score) {
      score = s;
      best = i;
    }
  }
  EllValue ev;
  ev.value = vals(best);
  ev.eigenvector = vecs.col(best).normalized();
  ev.overlap = reference.size() == 0 ? 1.0 : score;
  if (ev.overlap < min_overlap) {
    throw Error(ErrorCode::lost_track, "eigenvalue_ell: eigenvector overlap below threshold");
  }
  return ev;
}

EllTracker::EllTracker(StructureParams params, const GuidedMode& mode, ModelOptions opts)
    : params_(std::move(params)), reference_(mode.null_vector), opts_(opts) {}

EllValue EllTracker::operator()(const BlochPoint& point) {
  auto ev = eigenvalue_ell(params_, point, reference_, 0.7, opts_);
  reference_ = ev.eigenvector;
  return ev;
}

std::vector<double> symmetric_samples(double radius, int half) {
  return linspace(-radius, radius, static_cast<std::size_t>(2 * half + 1));
}

DispersionFit continue_and_fit_dispersion(const StructureParams& p, const GuidedMode& mode,
                                          const std::vector<double>& kappa_tilde,
                                          const DispersionOptions& opts) {
  std::vector<double> pos, neg;
  for (double kt : kappa_tilde) (kt >= 0.0 ? pos : neg).push_back(kt);
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end(), std::greater<>());

  auto newton = [&](double kt, cplx omega, CVector& ref) {
    const cplx kappa = mode.kappa + kt;
    for (int it = 0; it < opts.newton_iterations; ++it) {
      const auto ev = eigenvalue_ell(p, BlochPoint::complex(kappa, omega), ref, 0.7, opts.model);
      const double h = 1e-7 * (1.0 + std::abs(omega));
      const auto evh =
          eigenvalue_ell(p, BlochPoint::complex(kappa, omega + h), ev.eigenvector, 0.7, opts.model);
      const cplx deriv = (evh.value - ev.value) / h;
      if (deriv == 0.0) break;
      const cplx step = ev.value / deriv;
      omega -= step;
      ref = ev.eigenvector;
      if (std::abs(step) < opts.newton_tol * (1.0 + std::abs(omega))) return omega;
    }
    throw Error(ErrorCode::newton_divergence, "dispersion: Newton did not converge");
  };

  DispersionFit fit;
  fit.kappa0 = mode.kappa;
  fit.omega0 = mode.omega;
  for (const auto* side : {&pos, &neg}) {
    CVector ref = mode.null_vector;
    cplx prev = mode.omega, prev2 = mode.omega;
    double kprev = 0.0, kprev2 = 0.0;
    int count = 0;
    for (double kt : *side) {
      cplx guess = prev;
      if (count >= 2 && kprev != kprev2) {
        guess = prev + (prev - prev2) * (kt - kprev) / (kprev - kprev2);
      }
      const cplx om = newton(kt, guess, ref);
      if (!(side == &neg && kt == 0.0)) fit.samples.push_back({kt, om});
      prev2 = prev;
      kprev2 = kprev;
      prev = om;
      kprev = kt;
      ++count;
    }
  }
  std::sort(fit.samples.begin(), fit.samples.end(),
            [](const auto& a, const auto& b) { return a.kappa_tilde < b.kappa_tilde; });
  if (fit.samples.size() < 3) throw Error(ErrorCode::fit_failed, "dispersion: too few samples");

  std::vector<double> x;
  std::vector<cplx> y;
  for (const auto& s : fit.samples) {
    x.push_back(s.kappa_tilde);
    y.push_back(s.omega - mode.omega);
    fit.fit_radius = std::max(fit.fit_radius, std::abs(s.kappa_tilde));
    fit.max_imag_omega =
        (x.size() == 1) ? s.omega.imag() : std::max(fit.max_imag_omega, s.omega.imag());
  }
  const std::vector<int> powers =
      fit.samples.size() >= 6 ? std::vector<int>{1, 2, 3, 4} : std::vector<int>{1, 2};
  const auto c = polyfit(x, y, powers);
  fit.ell1 = -c[0].real();
  fit.ell1_imag = -c[0].imag();
  fit.ell2 = -c[1];
  fit.higher.assign(c.begin() + 2, c.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    cplx model = 0.0;
    for (std::size_t j = 0; j < powers.size(); ++j) model += c[j] * std::pow(x[i], powers[j]);
    fit.fit_residual = std::max(fit.fit_residual, std::abs(model - y[i]));
  }
  if (std::abs(fit.ell1_imag) > opts.max_ell1_imag) {
    throw Error(ErrorCode::fit_failed, "dispersion: linear coefficient is not real");
  }
  return fit;
}

}  // namespace latres
