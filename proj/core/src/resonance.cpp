#include "latres/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace latres {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Amplitudes {
  cplx refl;
  cplx trans;
  double T;
  double R;
};

// Single propagating order, unit incidence from the left.
Amplitudes amplitudes(const StructureParams& p, double kappa, double omega,
                      const SolveOptions& opts) {
  const auto point = BlochPoint::real(kappa, omega);
  const auto hs = classify_harmonics(p, point, opts.model);
  if (hs.propagating.size() != 1) {
    throw Error(ErrorCode::region_violation, "resonance: expected exactly one propagating order");
  }
  const int l = hs.propagating.front();
  const auto sol = solve_scattering(p, point, IncidentField::unit_left(hs, l), opts);
  return {sol.a_minus(l), sol.b_plus(l), sol.T, sol.R};
}

// Real root of a complex-valued f(omega) that vanishes on the real axis:
// golden section on |f| inside [lo, hi], then Newton steps restricted to Re.
double real_root(const std::function<cplx(double)>& f, double lo, double hi, int iterations) {
  double w = golden_section_min([&](double x) { return std::abs(f(x)); }, lo, hi, 1e-3 * (hi - lo));
  const double h = 1e-4 * (hi - lo);
  for (int it = 0; it < iterations; ++it) {
    const cplx d = (f(w + h) - f(w - h)) / (2.0 * h);
    if (d == 0.0) break;
    const double step = (f(w) / d).real();
    w -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(w))) break;
  }
  return w;
}

using RealSystem = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Gauss-Newton with a central-difference Jacobian; returns the final
// residual norm and leaves the iterate in x.
double gauss_newton(const RealSystem& F, Eigen::VectorXd& x, int iterations,
                    double h = 1e-7) {
  Eigen::VectorXd f = F(x);
  for (int it = 0; it < iterations; ++it) {
    if (!f.allFinite()) return std::numeric_limits<double>::infinity();
    Eigen::MatrixXd J(f.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      J.col(j) = (F(xp) - F(xm)) / (2.0 * h);
    }
    const Eigen::VectorXd step = J.colPivHouseholderQr().solve(-f);
    if (!step.allFinite()) return std::numeric_limits<double>::infinity();
    x += step;
    f = F(x);
    if (step.norm() <= 1e-15 * (1.0 + x.norm())) break;
  }
  return f.allFinite() ? f.norm() : std::numeric_limits<double>::infinity();
}

StructureParams with_gamma(StructureParams p, int index, double gamma) {
  p.gammas.at(static_cast<std::size_t>(index)) = gamma;
  return p;
}

Eigen::VectorXd criteria_vector(const StructureParams& p, double kappa, double omega) {
  const auto [r1, r2] = criterion_residuals_N2(p, kappa, omega);
  Eigen::VectorXd v(4);
  v << r1.real(), r1.imag(), r2.real(), r2.imag();
  return v;
}

// Wraps evaluations that may leave region I so Newton sees a non-finite value.
Eigen::VectorXd guarded(const std::function<Eigen::VectorXd()>& eval, Eigen::Index size) {
  try {
    return eval();
  } catch (const Error&) {
    return Eigen::VectorXd::Constant(size, std::numeric_limits<double>::quiet_NaN());
  }
}

}  // namespace

std::vector<PeakDipPoint> peak_dip_curves(const StructureParams& p, const DispersionFit& disp,
                                          const std::vector<double>& kappa_tilde,
                                          const PeakDipOptions& opts, unsigned threads) {
  p.validate();
  std::vector<PeakDipPoint> out(kappa_tilde.size());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const double kt = kappa_tilde[i];
    PeakDipPoint& row = out[i];
    row.kappa_tilde = kt;
    row.kappa = disp.kappa0 + kt;
    if (kt == 0.0) {
      // Removable point: both curves pass through the mode.
      row.omega_a = row.omega_b = disp.omega0;
      row.T_at_a = row.T_at_b = kNaN;
      return;
    }
    const double center = disp.omega0 - disp.ell1 * kt - disp.ell2.real() * kt * kt;
    double half = std::max(opts.bracket_factor * std::abs(disp.ell2) * kt * kt, opts.min_half_width);
    auto refl = [&](double w) { return amplitudes(p, row.kappa, w, opts.solve).refl; };
    auto trans = [&](double w) { return amplitudes(p, row.kappa, w, opts.solve).trans; };
    for (int attempt = 0; attempt <= opts.doublings; ++attempt, half *= 2.0) {
      const auto grid = linspace(center - half, center + half, static_cast<std::size_t>(opts.grid));
      std::vector<double> ar(grid.size()), at(grid.size());
      for (std::size_t g = 0; g < grid.size(); ++g) {
        try {
          const auto amp = amplitudes(p, row.kappa, grid[g], opts.solve);
          ar[g] = std::abs(amp.refl);
          at[g] = std::abs(amp.trans);
        } catch (const Error&) {
          ar[g] = at[g] = std::numeric_limits<double>::infinity();
        }
      }
      const auto ia = static_cast<std::size_t>(std::min_element(ar.begin(), ar.end()) - ar.begin());
      const auto ib = static_cast<std::size_t>(std::min_element(at.begin(), at.end()) - at.begin());
      const std::size_t last = grid.size() - 1;
      if (ia == 0 || ia == last || ib == 0 || ib == last) continue;
      row.omega_a = real_root(refl, grid[ia - 1], grid[ia + 1], opts.newton_iterations);
      row.omega_b = real_root(trans, grid[ib - 1], grid[ib + 1], opts.newton_iterations);
      row.T_at_a = amplitudes(p, row.kappa, row.omega_a, opts.solve).T;
      row.T_at_b = amplitudes(p, row.kappa, row.omega_b, opts.solve).T;
      return;
    }
    throw Error(ErrorCode::no_root, "peak_dip_curves: root not bracketed at kappa_tilde " +
                                        std::to_string(kt));
  });
  return out;
}

AnomalyFit fit_anomaly(const StructureParams& p, const DispersionFit& disp,
                       const std::vector<PeakDipPoint>& curves, const AnomalyOptions& opts) {
  AnomalyFit fit;
  fit.kappa0 = disp.kappa0;
  fit.omega0 = disp.omega0;
  fit.ell1 = disp.ell1;
  fit.ell2 = disp.ell2;

  std::vector<double> x, ya, yb;
  for (const auto& c : curves) {
    if (c.kappa_tilde == 0.0) continue;
    x.push_back(c.kappa_tilde);
    ya.push_back(c.omega_a - disp.omega0);
    yb.push_back(c.omega_b - disp.omega0);
  }
  if (x.size() < 4) throw Error(ErrorCode::fit_failed, "fit_anomaly: need at least 4 curve samples");
  const std::vector<int> powers = x.size() >= 8   ? std::vector<int>{0, 1, 2, 3, 4}
                                  : x.size() >= 6 ? std::vector<int>{0, 1, 2, 3}
                                                  : std::vector<int>{0, 1, 2};
  const auto ca = polyfit(x, ya, powers);
  const auto cb = polyfit(x, yb, powers);
  fit.omega0_peak = disp.omega0 + ca[0];
  fit.omega0_dip = disp.omega0 + cb[0];
  fit.ell1_peak = -ca[1];
  fit.ell1_dip = -cb[1];
  fit.r2 = -ca[2];
  fit.t2 = -cb[2];
  for (std::size_t i = 0; i < x.size(); ++i) {
    double ma = 0.0, mb = 0.0;
    for (std::size_t j = 0; j < powers.size(); ++j) {
      ma += ca[j] * std::pow(x[i], powers[j]);
      mb += cb[j] * std::pow(x[i], powers[j]);
    }
    fit.curve_fit_residual =
        std::max({fit.curve_fit_residual, std::abs(ma - ya[i]), std::abs(mb - yb[i])});
  }

  // Background at kappa0, where the resonant factors cancel exactly.
  std::vector<double> w, T, R, ratio;
  for (int k = -opts.background_half; k <= opts.background_half; ++k) {
    if (k == 0) continue;
    const double wt = k * opts.background_step;
    const auto amp = amplitudes(p, disp.kappa0, disp.omega0 + wt, opts.solve);
    w.push_back(wt);
    T.push_back(amp.T);
    R.push_back(amp.R);
    ratio.push_back(amp.T / amp.R);
  }
  const std::vector<int> bg = {0, 1, 2, 3};
  const auto cT = polyfit(w, T, bg);
  const auto cR = polyfit(w, R, bg);
  const auto cQ = polyfit(w, ratio, bg);
  fit.t0 = cT[0];
  fit.r0 = cR[0];
  fit.zeta1 = cT[1] / cT[0];
  fit.eta = cQ[1] / cQ[0];
  fit.unitarity = std::abs(fit.r0 * fit.r0 + fit.t0 * fit.t0 - 1.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    double mT = 0.0;
    for (std::size_t j = 0; j < bg.size(); ++j) mT += cT[j] * std::pow(w[i], bg[j]);
    fit.background_fit_residual = std::max(fit.background_fit_residual, std::abs(mT - T[i]));
  }
  if (!(fit.t0 > 0.0 && fit.t0 < 1.0 && fit.r0 > 0.0 && fit.r0 < 1.0)) {
    throw Error(ErrorCode::fit_failed, "fit_anomaly: background amplitudes outside (0, 1)");
  }
  return fit;
}

double approx_transmission(const AnomalyFit& f, double kt, double w) {
  const double lin = w + f.ell1 * kt;
  const double num = std::abs(lin + f.t2 * kt * kt);
  const double den = std::abs(lin + f.ell2 * kt * kt);
  if (den == 0.0) return f.t0;
  return f.t0 * num / den * std::abs(1.0 + f.zeta1 * w);
}

double approx_transmission_two_sided(const AnomalyFit& f, double kt, double w) {
  const double lin = w + f.ell1 * kt;
  const double na = std::abs(lin + f.r2 * kt * kt);
  const double nb = std::abs(lin + f.t2 * kt * kt) * std::abs(1.0 + f.eta * w);
  const double top = f.t0 * f.t0 * nb * nb;
  const double bottom = f.r0 * f.r0 * na * na + top;
  if (bottom == 0.0) return f.t0;
  return std::sqrt(top / bottom);
}

ApproxError approximation_error(const StructureParams& p, const AnomalyFit& fit, double K,
                                ApproxVariant variant, int samples, unsigned threads,
                                const SolveOptions& solve) {
  if (!(K > 0.0) || samples < 2) {
    throw Error(ErrorCode::invalid_argument, "approximation_error: need K > 0 and samples >= 2");
  }
  const auto kts = linspace(-K, K, static_cast<std::size_t>(samples));
  const auto ss = linspace(-1.0, 1.0, static_cast<std::size_t>(samples));
  const double spread = 4.0 * std::abs(fit.ell2) * K * K;
  std::vector<double> err(kts.size() * ss.size(), 0.0), approx(err.size(), 0.0);
  std::vector<double> wt(err.size(), 0.0);
  parallel_for(err.size(), threads, [&](std::size_t idx) {
    const double kt = kts[idx / ss.size()];
    const double w = -fit.ell1 * kt - fit.ell2.real() * kt * kt + ss[idx % ss.size()] * spread;
    wt[idx] = w;
    const double a = variant == ApproxVariant::one_sided
                         ? approx_transmission(fit, kt, w)
                         : approx_transmission_two_sided(fit, kt, w);
    approx[idx] = a;
    try {
      const double T = amplitudes(p, fit.kappa0 + kt, fit.omega0 + w, solve).T;
      err[idx] = std::abs(a - T);
    } catch (const Error&) {
      err[idx] = 0.0;  // the mode itself; the formula holds by continuity there
    }
  });
  ApproxError out;
  const auto it = std::max_element(err.begin(), err.end());
  const auto at = static_cast<std::size_t>(it - err.begin());
  out.sup_error = *it;
  out.kappa_at_sup = kts[at / ss.size()];
  out.omega_at_sup = wt[at];
  out.max_approx = *std::max_element(approx.begin(), approx.end());
  return out;
}

std::vector<EnhancementRow> enhancement_scan(const StructureParams& p, const DispersionFit& disp,
                                             const std::vector<double>& kappa_tilde,
                                             unsigned threads, const SolveOptions& solve) {
  for (double kt : kappa_tilde) {
    if (kt == 0.0) throw Error(ErrorCode::invalid_argument, "enhancement_scan: kappa_tilde = 0");
  }
  std::vector<EnhancementRow> rows(kappa_tilde.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    const double kt = kappa_tilde[i];
    const double w = disp.omega0 - disp.ell1 * kt - disp.ell2.real() * kt * kt;
    const auto sol = solve_unit_left(p, BlochPoint::real(disp.kappa0 + kt, w), solve);
    rows[i] = {kt, w, sol.c.norm(), sol.near_singular};
  });
  return rows;
}

EnhancementFit fit_enhancement(const std::vector<EnhancementRow>& rows) {
  std::vector<double> k, a, inv;
  for (const auto& r : rows) {
    if (r.near_singular) continue;
    k.push_back(std::abs(r.kappa_tilde));
    a.push_back(r.amplitude);
    inv.push_back(1.0 / std::abs(r.kappa_tilde));
  }
  if (k.size() < 2) throw Error(ErrorCode::fit_failed, "fit_enhancement: need 2 resolved rows");
  EnhancementFit f;
  f.rows_used = k.size();
  f.slope = loglog_slope(k, a);
  const auto c = polyfit(inv, a, {0, 1});
  f.d2 = c[0];
  f.d1 = c[1];
  return f;
}

BifurcationPoint find_bifurcation(const StructureParams& p, double gamma_min, double gamma_max,
                                  const BifurcationOptions& opts) {
  p.validate();
  if (p.N != 2) throw Error(ErrorCode::invalid_argument, "find_bifurcation: N must be 2");
  if (!(gamma_min < gamma_max)) {
    throw Error(ErrorCode::invalid_argument, "find_bifurcation: empty gamma bracket");
  }
  // At kappa = 0 both criteria are real for real couplings.
  const RealSystem F = [&](const Eigen::VectorXd& x) {
    return guarded(
        [&] {
          const auto [r1, r2] = criterion_residuals_N2(with_gamma(p, opts.gamma_index, x(1)), 0.0, x(0));
          Eigen::VectorXd v(2);
          v << r1.real(), r2.real();
          return v;
        },
        2);
  };
  const double mid = 0.5 * (gamma_min + gamma_max);
  std::vector<BifurcationPoint> roots;
  for (double w0 : linspace(0.0, 4.0, static_cast<std::size_t>(opts.omega_seeds + 2))) {
    if (w0 <= 0.0 || w0 >= 4.0) continue;
    Eigen::VectorXd x(2);
    x << w0, mid;
    const double res = gauss_newton(F, x, opts.newton_iterations);
    if (!(res < 1e-11) || x(1) < gamma_min || x(1) > gamma_max || !in_region_one(0.0, x(0))) {
      continue;
    }
    const bool seen = std::any_of(roots.begin(), roots.end(), [&](const auto& r) {
      return std::abs(r.omega_star - x(0)) < 1e-8 && std::abs(r.gamma_star - x(1)) < 1e-8;
    });
    if (!seen) roots.push_back({x(1), x(0), res, 0.0});
  }
  if (roots.empty()) throw Error(ErrorCode::no_root, "find_bifurcation: no root in gamma bracket");
  auto best = *std::min_element(roots.begin(), roots.end(), [&](const auto& a, const auto& b) {
    return std::abs(a.gamma_star - mid) < std::abs(b.gamma_star - mid);
  });

  // Jacobian of (Re ell, Im ell) in (omega, gamma) along the tracked eigenvalue.
  const auto pstar = with_gamma(p, opts.gamma_index, best.gamma_star);
  const auto ref =
      sigma_min_vector(pstar, BlochPoint::real(0.0, best.omega_star), opts.model).second;
  auto ell = [&](double w, double g) {
    return eigenvalue_ell(with_gamma(p, opts.gamma_index, g), BlochPoint::real(0.0, w), ref, 0.7,
                          opts.model)
        .value;
  };
  const double h = 1e-5;
  const cplx dw = (ell(best.omega_star + h, best.gamma_star) -
                   ell(best.omega_star - h, best.gamma_star)) / (2 * h);
  const cplx dg = (ell(best.omega_star, best.gamma_star + h) -
                   ell(best.omega_star, best.gamma_star - h)) / (2 * h);
  best.determinant = (dw.real() * dg.imag() - dg.real() * dw.imag()) / (std::abs(dw) * std::abs(dg));
  return best;
}

namespace {

// Solves the four real criterion components for (kappa, omega) at fixed gamma.
bool solve_mode(const StructureParams& pg, double& kappa, double& omega, int iterations,
                double& residual) {
  const RealSystem F = [&](const Eigen::VectorXd& x) {
    return guarded([&] { return criteria_vector(pg, x(0), x(1)); }, 4);
  };
  Eigen::VectorXd x(2);
  x << kappa, omega;
  residual = gauss_newton(F, x, iterations);
  kappa = x(0);
  omega = x(1);
  return residual < 1e-10;
}

}  // namespace

BifurcationBranch trace_branch(const StructureParams& p, const BifurcationPoint& point,
                               const std::vector<double>& gammas, const BifurcationOptions& opts) {
  BifurcationBranch br;
  br.gamma_star = point.gamma_star;
  br.omega_star = point.omega_star;

  // g''(0): solve for (omega, gamma) at a small fixed kappa.
  const double ks = 1e-3;
  const RealSystem G = [&](const Eigen::VectorXd& x) {
    return guarded([&] { return criteria_vector(with_gamma(p, opts.gamma_index, x(1)), ks, x(0)); },
                   4);
  };
  Eigen::VectorXd x(2);
  x << point.omega_star, point.gamma_star;
  if (!(gauss_newton(G, x, opts.newton_iterations) < 1e-10)) {
    throw Error(ErrorCode::continuation_failure, "trace_branch: curvature probe did not converge");
  }
  br.g_curvature = 2.0 * (x(1) - point.gamma_star) / (ks * ks);
  br.g_curvature_sign = br.g_curvature > 0.0 ? 1 : (br.g_curvature < 0.0 ? -1 : 0);
  if (br.g_curvature_sign == 0) {
    throw Error(ErrorCode::continuation_failure, "trace_branch: degenerate curvature");
  }

  std::vector<std::size_t> order(gammas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return std::abs(gammas[a] - point.gamma_star) < std::abs(gammas[b] - point.gamma_star);
  });
  br.samples.resize(gammas.size());
  double prev_omega = point.omega_star;
  for (std::size_t i : order) {
    const double g = gammas[i];
    const double side = (g - point.gamma_star) / br.g_curvature;
    if (!(side > 0.0)) {
      throw Error(ErrorCode::invalid_argument,
                  "trace_branch: gamma " + std::to_string(g) + " is not on the mode side");
    }
    const auto pg = with_gamma(p, opts.gamma_index, g);
    double kappa = std::sqrt(2.0 * side), omega = prev_omega, res = 0.0;
    if (!solve_mode(pg, kappa, omega, opts.newton_iterations, res) || kappa <= 0.0) {
      throw Error(ErrorCode::continuation_failure,
                  "trace_branch: no mode at gamma " + std::to_string(g));
    }
    const auto mirror = criteria_vector(pg, -kappa, omega);
    br.samples[i] = {g, kappa, omega, sigma_min(pg, BlochPoint::real(kappa, omega), opts.model),
                     mirror.norm()};
    prev_omega = omega;
  }
  if (br.samples.size() >= 2) {
    std::vector<double> dg, k;
    for (const auto& s : br.samples) {
      dg.push_back(std::abs(point.gamma_star - s.gamma0));
      k.push_back(s.kappa0);
    }
    br.sqrt_slope = loglog_slope(dg, k);
  }
  return br;
}

ThreeVariableFit three_variable_fit(const StructureParams& p, const BifurcationBranch& branch,
                                    double radius, const BifurcationOptions& opts) {
  if (branch.samples.size() < 2) {
    throw Error(ErrorCode::fit_failed, "three_variable_fit: need at least 2 branch samples");
  }
  std::vector<double> k0, l1, r1, t1, r2, t2;
  std::vector<cplx> l2;
  double kmin = std::numeric_limits<double>::infinity();
  ThreeVariableFit out;
  for (const auto& s : branch.samples) {
    const auto pg = with_gamma(p, opts.gamma_index, s.gamma0);
    GuidedMode mode;
    mode.kappa = s.kappa0;
    mode.omega = s.omega0;
    mode.null_vector = sigma_min_vector(pg, BlochPoint::real(s.kappa0, s.omega0), opts.model).second;
    // Stay well inside the gap to the mirror mode at -kappa0.
    const double rad = std::min(radius, 0.25 * s.kappa0);
    const auto disp = continue_and_fit_dispersion(pg, mode, symmetric_samples(rad, 6));
    std::vector<double> kts;
    for (double kt : symmetric_samples(rad, 4)) {
      if (kt != 0.0) kts.push_back(kt);
    }
    const auto curves = peak_dip_curves(pg, disp, kts);
    const auto fit = fit_anomaly(pg, disp, curves);
    k0.push_back(s.kappa0);
    l1.push_back(disp.ell1);
    l2.push_back(disp.ell2);
    r1.push_back(fit.ell1_peak);
    t1.push_back(fit.ell1_dip);
    r2.push_back(fit.r2);
    t2.push_back(fit.t2);
    if (s.kappa0 < kmin) {
      kmin = s.kappa0;
      out.rho0 = fit.r0;
      out.tau0 = fit.t0;
    }
  }
  out.ell11 = polyfit(k0, l1, {1})[0];
  out.r11 = polyfit(k0, r1, {1})[0];
  out.t11 = polyfit(k0, t1, {1})[0];
  out.ell02 = polyfit(k0, l2, {0, 1})[0];
  out.r02 = polyfit(k0, r2, {0, 1})[0];
  out.t02 = polyfit(k0, t2, {0, 1})[0];
  out.unitarity = std::abs(out.rho0 * out.rho0 + out.tau0 * out.tau0 - 1.0);
  return out;
}

}  // namespace latres
