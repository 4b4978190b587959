#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "latres/discrete_calc.hpp"
#include "latres/dtn.hpp"
#include "latres/structure_io.hpp"
#include "latres/timedomain.hpp"
#include "output.hpp"

namespace latres::cli {

namespace {

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass() const { return value <= tolerance; }  // NaN fails
};

// Random real points with at least one propagating order and no threshold.
std::vector<BlochPoint> random_points(const StructureParams& p, std::mt19937_64& rng, long count) {
  std::uniform_real_distribution<double> k(-0.5, 0.5), w(0.0, 8.0);
  std::vector<BlochPoint> pts;
  while (static_cast<long>(pts.size()) < count) {
    const auto pt = BlochPoint::real(k(rng), w(rng));
    const auto hs = classify_harmonics(p, pt);
    if (hs.has_threshold || hs.propagating.empty()) continue;
    pts.push_back(pt);
  }
  return pts;
}

IncidentField random_incidence(const HarmonicSet& hs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto inc = IncidentField::none(static_cast<int>(hs.harmonics.size()));
  for (int l : hs.propagating) {
    inc.a_inc[static_cast<std::size_t>(l)] = {u(rng), u(rng)};
    inc.b_inc[static_cast<std::size_t>(l)] = {u(rng), u(rng)};
  }
  return inc;
}

Field2D random_field(std::mt19937_64& rng, long m0, long n0, long rows, long cols) {
  std::normal_distribution<double> g;
  Field2D f(m0, n0, rows, cols);
  for (auto& v : f.values) v = {g(rng), g(rng)};
  return f;
}

}  // namespace

int run_validate(const Common& c, long points) {
  const auto p = load_config(c.config);
  std::mt19937_64 rng(c.seed);
  std::vector<Check> checks;

  const auto pts = random_points(p, rng, points);
  std::vector<IncidentField> incs;
  for (const auto& pt : pts) incs.push_back(random_incidence(classify_harmonics(p, pt), rng));

  // Conservation and lattice equations of the Fourier solution.
  std::vector<double> energy(pts.size()), flux(pts.size()), lattice(pts.size());
  parallel_for(pts.size(), c.threads, [&](std::size_t i) {
    const auto sol = solve_scattering(p, pts[i], incs[i]);
    energy[i] = sol.energy_residual / sol.incident_flux;
    const double f0 = column_flux(sol, -3);
    double df = 0.0;
    for (long m = -2; m <= 3; ++m) df = std::max(df, std::abs(column_flux(sol, m) - f0));
    flux[i] = df / sol.incident_flux;
    double lr = 0.0;
    for (long m = -2; m <= 2; ++m)
      for (long n = 0; n < p.N; ++n) lr = std::max(lr, std::abs(lattice_residual(sol, m, n)));
    lattice[i] = lr;
  });
  auto maxof = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::isnan(x) ? x : std::max(m, x);
    return m;
  };
  checks.push_back({"energy_balance", maxof(energy), 1e-12});
  checks.push_back({"column_flux_invariance", maxof(flux), 1e-8});
  checks.push_back({"lattice_equations", maxof(lattice), 1e-10});

  // Fourier against truncated DtN on a subset.
  const std::size_t sub = std::min<std::size_t>(pts.size(), 20);
  std::vector<double> cross(sub), trans(sub), weak(sub);
  parallel_for(sub, c.threads, [&](std::size_t i) {
    cross[i] = cross_validate(p, pts[i], incs[i]).discrepancy;
    const auto hs = classify_harmonics(p, pts[i]);
    const auto inc = IncidentField::unit_left(hs);
    const auto four = solve_scattering(p, pts[i], inc);
    const auto trunc = solve_truncated(p, pts[i], inc, default_truncation(hs));
    trans[i] = std::abs(far_field(trunc).T - four.T);
    const auto vr = variational_residual(trunc);
    weak[i] = std::max(vr.lattice, vr.waveguide) / std::max(1.0, vr.scale);
  });
  checks.push_back({"fourier_vs_dtn_field", maxof(cross), 1e-8});
  checks.push_back({"fourier_vs_dtn_transmission", maxof(trans), 1e-8});
  checks.push_back({"dtn_weak_form", maxof(weak), 1e-10});

  // Discrete calculus identities on random fields.
  double ident = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Rectangle r{-4, 5, -3, 3 + 2 * p.N};
    const auto v = random_field(rng, r.m1 - 1, r.n1 - 1, r.m2 - r.m1 + 3, r.n2 - r.n1 + 3);
    const auto w = random_field(rng, r.m1 - 1, r.n1 - 1, r.m2 - r.m1 + 3, r.n2 - r.n1 + 3);
    const auto rep = identity_residuals(v, w, r, &p);
    ident = std::max(ident, rep.max_residual() / std::max(1.0, rep.scale));
  }
  checks.push_back({"discrete_identities", ident, 1e-12});

  // Time domain: conservation, decoupling and Hermiticity.
  const double bound = omega_norm_bound(p);
  const double dt = 0.02 / bound;
  const long steps = 1000;
  const long Mx = 12 + light_cone_margin(bound, dt * double(steps));
  const double kappa = 0.137;
  const auto r1 = evolve(p, random_localized(p.N, Mx, kappa, 6, c.seed), dt, steps);
  checks.push_back({"rk4_norm_drift", r1.drift, 1e-8});
  const auto r2 = evolve(p, antisymmetric_pulse(p.N, Mx, kappa, 2.5), dt, steps);
  checks.push_back({"antisymmetric_decoupling", r2.max_z, 1e-12});
  const auto s1 = random_localized(p.N, Mx, kappa, 6, c.seed + 1);
  const auto s2 = random_localized(p.N, Mx, kappa, 6, c.seed + 2);
  checks.push_back({"omega_hermitian",
                    std::abs(inner(apply_omega(p, s1), s2) - inner(s1, apply_omega(p, s2))), 1e-12});

  bool ok = true;
  nlohmann::json report = nlohmann::json::array();
  std::printf("%-30s %-12s %-10s %s\n", "check", "value", "tolerance", "result");
  for (const auto& ch : checks) {
    std::printf("%-30s %-12.3e %-10.0e %s\n", ch.name.c_str(), ch.value, ch.tolerance,
                ch.pass() ? "PASS" : "FAIL");
    ok = ok && ch.pass();
    report.push_back({{"check", ch.name},
                      {"value", ch.value},
                      {"tolerance", ch.tolerance},
                      {"pass", ch.pass()}});
  }
  if (c.out != "-" && !c.out.empty()) write_json(c.out, {{"pass", ok}, {"checks", report}});
  return ok ? 0 : 1;
}

}  // namespace latres::cli
