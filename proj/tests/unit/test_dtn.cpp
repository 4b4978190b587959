#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "latres/dtn.hpp"
#include "latres/guided_modes.hpp"
#include "latres/numerics.hpp"

using namespace latres;
using namespace latres::testing;

namespace {

CVector harmonic_trace(const Harmonic& h, long m, int N) {
  CVector v(N);
  for (int n = 0; n < N; ++n) v(n) = phase(h.theta * double(m) + h.phi * double(n));
  return v;
}

}  // namespace

TEST_CASE("DtN multiplies each outgoing harmonic by 1 - e^{2 pi i theta}") {
  Rng rng(601);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_structure(rng);
    const auto pt = random_scatter_point(p, rng);
    const auto hs = classify_harmonics(p, pt);
    for (const auto& h : hs.harmonics) {
      const auto v = harmonic_trace(h, 0, p.N);
      CHECK((dtn_apply(hs, v) - (1.0 - phase(h.theta)) * v).norm() < 1e-12);
      // Outgoing wave at m = M, M + 1: normal difference plus DtN vanishes.
      const long M = std::uniform_int_distribution<long>(2, 12)(rng);
      const auto uM = harmonic_trace(h, M, p.N);
      const auto uM1 = harmonic_trace(h, M + 1, p.N);
      CHECK(((uM1 - uM) + dtn_apply(hs, uM)).norm() < 1e-12 * std::max(1.0, uM.norm()));
    }
    CHECK(dtn_apply(hs, CVector::Zero(p.N)).norm() == 0.0);
  }
}

TEST_CASE("DtN rejects a trace of the wrong length") {
  const auto hs = classify_harmonics(fixture_one(), BlochPoint::real(0.1, 1.0));
  CHECK_THROWS_AS(dtn_apply(hs, CVector::Zero(3)), Error);
}

TEST_CASE("decay rule") {
  const auto hs = classify_harmonics(fixture_one(), BlochPoint::real(0.1, 1.0));
  const long M = default_truncation(hs);
  const double tau = hs.harmonics[1].theta.imag();
  CHECK(std::exp(-kTwoPi * tau * M) < 1e-10);
  CHECK(std::exp(-kTwoPi * tau * (M - 1)) >= 1e-10);
}

TEST_CASE("decoupled structure: truncated solution is the incident plane wave") {
  Rng rng(602);
  const auto p = decoupled();
  for (int t = 0; t < 20; ++t) {
    const auto pt = random_scatter_point(p, rng);
    const auto hs = classify_harmonics(p, pt);
    const auto inc = IncidentField::unit_left(hs);
    const auto& h = hs.harmonics[static_cast<std::size_t>(hs.propagating.front())];
    const auto sol = solve_truncated(p, pt, inc, 8);
    for (long m = -8; m <= 8; ++m)
      for (long n = 0; n < p.N; ++n)
        CHECK(std::abs(sol.u_at(m, n) - phase(h.theta * double(m) + h.phi * double(n))) < 1e-10);
    CHECK(sol.z.norm() < 1e-10);
  }
}

TEST_CASE("fixture one: Fourier and DtN agree at M = 25") {
  const auto p = fixture_one();
  const auto pt = BlochPoint::real(0.1, 1.0);
  const auto inc = IncidentField::unit_left(classify_harmonics(p, pt));
  const auto cv = cross_validate(p, pt, inc, 25);
  CHECK(cv.discrepancy < 1e-8);
  CHECK_FALSE(cv.near_singular);
  CHECK(cross_validate(p, pt, inc, 5).discrepancy < 1e-12);
}

TEST_CASE("DtN truncation is exact: every M sits at the roundoff floor") {
  // The exterior columns are uncoupled, so the per-harmonic DtN map carries
  // no truncation error and the ladder is monotone only up to roundoff.
  const auto p = fixture_one();
  for (double w : {1.0, 3.8}) {
    const auto pt = BlochPoint::real(0.1, w);
    const auto inc = IncidentField::unit_left(classify_harmonics(p, pt));
    double prev = 1.0;
    for (long M : {2L, 4L, 8L, 16L}) {
      const double d = cross_validate(p, pt, inc, M).discrepancy;
      CHECK(d < 1e-12);
      CHECK(d <= std::max(prev, 1e-12));
      prev = d;
    }
  }
}

TEST_CASE("property: Fourier and DtN agree with the decay rule") {
  Rng rng(603);
  for (int t = 0; t < 40; ++t) {
    const auto p = random_structure(rng, 1, 3);
    const auto pt = random_scatter_point(p, rng);
    const auto inc = random_incident(classify_harmonics(p, pt), rng);
    const auto cv = cross_validate(p, pt, inc);
    if (cv.near_singular) continue;
    CHECK(cv.discrepancy < 1e-8);
  }
}

TEST_CASE("property: truncated solutions satisfy the weak form") {
  Rng rng(604);
  for (int t = 0; t < 30; ++t) {
    const auto p = random_structure(rng, 1, 3);
    const auto pt = random_scatter_point(p, rng);
    const auto hs = classify_harmonics(p, pt);
    const auto sol = solve_truncated(p, pt, random_incident(hs, rng), default_truncation(hs));
    const auto vr = variational_residual(sol);
    CHECK(std::max(vr.lattice, vr.waveguide) < 1e-10 * std::max(1.0, vr.scale));
  }
}

TEST_CASE("far field of the truncated solution matches the Fourier coefficients") {
  const auto p = fixture_one();
  const auto pt = BlochPoint::real(0.1, 1.0);
  const auto hs = classify_harmonics(p, pt);
  const auto inc = IncidentField::unit_left(hs);
  const auto four = solve_scattering(p, pt, inc);
  const auto ff = far_field(solve_truncated(p, pt, inc, default_truncation(hs)));
  CHECK(std::abs(ff.T - four.T) < 1e-8);
  CHECK(std::abs(ff.R - four.R) < 1e-8);
  CHECK(std::abs(ff.b_plus(0) - four.b_plus(0)) < 1e-8);
  CHECK(std::abs(ff.a_minus(0) - four.a_minus(0)) < 1e-8);
}

TEST_CASE("guided-mode point: both solvers return the minimum-norm solution") {
  const auto p = fixture_one();
  const auto g = refine_guided_mode(p, 0.0616, 0.9792);
  const auto pt = BlochPoint::real(g.kappa, g.omega);
  const auto inc = IncidentField::unit_left(classify_harmonics(p, pt));
  const auto cv = cross_validate(p, pt, inc);
  CHECK(cv.near_singular);
  CHECK(std::isfinite(cv.discrepancy));
  CHECK(cv.discrepancy < 1e-6);
}
