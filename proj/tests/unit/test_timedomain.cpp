#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "latres/timedomain.hpp"

using namespace latres;
using namespace latres::testing;

namespace {

double total_waveguide(const EvolveResult& r) {
  double best = 0.0;
  for (double e : r.waveguide_energy) best = std::max(best, e);
  return best;
}

}  // namespace

TEST_CASE("decoupled plane wave is an eigenvector of Omega in the interior") {
  const auto p = decoupled();
  const double kappa = 0.2, theta = 0.13;
  const int l = 1;
  const cplx phi = (kappa + l) / double(p.N);
  auto s = LatticeState::zeros(p.N, 10, kappa);
  for (long m = -10; m <= 10; ++m)
    for (long n = 0; n < p.N; ++n) s.at(m, n) = phase(theta * double(m) + phi * double(n));
  const auto Os = apply_omega(p, s);
  const cplx omega = ambient_dispersion(theta, phi);
  for (long m = -9; m <= 9; ++m)
    for (long n = 0; n < p.N; ++n) CHECK(std::abs(Os.at(m, n) - omega * s.at(m, n)) < 1e-12);
  CHECK(Os.z.norm() == 0.0);
}

TEST_CASE("property: Omega is Hermitian") {
  Rng rng(701);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_structure(rng);
    const double kappa = uniform(rng, -0.5, 0.5);
    const auto a = random_localized(p.N, 8, kappa, 5, rng());
    const auto b = random_localized(p.N, 8, kappa, 5, rng());
    CHECK(std::abs(inner(apply_omega(p, a), b) - inner(a, apply_omega(p, b))) < 1e-12);
  }
}

TEST_CASE("property: coupling and its adjoint") {
  // <Gamma u, z> = <u, Gamma^dagger z> read off the off-diagonal blocks of Omega.
  Rng rng(702);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_structure(rng);
    const double kappa = uniform(rng, -0.5, 0.5);
    auto u_only = random_localized(p.N, 6, kappa, 4, rng());
    u_only.z.setZero();
    auto z_only = LatticeState::zeros(p.N, 6, kappa);
    for (long n = 0; n < p.N; ++n) z_only.z(n) = gaussian_c(rng);
    const auto Ou = apply_omega(p, u_only);
    const auto Oz = apply_omega(p, z_only);
    CHECK(std::abs(Ou.z.dot(z_only.z) - inner(u_only, Oz)) < 1e-14 * std::max(1.0, Ou.z.norm()));
  }
}

TEST_CASE("RK4 conserves the norm of a random localized state") {
  const auto p = fixture_one();
  const double bound = omega_norm_bound(p);
  const double dt = 0.02 / bound;
  const long steps = 1000;
  const long Mx = 12 + light_cone_margin(bound, dt * double(steps));
  const auto r = evolve(p, random_localized(p.N, Mx, 0.137, 6, 7), dt, steps);
  CHECK(r.drift < 1e-8);
  CHECK(r.t.size() == static_cast<std::size_t>(steps + 1));
}

TEST_CASE("antisymmetric data never excites the waveguide") {
  const auto p = fixture_one();
  const double dt = 0.02 / omega_norm_bound(p);
  const auto r = evolve(p, antisymmetric_pulse(p.N, 60, 0.1, 2.5), dt, 1000);
  CHECK(r.max_z <= 1e-12);
}

TEST_CASE("symmetric data excites the waveguide") {
  const auto p = fixture_one();
  const double dt = 0.02 / omega_norm_bound(p);
  const auto r = evolve(p, symmetric_pulse(p.N, 60, 0.1, 2.5), dt, 1000);
  CHECK(total_waveguide(r) > 1e-6);
}

TEST_CASE("property: antisymmetrization commutes with evolution") {
  Rng rng(703);
  for (int t = 0; t < 10; ++t) {
    const auto p = random_structure(rng);
    const double dt = 0.05 / omega_norm_bound(p);
    auto s = random_localized(p.N, 40, uniform(rng, -0.5, 0.5), 5, rng());
    s.z.setZero();
    const auto a = antisymmetrize(evolve(p, s, dt, 200).state);
    const auto b = evolve(p, antisymmetrize(s), dt, 200).state;
    CHECK((a.u - b.u).norm() < 1e-10);
    CHECK((a.z - b.z).norm() < 1e-10);
  }
}

TEST_CASE("evolve enforces the step-size contract") {
  const auto p = fixture_one();
  const auto s = symmetric_pulse(p.N, 10, 0.0, 2.0);
  const double bound = omega_norm_bound(p);
  CHECK_THROWS_AS(evolve(p, s, 0.5 / bound, 10), Error);
  CHECK_THROWS_AS(evolve(p, s, -1.0, 10), Error);
  CHECK_NOTHROW(evolve(p, s, 0.1 / bound, 10));
}

TEST_CASE("norm bound dominates the Rayleigh quotient") {
  Rng rng(704);
  for (int t = 0; t < 20; ++t) {
    const auto p = random_structure(rng);
    const auto s = random_localized(p.N, 8, 0.3, 5, rng());
    const double rq = std::abs(inner(s, apply_omega(p, s))) / norm2(s);
    CHECK(rq <= omega_norm_bound(p) + 1e-12);
  }
}

TEST_CASE("light-cone margin") {
  const long d = light_cone_margin(4.0, 2.0);
  double term = 1.0;
  for (long k = 1; k <= d; ++k) term *= 8.0 / double(k);
  CHECK(term < 1e-10);
  CHECK(light_cone_margin(4.0, 2.0, 1e-3) < d);
}

TEST_CASE("pulses are normalized and shaped") {
  const auto s = symmetric_pulse(2, 20, 0.1, 3.0);
  const auto a = antisymmetric_pulse(2, 20, 0.1, 3.0);
  CHECK(std::abs(norm2(s) - 1.0) < 1e-12);
  CHECK(std::abs(norm2(a) - 1.0) < 1e-12);
  for (long m = 0; m <= 20; ++m)
    for (long n = 0; n < 2; ++n) {
      CHECK(std::abs(s.at(m, n) - s.at(-m, n)) < 1e-15);
      CHECK(std::abs(a.at(m, n) + a.at(-m, n)) < 1e-15);
    }
  CHECK(waveguide_energy(s) == 0.0);
}
