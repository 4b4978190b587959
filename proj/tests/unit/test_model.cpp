#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "generators.hpp"
#include "latres/model.hpp"

using namespace latres;
using namespace latres::testing;

namespace {

// Eigenvalues of the mass-normalized ring of P periods. Its spectrum is the
// union of the Floquet bands at kappa = q / P, q = 0 .. P-1.
std::vector<double> ring_spectrum(const StructureParams& p, int P) {
  const int L = p.N * P;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(L, L);
  for (int i = 0; i < L; ++i) {
    const int j = (i + 1) % L;
    const double k = p.spring(i);
    K(i, i) += k;
    K(j, j) += k;
    K(i, j) -= k;
    K(j, i) -= k;
  }
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) K(i, j) /= std::sqrt(p.mass(i) * p.mass(j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + L);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("ambient dispersion at trivial points") {
  CHECK(std::abs(ambient_dispersion(0.0, 0.0)) < 1e-15);
  CHECK(std::abs(ambient_dispersion(0.5, 0.5) - 8.0) < 1e-15);
  CHECK(std::abs(ambient_dispersion(1.0 / 6.0, 0.25) - 3.0) < 1e-14);
}

TEST_CASE("classify harmonics: N=2, kappa=0, omega=1") {
  const auto hs = classify_harmonics(fixture_one(), BlochPoint::real(0.0, 1.0));
  REQUIRE(hs.harmonics.size() == 2);
  CHECK(hs.harmonics[0].cls == HarmonicClass::propagating);
  CHECK(std::abs(hs.harmonics[0].theta - 1.0 / 6.0) < 1e-15);
  CHECK(hs.harmonics[1].cls == HarmonicClass::evanescent);
  // cosh(2 pi tau) = 2.5 solved by bisection, independent of acosh.
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::cosh(kTwoPi * mid) < 2.5 ? lo : hi) = mid;
  }
  CHECK(std::abs(hs.harmonics[1].theta - cplx(0.0, lo)) < 1e-14);
  CHECK(std::abs(hs.harmonics[1].theta.imag() - 0.2494) < 1e-4);
  CHECK(hs.propagating == std::vector<int>{0});
}

TEST_CASE("classify harmonics: N=2, kappa=1/2, omega=1 has no propagating order") {
  const auto hs = classify_harmonics(fixture_one(), BlochPoint::real(0.5, 1.0));
  CHECK(hs.propagating.empty());
  for (const auto& h : hs.harmonics) CHECK(std::abs(h.chi - 1.5) < 1e-14);
}

TEST_CASE("classify harmonics flags linear thresholds") {
  // chi_0 = 1 at kappa = 0, omega = 0.
  const auto hs = classify_harmonics(fixture_one(), BlochPoint::real(0.0, 0.0));
  CHECK(hs.has_threshold);
  CHECK(hs.harmonics[0].cls == HarmonicClass::linear_threshold);
  CHECK_THROWS_AS(require_off_threshold(hs), Error);
}

TEST_CASE("classify rejects invalid input") {
  auto p = fixture_one();
  CHECK_THROWS_AS(classify_harmonics(p, BlochPoint{cplx(0.1, 0.1), 1.0, true}), Error);
  CHECK_THROWS_AS(classify_harmonics(p, BlochPoint::complex(0.1, cplx(1.0, 2.0))), Error);
  p.masses[0] = -1.0;
  CHECK_THROWS_AS(classify_harmonics(p, BlochPoint::real(0.1, 1.0)), Error);
}

TEST_CASE("property: every harmonic satisfies the ambient dispersion relation") {
  Rng rng(101);
  for (int t = 0; t < 500; ++t) {
    const auto p = random_structure(rng);
    const auto pt = BlochPoint::real(uniform(rng, -0.5, 0.5), uniform(rng, 0.0, 8.0));
    const auto hs = classify_harmonics(p, pt);
    for (const auto& h : hs.harmonics) {
      if (h.cls == HarmonicClass::linear_threshold) continue;
      CHECK(std::abs(ambient_dispersion(h.theta, h.phi) - pt.omega) < 1e-10);
      if (h.cls == HarmonicClass::propagating) {
        CHECK(h.theta.real() > 0.0);
        CHECK(h.theta.real() < 0.5);
        CHECK(h.theta.imag() == 0.0);
      } else {
        CHECK(h.theta.imag() > 0.0);  // decays away from the waveguide
      }
    }
  }
}

TEST_CASE("property: theta multiset is symmetric under kappa -> -kappa") {
  Rng rng(102);
  for (int t = 0; t < 300; ++t) {
    const auto p = random_structure(rng);
    const double k = uniform(rng, -0.5, 0.5), w = uniform(rng, 0.0, 8.0);
    auto sorted = [](const HarmonicSet& hs) {
      std::vector<std::pair<double, double>> v;
      for (const auto& h : hs.harmonics) v.emplace_back(h.theta.real(), h.theta.imag());
      std::sort(v.begin(), v.end());
      return v;
    };
    const auto a = sorted(classify_harmonics(p, BlochPoint::real(k, w)));
    const auto b = sorted(classify_harmonics(p, BlochPoint::real(-k, w)));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::abs(a[i].first - b[i].first) < 1e-12);
      CHECK(std::abs(a[i].second - b[i].second) < 1e-12);
    }
  }
}

TEST_CASE("waveguide bands of the uniform chain") {
  const auto p = StructureParams::uniform(2, 1.0, 1.0, 1.0);
  const auto b0 = waveguide_bands(p, 0.0);
  CHECK(std::abs(b0[0]) < 1e-14);
  CHECK(std::abs(b0[1] - 4.0) < 1e-14);
  const auto bh = waveguide_bands(p, 0.5);
  CHECK(std::abs(bh[0] - 2.0) < 1e-14);
  CHECK(std::abs(bh[1] - 2.0) < 1e-14);
}

TEST_CASE("waveguide bands of fixture one match the characteristic polynomial") {
  const auto p = fixture_one();
  for (double k : {0.0, 0.1, 0.37, 0.5}) {
    const double a = 2.0 / 2.0, c = 2.0 / 1.0;
    const double b2 = (1.0 + 1.0 + 2.0 * std::cos(kTwoPi * k)) / 2.0;
    const double mid = 0.5 * (a + c), rad = std::sqrt(0.25 * (a - c) * (a - c) + b2);
    const auto bands = waveguide_bands(p, k);
    CHECK(std::abs(bands[0] - (mid - rad)) < 1e-13);
    CHECK(std::abs(bands[1] - (mid + rad)) < 1e-13);
    CHECK(bands[0] > -1e-14);
    CHECK(bands[1] < 8.0);
  }
}

TEST_CASE("property: Floquet bands reproduce the ring spectrum") {
  Rng rng(103);
  const int P = 5;
  for (int t = 0; t < 40; ++t) {
    const auto p = random_structure(rng, 2, 4);
    std::vector<double> bands;
    for (int q = 0; q < P; ++q) {
      const auto b = waveguide_bands(p, double(q) / P);
      bands.insert(bands.end(), b.begin(), b.end());
      CHECK(std::is_sorted(b.begin(), b.end()));
      CHECK(floquet_matrix(p, double(q) / P).isApprox(floquet_matrix(p, double(q) / P).adjoint()));
    }
    std::sort(bands.begin(), bands.end());
    const auto ring = ring_spectrum(p, P);
    REQUIRE(ring.size() == bands.size());
    for (std::size_t i = 0; i < ring.size(); ++i) CHECK(std::abs(ring[i] - bands[i]) < 1e-11);
    double cap = 0.0;
    for (int j = 0; j < p.N; ++j)
      cap = std::max(cap, 2.0 * (p.spring(j) + p.spring(j - 1)) / p.mass(j));
    CHECK(bands.back() <= cap + 1e-12);
    CHECK(bands.front() >= -1e-12);
  }
}

TEST_CASE("region diagram counts") {
  const auto p = fixture_one();
  const auto d = region_diagram(p, {0.0, 0.5}, {1.0});
  CHECK(d.at(0, 0) == 1);
  CHECK(d.at(1, 0) == 0);
  std::ostringstream os;
  write_region_csv(os, d);
  CHECK(os.str().rfind("kappa,omega,num_propagating\n", 0) == 0);
}

TEST_CASE("property: region counts change only across threshold curves") {
  Rng rng(104);
  for (int t = 0; t < 400; ++t) {
    const int N = std::uniform_int_distribution<int>(1, 4)(rng);
    const auto p = StructureParams::uniform(N, 1.0, 1.0, 0.5);
    const double k = uniform(rng, -0.5, 0.5), w = uniform(rng, 0.0, 8.0);
    int expected = 0;
    bool near = false;
    for (int l = 0; l < N; ++l) {
      const auto [lo, hi] = threshold_curves(N, l, k);
      expected += (w > lo && w < hi) ? 1 : 0;
      near = near || std::abs(w - lo) < 1e-8 || std::abs(w - hi) < 1e-8;
    }
    if (near) continue;
    CHECK(region_diagram(p, {k}, {w}).at(0, 0) == expected);
  }
}

TEST_CASE("region II transition just above the lower threshold of order 1") {
  // For N = 2 the order-1 lower threshold is 2 + 2 cos(pi kappa).
  const auto p = fixture_one();
  for (double k : {-0.4, -0.1, 0.2, 0.45}) {
    const double edge = 2.0 + 2.0 * std::cos(kPi * k);
    const auto below = classify_harmonics(p, BlochPoint::real(k, edge - 1e-6));
    const auto above = classify_harmonics(p, BlochPoint::real(k, edge + 1e-6));
    CHECK(above.propagating.size() == below.propagating.size() + 1);
    CHECK(above.is_propagating(1));
  }
}
