#pragma once

// Seeded generators and shared fixtures for property tests. Every generator
// draws from a caller-owned engine so a failing case is reproducible from the
// seed alone.

#include <cstdint>
#include <random>
#include <vector>

#include "latres/discrete_calc.hpp"
#include "latres/model.hpp"
#include "latres/scattering.hpp"

namespace latres::testing {

using Rng = std::mt19937_64;

inline StructureParams fixture_one() {
  StructureParams p;
  p.N = 2;
  p.masses = {2.0, 1.0};
  p.springs = {1.0, 1.0};
  p.gammas = {1.0, 7.0};
  return p;
}

inline StructureParams nonexistence_fixture() {
  auto p = fixture_one();
  p.gammas = {1.0, 1.0};
  return p;
}

inline StructureParams n3_fixture() {
  StructureParams p;
  p.N = 3;
  p.masses = {1.0, 2.0, 2.0};
  p.springs = {1.0, 1.0, 1.0};
  p.gammas = {1.0, 1.0, 1.0};
  return p;
}

inline StructureParams decoupled(int N = 2) {
  auto p = fixture_one();
  if (N != 2) p = StructureParams::uniform(N, 1.5, 1.0, 0.0);
  for (auto& g : p.gammas) g = 0.0;
  return p;
}

inline double uniform(Rng& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

inline cplx gaussian_c(Rng& rng) {
  std::normal_distribution<double> g;
  return {g(rng), g(rng)};
}

// Positive masses and springs, couplings of either sign, N in [1, 4].
inline StructureParams random_structure(Rng& rng, int min_N = 1, int max_N = 4) {
  StructureParams p;
  p.N = std::uniform_int_distribution<int>(min_N, max_N)(rng);
  for (int j = 0; j < p.N; ++j) {
    p.masses.push_back(uniform(rng, 0.5, 3.0));
    p.springs.push_back(uniform(rng, 0.5, 2.0));
    p.gammas.push_back(uniform(rng, -3.0, 3.0));
  }
  return p;
}

// Real point with at least one propagating order and no order near threshold.
inline BlochPoint random_scatter_point(const StructureParams& p, Rng& rng) {
  for (;;) {
    const auto pt = BlochPoint::real(uniform(rng, -0.5, 0.5), uniform(rng, 0.0, 8.0));
    const auto hs = classify_harmonics(p, pt);
    if (hs.has_threshold || hs.propagating.empty()) continue;
    bool clear = true;
    for (const auto& h : hs.harmonics) clear = clear && std::abs(std::abs(h.chi) - 1.0) > 1e-3;
    if (clear) return pt;
  }
}

inline IncidentField random_incident(const HarmonicSet& hs, Rng& rng) {
  auto inc = IncidentField::none(static_cast<int>(hs.harmonics.size()));
  for (int l : hs.propagating) {
    inc.a_inc[static_cast<std::size_t>(l)] = gaussian_c(rng);
    inc.b_inc[static_cast<std::size_t>(l)] = gaussian_c(rng);
  }
  return inc;
}

inline Field2D random_field(Rng& rng, long m0, long n0, long rows, long cols) {
  Field2D f(m0, n0, rows, cols);
  for (auto& v : f.values) v = gaussian_c(rng);
  return f;
}

// Field covering rect plus a one-cell halo on every side.
inline Field2D random_field_on(Rng& rng, const Rectangle& r) {
  return random_field(rng, r.m1 - 1, r.n1 - 1, r.m2 - r.m1 + 3, r.n2 - r.n1 + 3);
}

}  // namespace latres::testing
