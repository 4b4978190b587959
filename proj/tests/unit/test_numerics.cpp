#include <doctest.h>

#include <atomic>
#include <cmath>

#include "generators.hpp"
#include "latres/numerics.hpp"

using namespace latres;
using namespace latres::testing;

TEST_CASE("polyfit recovers an exact polynomial at small abscissae") {
  std::vector<double> x, y;
  for (int i = -6; i <= 6; ++i) {
    const double t = 1e-3 * i;
    x.push_back(t);
    y.push_back(0.9 - 0.3 * t + 2.6 * t * t + 5.0 * t * t * t);
  }
  const auto c = polyfit(x, y, {0, 1, 2, 3});
  CHECK(std::abs(c[0] - 0.9) < 1e-14);
  CHECK(std::abs(c[1] + 0.3) < 1e-11);
  CHECK(std::abs(c[2] - 2.6) < 1e-8);
  CHECK_THROWS_AS(polyfit(std::vector<double>{0.0}, std::vector<double>{1.0}, {0, 1}), Error);
}

TEST_CASE("loglog slope of a power law") {
  const auto x = logspace(-4, -2, 9);
  std::vector<double> y;
  for (double t : x) y.push_back(3.0 * std::pow(t, -1.5));
  CHECK(std::abs(loglog_slope(x, y) + 1.5) < 1e-12);
  CHECK_THROWS_AS(loglog_slope({1.0, -1.0}, {1.0, 1.0}), Error);
}

TEST_CASE("golden section and Nelder-Mead minimize smooth functions") {
  const double x = golden_section_min([](double t) { return (t - 0.3) * (t - 0.3); }, 0.0, 1.0);
  CHECK(std::abs(x - 0.3) < 1e-7);
  const auto r = nelder_mead(
      [](const std::vector<double>& v) {
        return (v[0] - 1.0) * (v[0] - 1.0) + 10.0 * (v[1] + 0.5) * (v[1] + 0.5);
      },
      {0.0, 0.0}, {0.1, 0.1});
  CHECK(std::abs(r.x[0] - 1.0) < 1e-6);
  CHECK(std::abs(r.x[1] + 0.5) < 1e-6);
}

TEST_CASE("parallel_for visits each index once and rethrows") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw Error(ErrorCode::no_root, "x");
                               }),
                  Error);
}

TEST_CASE("grids") {
  const auto l = linspace(-1.0, 1.0, 5);
  CHECK(l.front() == -1.0);
  CHECK(l.back() == 1.0);
  CHECK(l[2] == 0.0);
  const auto g = logspace(-2, 0, 3);
  CHECK(std::abs(g[1] - 0.1) < 1e-16);
}
