#include "latres/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace latres {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::threshold_degeneracy: return "threshold_degeneracy";
    case ErrorCode::window_too_small: return "window_too_small";
    case ErrorCode::singular_system: return "singular_system";
    case ErrorCode::region_violation: return "region_violation";
    case ErrorCode::lost_track: return "lost_track";
    case ErrorCode::newton_divergence: return "newton_divergence";
    case ErrorCode::no_root: return "no_root";
    case ErrorCode::fit_failed: return "fit_failed";
    case ErrorCode::continuation_failure: return "continuation_failure";
    case ErrorCode::instability: return "instability";
  }
  return "unknown";
}

namespace {

template <typename Scalar>
std::vector<Scalar> polyfit_impl(const std::vector<double>& x, const std::vector<Scalar>& y,
                                 const std::vector<int>& powers) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (x.size() != y.size() || x.size() < powers.size() || powers.empty()) {
    throw Error(ErrorCode::fit_failed, "polyfit: not enough samples for the requested terms");
  }
  // Column scaling keeps the Vandermonde system well conditioned for small x.
  double xmax = 0.0;
  for (double xi : x) xmax = std::max(xmax, std::abs(xi));
  if (xmax == 0.0) xmax = 1.0;
  Mat A(x.size(), powers.size());
  Vec b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < powers.size(); ++j) {
      A(i, j) = Scalar(std::pow(x[i] / xmax, powers[j]));
    }
    b(i) = y[i];
  }
  Eigen::ColPivHouseholderQR<Mat> qr(A);
  if (qr.rank() < static_cast<Eigen::Index>(powers.size())) {
    throw Error(ErrorCode::fit_failed, "polyfit: rank-deficient design matrix");
  }
  Vec c = qr.solve(b);
  std::vector<Scalar> out(powers.size());
  for (std::size_t j = 0; j < powers.size(); ++j) {
    out[j] = c(j) / std::pow(xmax, powers[j]);
  }
  return out;
}

}  // namespace

std::vector<cplx> polyfit(const std::vector<double>& x, const std::vector<cplx>& y,
                          const std::vector<int>& powers) {
  return polyfit_impl<cplx>(x, y, powers);
}

std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<int>& powers) {
  return polyfit_impl<double>(x, y, powers);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0) {
      throw Error(ErrorCode::fit_failed, "loglog_slope: non-positive sample");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return polyfit(lx, ly, {0, 1})[1];
}

MinimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> x0, const std::vector<double>& scale,
                           double xtol, int max_eval) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += scale[i];
  std::vector<double> fv(n + 1);
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  while (evals < max_eval) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    bool converged = true;
    for (std::size_t d = 0; d < n && converged; ++d) {
      for (std::size_t i = 0; i <= n; ++i) {
        if (std::abs(simplex[i][d] - simplex[best][d]) > xtol) {
          converged = false;
          break;
        }
      }
    }
    if (converged) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d] / double(n);
    }
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t d = 0; d < n; ++d) {
        x[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
      }
      return x;
    };
    auto xr = along(-1.0);
    double fr = eval(xr);
    if (fr < fv[best]) {
      auto xe = along(-2.0);
      double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
    } else {
      auto xc = fr < fv[worst] ? along(-0.5) : along(0.5);
      double fc = eval(xc);
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t d = 0; d < n; ++d) {
            simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
          }
          fv[i] = eval(simplex[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (fv[i] < fv[best]) best = i;
  }
  return {simplex[best], fv[best], evals};
}

double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double xtol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (std::abs(b - a) > xtol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> linspace(double a, double b, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {0.5 * (a + b)};
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = a + (b - a) * double(i) / double(count - 1);
  }
  return out;
}

std::vector<double> logspace(double log10_a, double log10_b, std::size_t count) {
  auto e = linspace(log10_a, log10_b, count);
  for (double& v : e) v = std::pow(10.0, v);
  return e;
}

}  // namespace latres
