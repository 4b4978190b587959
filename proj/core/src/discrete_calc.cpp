#include "latres/discrete_calc.hpp"

#include <algorithm>
#include <cmath>

namespace latres {

namespace {

void need(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::window_too_small, what);
}

Field2D like(const Field2D& src, long m_first, long n_first, long rows, long cols) {
  need(rows > 0 && cols > 0, "difference: window too small for stencil");
  Field2D out(m_first, n_first, rows, cols);
  out.period = src.period;
  out.kappa = src.kappa;
  out.pseudo_periodic = src.pseudo_periodic;
  return out;
}

double max_abs(const Field2D& f) {
  double s = 0.0;
  for (cplx x : f.values) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

Field2D::Field2D(long m_first_, long n_first_, long rows_, long cols_)
    : m_first(m_first_), n_first(n_first_), rows(rows_), cols(cols_),
      values(static_cast<std::size_t>(rows_ * cols_)) {}

Field1D difference(const Field1D& v, DiffOp op) {
  need(v.values.size() >= 2, "difference: 1D window needs at least 2 samples");
  Field1D out;
  out.period = v.period;
  out.kappa = v.kappa;
  out.pseudo_periodic = v.pseudo_periodic;
  out.values.resize(v.values.size() - 1);
  switch (op) {
    case DiffOp::forward_x:
      out.first = v.first;
      for (long n = out.first; n <= out.last(); ++n) out(n) = v(n + 1) - v(n);
      break;
    case DiffOp::backward_x:
      out.first = v.first + 1;
      for (long n = out.first; n <= out.last(); ++n) out(n) = v(n) - v(n - 1);
      break;
    default:
      throw Error(ErrorCode::invalid_argument, "difference: 1D fields support x differences only");
  }
  return out;
}

Field2D difference(const Field2D& v, DiffOp op) {
  need(v.rows >= 2 && v.cols >= 2, "difference: 2D window must be at least 2x2");
  Field2D out;
  switch (op) {
    case DiffOp::forward_x:
      out = like(v, v.m_first, v.n_first, v.rows - 1, v.cols);
      for (long m = out.m_first; m <= out.m_last(); ++m)
        for (long n = out.n_first; n <= out.n_last(); ++n) out(m, n) = v(m + 1, n) - v(m, n);
      break;
    case DiffOp::backward_x:
      out = like(v, v.m_first + 1, v.n_first, v.rows - 1, v.cols);
      for (long m = out.m_first; m <= out.m_last(); ++m)
        for (long n = out.n_first; n <= out.n_last(); ++n) out(m, n) = v(m, n) - v(m - 1, n);
      break;
    case DiffOp::forward_y:
      out = like(v, v.m_first, v.n_first, v.rows, v.cols - 1);
      for (long m = out.m_first; m <= out.m_last(); ++m)
        for (long n = out.n_first; n <= out.n_last(); ++n) out(m, n) = v(m, n + 1) - v(m, n);
      break;
    case DiffOp::backward_y:
      out = like(v, v.m_first, v.n_first + 1, v.rows, v.cols - 1);
      for (long m = out.m_first; m <= out.m_last(); ++m)
        for (long n = out.n_first; n <= out.n_last(); ++n) out(m, n) = v(m, n) - v(m, n - 1);
      break;
    case DiffOp::laplacian:
      need(v.rows >= 3 && v.cols >= 3, "laplacian: window must be at least 3x3");
      out = like(v, v.m_first + 1, v.n_first + 1, v.rows - 2, v.cols - 2);
      for (long m = out.m_first; m <= out.m_last(); ++m)
        for (long n = out.n_first; n <= out.n_last(); ++n)
          out(m, n) = v(m + 1, n) + v(m - 1, n) + v(m, n + 1) + v(m, n - 1) - 4.0 * v(m, n);
      break;
  }
  return out;
}

Field2D divergence_minus(const Field2D& F1, const Field2D& F2) {
  const long m0 = std::max(F1.m_first + 1, F2.m_first);
  const long m1 = std::min(F1.m_last(), F2.m_last());
  const long n0 = std::max(F1.n_first, F2.n_first + 1);
  const long n1 = std::min(F1.n_last(), F2.n_last());
  Field2D out = like(F1, m0, n0, m1 - m0 + 1, n1 - n0 + 1);
  for (long m = m0; m <= m1; ++m)
    for (long n = n0; n <= n1; ++n)
      out(m, n) = F1(m, n) - F1(m - 1, n) + F2(m, n) - F2(m, n - 1);
  return out;
}

Field1D multiply(const Field1D& a, const Field1D& b) {
  Field1D out;
  out.first = std::max(a.first, b.first);
  const long last = std::min(a.last(), b.last());
  need(last >= out.first, "multiply: windows do not overlap");
  out.values.resize(static_cast<std::size_t>(last - out.first + 1));
  for (long n = out.first; n <= last; ++n) out(n) = a(n) * b(n);
  return out;
}

Field2D multiply(const Field2D& a, const Field2D& b) {
  const long m0 = std::max(a.m_first, b.m_first), m1 = std::min(a.m_last(), b.m_last());
  const long n0 = std::max(a.n_first, b.n_first), n1 = std::min(a.n_last(), b.n_last());
  Field2D out = like(a, m0, n0, m1 - m0 + 1, n1 - n0 + 1);
  out.pseudo_periodic = false;
  for (long m = m0; m <= m1; ++m)
    for (long n = n0; n <= n1; ++n) out(m, n) = a(m, n) * b(m, n);
  return out;
}

Field2D conjugate(const Field2D& a) {
  Field2D out = a;
  for (cplx& x : out.values) x = std::conj(x);
  out.kappa = -std::conj(a.kappa);
  return out;
}

Field2D plane_wave(long m_first, long n_first, long rows, long cols, cplx theta, cplx phi) {
  Field2D out(m_first, n_first, rows, cols);
  for (long m = m_first; m <= out.m_last(); ++m)
    for (long n = n_first; n <= out.n_last(); ++n)
      out(m, n) = phase(double(m) * theta + double(n) * phi);
  return out;
}

Field1D pseudo_periodic_extension(const std::vector<cplx>& period_values, cplx kappa, long first,
                                  long count) {
  const long N = static_cast<long>(period_values.size());
  if (N == 0) throw Error(ErrorCode::invalid_argument, "extension: empty period");
  Field1D out;
  out.first = first;
  out.period = static_cast<int>(N);
  out.kappa = kappa;
  out.pseudo_periodic = true;
  out.values.resize(static_cast<std::size_t>(count));
  for (long n = first; n < first + count; ++n) {
    const long q = (n >= 0) ? n / N : -((-n + N - 1) / N);
    out(n) = period_values[static_cast<std::size_t>(n - q * N)] * phase(double(q) * kappa);
  }
  return out;
}

double IdentityReport::max_residual() const {
  double r = std::max({product_rule_forward, product_rule_backward, telescoping,
                       summation_by_parts_1d, product_rule_2d, divergence_2d, green_2d});
  if (green_waveguide) r = std::max(r, *green_waveguide);
  return r;
}

IdentityReport identity_residuals(const Field2D& v, const Field2D& w, const Rectangle& r,
                                  const StructureParams* waveguide) {
  need(r.m2 > r.m1 && r.n2 > r.n1, "identities: empty rectangle");
  for (const Field2D* f : {&v, &w}) {
    need(f->m_first <= r.m1 && f->m_last() >= r.m2 + 1 && f->n_first <= r.n1 &&
             f->n_last() >= r.n2 + 1,
         "identities: fields must cover the rectangle plus a one-cell halo");
  }
  IdentityReport rep;
  rep.scale = max_abs(v) * max_abs(w);

  // One-dimensional identities along m at every column of the rectangle.
  for (long n = r.n1 + 1; n <= r.n2; ++n) {
    auto vx = [&](long m) { return v(m + 1, n) - v(m, n); };
    auto wx = [&](long m) { return w(m + 1, n) - w(m, n); };
    auto vxb = [&](long m) { return v(m, n) - v(m - 1, n); };
    auto wxb = [&](long m) { return w(m, n) - w(m - 1, n); };
    for (long m = r.m1; m <= r.m2; ++m) {
      const cplx lhs = v(m + 1, n) * w(m + 1, n) - v(m, n) * w(m, n);
      rep.product_rule_forward = std::max(
          {rep.product_rule_forward, std::abs(lhs - (vx(m) * w(m + 1, n) + v(m, n) * wx(m))),
           std::abs(lhs - (vx(m) * w(m, n) + v(m + 1, n) * wx(m)))});
    }
    for (long m = r.m1 + 1; m <= r.m2 + 1; ++m) {
      const cplx lhs = v(m, n) * w(m, n) - v(m - 1, n) * w(m - 1, n);
      rep.product_rule_backward = std::max(
          {rep.product_rule_backward, std::abs(lhs - (vxb(m) * w(m - 1, n) + v(m, n) * wxb(m))),
           std::abs(lhs - (vxb(m) * w(m, n) + v(m - 1, n) * wxb(m)))});
    }
    cplx sum_b = 0.0, sum_f = 0.0, sbp = 0.0;
    for (long m = r.m1 + 1; m <= r.m2; ++m) {
      sum_b += vxb(m);
      sbp += vxb(m) * w(m, n) + v(m - 1, n) * wxb(m);
    }
    for (long m = r.m1; m <= r.m2 - 1; ++m) sum_f += vx(m);
    const cplx ends = v(r.m2, n) - v(r.m1, n);
    rep.telescoping = std::max({rep.telescoping, std::abs(ends - sum_b), std::abs(ends - sum_f)});
    rep.summation_by_parts_1d =
        std::max(rep.summation_by_parts_1d,
                 std::abs(sbp - (v(r.m2, n) * w(r.m2, n) - v(r.m1, n) * w(r.m1, n))));
  }

  // Divergence theorem with F = (v, w).
  {
    cplx lhs = 0.0, rhs = 0.0;
    for (long n = r.n1 + 1; n <= r.n2; ++n)
      for (long m = r.m1 + 1; m <= r.m2; ++m)
        lhs += v(m, n) - v(m - 1, n) + w(m, n) - w(m, n - 1);
    for (long n = r.n1 + 1; n <= r.n2; ++n) rhs += v(r.m2, n) - v(r.m1, n);
    for (long m = r.m1 + 1; m <= r.m2; ++m) rhs += w(m, r.n2) - w(m, r.n1);
    rep.divergence_2d = std::abs(lhs - rhs);
  }

  auto ux = [&](long m, long n) { return w(m + 1, n) - w(m, n); };
  auto uy = [&](long m, long n) { return w(m, n + 1) - w(m, n); };

  // Product rule with F = grad_+ w, pointwise on the rectangle interior.
  for (long m = r.m1 + 1; m <= r.m2; ++m) {
    for (long n = r.n1 + 1; n <= r.n2; ++n) {
      const cplx lhs = v(m, n) * ux(m, n) - v(m - 1, n) * ux(m - 1, n) + v(m, n) * uy(m, n) -
                       v(m, n - 1) * uy(m, n - 1);
      const cplx divF = ux(m, n) - ux(m - 1, n) + uy(m, n) - uy(m, n - 1);
      const cplx rhs = v(m, n) * divF + (v(m, n) - v(m - 1, n)) * ux(m - 1, n) +
                       (v(m, n) - v(m, n - 1)) * uy(m, n - 1);
      rep.product_rule_2d = std::max(rep.product_rule_2d, std::abs(lhs - rhs));
    }
  }

  // Two-dimensional summation by parts, u = w.
  {
    cplx lhs = 0.0, grad = 0.0, bx = 0.0, by = 0.0;
    for (long n = r.n1 + 1; n <= r.n2; ++n) {
      for (long m = r.m1 + 1; m <= r.m2; ++m) {
        const cplx lap = w(m + 1, n) + w(m - 1, n) + w(m, n + 1) + w(m, n - 1) - 4.0 * w(m, n);
        lhs += v(m, n) * lap;
        grad += (v(m, n) - v(m - 1, n)) * (w(m, n) - w(m - 1, n)) +
                (v(m, n) - v(m, n - 1)) * (w(m, n) - w(m, n - 1));
      }
      bx += v(r.m2, n) * ux(r.m2, n) - v(r.m1, n) * ux(r.m1, n);
    }
    for (long m = r.m1 + 1; m <= r.m2; ++m) {
      by += v(m, r.n2) * uy(m, r.n2) - v(m, r.n1) * uy(m, r.n1);
    }
    rep.green_2d = std::abs(lhs - (bx + by - grad));
    rep.n_boundary_term = by;
  }

  if (waveguide) {
    const int N = waveguide->N;
    need(w.n_first <= r.n1 && w.n_last() >= r.n1 + N + 1,
         "identities: waveguide check needs N + 2 samples in n");
    Field1D z;
    z.first = 0;
    z.values.resize(static_cast<std::size_t>(N + 2));
    for (long n = 0; n <= N + 1; ++n) z(n) = w(r.m1, r.n1 + n);
    rep.green_waveguide = waveguide_green_residual(*waveguide, z);
  }
  return rep;
}

double waveguide_green_residual(const StructureParams& params, const Field1D& z) {
  params.validate();
  const int N = params.N;
  need(z.first <= 0 && z.last() >= N + 1, "waveguide identity: z must cover 0..N+1");
  auto M = [&](long n) { return params.mass(n); };
  auto k = [&](long n) { return params.spring(n); };
  auto f = [&](long n) { return z(n) / std::sqrt(M(n)); };

  cplx lhs = 0.0;
  for (long n = 1; n <= N; ++n) {
    const cplx omega1z = (k(n) + k(n - 1)) / M(n) * z(n) -
                         k(n) / std::sqrt(M(n) * M(n + 1)) * z(n + 1) -
                         k(n - 1) / std::sqrt(M(n) * M(n - 1)) * z(n - 1);
    lhs += std::conj(z(n)) * omega1z;
  }
  cplx rhs = -k(N) * std::conj(f(N)) * (f(N + 1) - f(N)) + k(0) * std::conj(f(0)) * (f(1) - f(0));
  for (long n = 1; n <= N; ++n) {
    rhs += k(n - 1) * std::conj(f(n) - f(n - 1)) * (f(n) - f(n - 1));
  }
  return std::abs(lhs - rhs);
}

}  // namespace latres
