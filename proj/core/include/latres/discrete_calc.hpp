#pragma once

// Difference calculus on finite integer windows. Operators shrink the
// output window by their stencil footprint instead of padding.

#include <optional>
#include <vector>

#include "latres/model.hpp"

namespace latres {

struct Field1D {
  long first = 0;
  std::vector<cplx> values;
  // Pseudo-period metadata: v_{n+period} = e^{2 pi i kappa} v_n when set.
  int period = 0;
  cplx kappa;
  bool pseudo_periodic = false;

  long last() const { return first + static_cast<long>(values.size()) - 1; }
  bool contains(long n) const { return n >= first && n <= last(); }
  cplx operator()(long n) const { return values[static_cast<std::size_t>(n - first)]; }
  cplx& operator()(long n) { return values[static_cast<std::size_t>(n - first)]; }
};

// Row-major over m (x direction), columns over n (y direction).
struct Field2D {
  long m_first = 0;
  long n_first = 0;
  long rows = 0;
  long cols = 0;
  std::vector<cplx> values;
  int period = 0;
  cplx kappa;
  bool pseudo_periodic = false;

  Field2D() = default;
  Field2D(long m_first, long n_first, long rows, long cols);

  long m_last() const { return m_first + rows - 1; }
  long n_last() const { return n_first + cols - 1; }
  cplx operator()(long m, long n) const {
    return values[static_cast<std::size_t>((m - m_first) * cols + (n - n_first))];
  }
  cplx& operator()(long m, long n) {
    return values[static_cast<std::size_t>((m - m_first) * cols + (n - n_first))];
  }
};

enum class DiffOp { forward_x, backward_x, forward_y, backward_y, laplacian };

// 1D fields accept forward_x / backward_x only.
Field1D difference(const Field1D& v, DiffOp op);
Field2D difference(const Field2D& v, DiffOp op);

// (F1)_{xbar} + (F2)_{ybar} on the common window of both components.
Field2D divergence_minus(const Field2D& F1, const Field2D& F2);

// Elementwise product on the intersection of the two windows.
Field1D multiply(const Field1D& a, const Field1D& b);
Field2D multiply(const Field2D& a, const Field2D& b);
Field2D conjugate(const Field2D& a);

// e^{2 pi i (m theta + n phi)} on the given window.
Field2D plane_wave(long m_first, long n_first, long rows, long cols, cplx theta, cplx phi);

// Extends one period of values (length N, starting at n = 0) to the window
// using v_{n+N} = e^{2 pi i kappa} v_n.
Field1D pseudo_periodic_extension(const std::vector<cplx>& period_values, cplx kappa,
                                  long first, long count);

struct Rectangle {
  long m1, m2, n1, n2;  // sums run over m1 < m <= m2, n1 < n <= n2
};

struct IdentityReport {
  double product_rule_forward = 0.0;   // (vw)_x forms
  double product_rule_backward = 0.0;  // (vw)_xbar forms
  double telescoping = 0.0;
  double summation_by_parts_1d = 0.0;
  double product_rule_2d = 0.0;
  double divergence_2d = 0.0;
  double green_2d = 0.0;
  std::optional<double> green_waveguide;
  // Sum over m of (v u_y) at n2 minus at n1; vanishes when v = conj(u)
  // and u is pseudo-periodic with n2 - n1 a multiple of the period.
  cplx n_boundary_term;
  double scale = 0.0;  // max|v| * max|w|

  double max_residual() const;
};

// Evaluates both sides of each identity on `rect` and reports |LHS - RHS|.
// The fields must cover the rectangle plus a one-cell halo on every side.
// When `waveguide` is supplied, its summation-by-parts identity is checked on
// z_n = w(rect.m1, n) for n = n1 .. n1 + N + 1.
IdentityReport identity_residuals(const Field2D& v, const Field2D& w, const Rectangle& rect,
                                  const StructureParams* waveguide = nullptr);

// Waveguide identity over one period: sum_{n=1}^{N} conj(z_n) (Omega1 z)_n
// against boundary terms plus the discrete Dirichlet form. z covers n = 0..N+1.
double waveguide_green_residual(const StructureParams& params, const Field1D& z);

}  // namespace latres
