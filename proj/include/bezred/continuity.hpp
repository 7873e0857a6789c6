#pragma once

// Endpoint continuity of a reduced curve R (degree m) against a source P
// (degree n) up to order 3 at each end.
//
// Under a reparametrization with endpoint jet lambda_j = phi^(j)(0) and
// mu_j = phi^(j)(1), G^{k,l} continuity fixes r_0..r_k and r_{m-l}..r_m as
// polynomials in the jet. The identity jet (1, 0, 0) gives C^{k,l} continuity.

#include <string>

#include "bezred/bernstein.hpp"
#include "bezred/dual_basis.hpp"

namespace bezred {

enum class Side { start, end };

inline void check_order(int order, const char* name) {
  if (order < -1 || order > 3) {
    throw UnsupportedOrderError(std::string("continuity order ") + name + "=" + std::to_string(order) +
                                " is unsupported: orders are limited to -1 <= " + name + " <= 3");
  }
}

/// Orders (k, l), hybrid flags and positivity bounds of an endpoint-continuity request.
struct ContinuitySpec {
  int k{-1};
  int l{-1};
  bool p_fixed{false};  // pin lambda_1 = 1 when k >= 2
  bool q_fixed{false};  // pin mu_1 = 1 when l >= 2
  double d0{1e-4};
  double d1{1e-4};

  void validate(int m) const {
    check_order(k, "k");
    check_order(l, "l");
    check_constrained_space(m, k, l);
    if (!(d0 > 0.0) || !(d1 > 0.0)) throw DomainError("lower bounds must satisfy d0, d1 > 0");
  }
};

/// Endpoint jet of the reparametrization: lambdas has length k, mus length l.
template <typename Scalar>
struct GParams {
  Vector<Scalar> lambdas;
  Vector<Scalar> mus;

  int size() const { return static_cast<int>(lambdas.size() + mus.size()); }
};

/// lambda = (1, 0, 0) and mu = (1, 0, 0) truncated to (k, l).
template <typename Scalar = double>
GParams<Scalar> identity_jet(int k, int l) {
  GParams<Scalar> p{Vector<Scalar>::Zero(k > 0 ? k : 0), Vector<Scalar>::Zero(l > 0 ? l : 0)};
  if (k >= 1) p.lambdas(0) = Scalar(1);
  if (l >= 1) p.mus(0) = Scalar(1);
  return p;
}

namespace detail {

// n/m, n(n-1)/(m(m-1)), n(n-1)(n-2)/(m(m-1)(m-2)), i.e. (n-j+1)_j / (m-j+1)_j.
template <typename Scalar>
struct JetRatios {
  Scalar n, m, first, second, third;

  JetRatios(int n_, int m_, int order) : n(n_), m(m_) {
    first = n / m;
    second = order >= 2 ? n * (n - 1) / (m * (m - 1)) : Scalar(0);
    third = order >= 3 ? n * (n - 1) * (n - 2) / (m * (m - 1) * (m - 2)) : Scalar(0);
  }
};

template <typename Scalar>
void check_jet(const BezierCurve<Scalar>& curve, int m, int order, Eigen::Index given, const char* what) {
  check_order(order, what);
  if (order >= 1 && m <= order) {
    throw DomainError(std::string("boundary of order ") + what + "=" + std::to_string(order) +
                      " needs target degree m > " + std::to_string(order));
  }
  if (curve.degree() < order) throw DomainError("source degree is too low for the requested order");
  if (given < order) {
    throw DomainError(std::string("expected ") + std::to_string(order) + " jet parameters for " + what);
  }
}

}  // namespace detail

/// r_0..r_k as functions of lambda_1..lambda_k.
template <typename Scalar>
PointRows<Scalar> start_boundary(const BezierCurve<Scalar>& curve, int m, int k, const Vector<Scalar>& lambdas) {
  detail::check_jet(curve, m, k, lambdas.size(), "k");
  const auto& p = curve.points();
  PointRows<Scalar> r(k + 1, curve.dimension());
  if (k < 0) return r;
  r.row(0) = p.row(0);
  if (k == 0) return r;

  const detail::JetRatios<Scalar> c(curve.degree(), m, k);
  const Point<Scalar> d1 = forward_difference(p, 1, 0);
  const Scalar l1 = lambdas(0);
  r.row(1) = p.row(0) + c.first * l1 * d1;
  if (k == 1) return r;

  const Point<Scalar> d2 = forward_difference(p, 2, 0);
  const Scalar l2 = lambdas(1);
  r.row(2) = p.row(0) + c.first * (2 * l1 + l2 / (c.m - 1)) * d1 + c.second * l1 * l1 * d2;
  if (k == 2) return r;

  const Point<Scalar> d3 = forward_difference(p, 3, 0);
  const Scalar l3 = lambdas(2);
  r.row(3) = p.row(0) + c.first * (3 * l1 + 3 * l2 / (c.m - 1) + l3 / ((c.m - 2) * (c.m - 1))) * d1 +
             3 * c.second * (l1 * l1 + l1 * l2 / (c.m - 2)) * d2 + c.third * l1 * l1 * l1 * d3;
  return r;
}

/// r_{m-l}..r_m (in increasing index order) as functions of mu_1..mu_l.
template <typename Scalar>
PointRows<Scalar> end_boundary(const BezierCurve<Scalar>& curve, int m, int l, const Vector<Scalar>& mus) {
  detail::check_jet(curve, m, l, mus.size(), "l");
  const auto& p = curve.points();
  const int n = curve.degree();
  PointRows<Scalar> r(l + 1, curve.dimension());
  if (l < 0) return r;
  // Row (l - s) holds r_{m-s}.
  r.row(l) = p.row(n);
  if (l == 0) return r;

  const detail::JetRatios<Scalar> c(n, m, l);
  const Point<Scalar> d1 = forward_difference(p, 1, n - 1);
  const Scalar m1 = mus(0);
  r.row(l - 1) = p.row(n) - c.first * m1 * d1;
  if (l == 1) return r;

  const Point<Scalar> d2 = forward_difference(p, 2, n - 2);
  const Scalar m2 = mus(1);
  r.row(l - 2) = p.row(n) - c.first * (2 * m1 - m2 / (c.m - 1)) * d1 + c.second * m1 * m1 * d2;
  if (l == 2) return r;

  const Point<Scalar> d3 = forward_difference(p, 3, n - 3);
  const Scalar m3 = mus(2);
  r.row(0) = p.row(n) - c.first * (3 * m1 - 3 * m2 / (c.m - 1) + m3 / ((c.m - 2) * (c.m - 1))) * d1 +
             3 * c.second * (m1 * m1 - m1 * m2 / (c.m - 2)) * d2 - c.third * m1 * m1 * m1 * d3;
  return r;
}

/// d r_i / d lambda_u for i = 0..k.
template <typename Scalar>
PointRows<Scalar> start_partials(const BezierCurve<Scalar>& curve, int m, int k, const Vector<Scalar>& lambdas,
                                 int u) {
  detail::check_jet(curve, m, k, lambdas.size(), "k");
  if (u < 1 || u > k) throw DomainError("start_partials: parameter index u must satisfy 1 <= u <= k");
  const auto& p = curve.points();
  PointRows<Scalar> dr = PointRows<Scalar>::Zero(k + 1, curve.dimension());
  const detail::JetRatios<Scalar> c(curve.degree(), m, k);
  const Point<Scalar> d1 = forward_difference(p, 1, 0);
  const Scalar l1 = lambdas(0);
  const Scalar l2 = k >= 2 ? lambdas(1) : Scalar(0);

  if (u == 1) {
    dr.row(1) = c.first * d1;
    if (k >= 2) dr.row(2) = 2 * c.first * d1 + 2 * l1 * c.second * forward_difference(p, 2, 0);
    if (k >= 3) {
      dr.row(3) = 3 * c.first * d1 + (2 * l1 + l2 / (c.m - 2)) * 3 * c.second * forward_difference(p, 2, 0) +
                  3 * l1 * l1 * c.third * forward_difference(p, 3, 0);
    }
  } else if (u == 2) {
    // n / (m-1)_2 and (n-1)_2 / (m-2)_3
    const Scalar a = c.n / ((c.m - 1) * c.m);
    dr.row(2) = a * d1;
    if (k >= 3) {
      const Scalar b = (c.n - 1) * c.n / ((c.m - 2) * (c.m - 1) * c.m);
      dr.row(3) = 3 * a * d1 + 3 * l1 * b * forward_difference(p, 2, 0);
    }
  } else {
    dr.row(3) = c.n / ((c.m - 2) * (c.m - 1) * c.m) * d1;
  }
  return dr;
}

/// d r_i / d mu_v for i = m-l..m (row 0 is r_{m-l}).
template <typename Scalar>
PointRows<Scalar> end_partials(const BezierCurve<Scalar>& curve, int m, int l, const Vector<Scalar>& mus, int v) {
  detail::check_jet(curve, m, l, mus.size(), "l");
  if (v < 1 || v > l) throw DomainError("end_partials: parameter index v must satisfy 1 <= v <= l");
  const auto& p = curve.points();
  const int n = curve.degree();
  PointRows<Scalar> dr = PointRows<Scalar>::Zero(l + 1, curve.dimension());
  const detail::JetRatios<Scalar> c(n, m, l);
  const Point<Scalar> d1 = forward_difference(p, 1, n - 1);
  const Scalar m1 = mus(0);
  const Scalar m2 = l >= 2 ? mus(1) : Scalar(0);
  auto row = [&](int offset) { return dr.row(l - offset); };  // r_{m-offset}

  if (v == 1) {
    row(1) = -c.first * d1;
    if (l >= 2) row(2) = -2 * c.first * d1 + 2 * m1 * c.second * forward_difference(p, 2, n - 2);
    if (l >= 3) {
      row(3) = -3 * c.first * d1 + (2 * m1 - m2 / (c.m - 2)) * 3 * c.second * forward_difference(p, 2, n - 2) -
               3 * m1 * m1 * c.third * forward_difference(p, 3, n - 3);
    }
  } else if (v == 2) {
    const Scalar a = c.n / ((c.m - 1) * c.m);
    row(2) = a * d1;
    if (l >= 3) {
      const Scalar b = (c.n - 1) * c.n / ((c.m - 2) * (c.m - 1) * c.m);
      row(3) = 3 * a * d1 - 3 * m1 * b * forward_difference(p, 2, n - 2);
    }
  } else {
    row(3) = -c.n / ((c.m - 2) * (c.m - 1) * c.m) * d1;
  }
  return dr;
}

/// Derivatives of the inner points r_{k+1}..r_{m-l-1} with respect to one
/// jet parameter, given the derivatives of the boundary points on `side`
/// (rows for r_0..r_k, or r_{m-l}..r_m).
template <typename Scalar>
PointRows<Scalar> inner_partials(const PhiTable<Scalar>& phi, const PointRows<Scalar>& boundary_partials, Side side) {
  const int first = side == Side::start ? 0 : phi.m - phi.l;
  const int count = side == Side::start ? phi.k + 1 : phi.l + 1;
  if (boundary_partials.rows() != count) throw DomainError("inner_partials: boundary partials have the wrong length");
  PointRows<Scalar> dv = PointRows<Scalar>::Zero(phi.n + 1, boundary_partials.cols());
  for (int s = 0; s < count; ++s) {
    if (boundary_partials.row(s).isZero(0)) continue;
    dv.noalias() -= elevation_coefficients<Scalar>(phi.m, first + s, phi.n) * boundary_partials.row(s);
  }
  return phi.entries * dv;
}

/// F_tj(q) = C(m,j) / (alpha+beta+m+2)_t * sum_i C(t,i) (alpha+1)_{t+m-i-j} (beta+1)_{i+j} q_i.
template <typename Derived>
typename Derived::Scalar f_form(const Eigen::MatrixBase<Derived>& q, int j, int m,
                                const JacobiWeight<typename Derived::Scalar>& w) {
  using Scalar = typename Derived::Scalar;
  const int t = static_cast<int>(q.size()) - 1;
  if (t < 0 || j < 0 || j > m) throw DomainError("f_form: index out of range");
  Vector<Scalar> rise_a(t + m + 1), rise_b(t + m + 1);
  rise_a(0) = rise_b(0) = Scalar(1);
  for (int s = 1; s <= t + m; ++s) {
    rise_a(s) = rise_a(s - 1) * (w.alpha + Scalar(s));
    rise_b(s) = rise_b(s - 1) * (w.beta + Scalar(s));
  }
  const Vector<Scalar> ct = detail::binomial_row<Scalar>(t);
  Scalar acc(0);
  for (int i = 0; i <= t; ++i) acc += ct(i) * rise_a(t + m - i - j) * rise_b(i + j) * q(i);
  return binomial<Scalar>(m, j) * acc / pochhammer(w.alpha + w.beta + Scalar(m + 2), t);
}

}  // namespace bezred
