#pragma once

// Bernstein basis primitives: evaluation, degree elevation, forward
// differences and Jacobi-weighted inner products of Bernstein polynomials.
//
// Control points are stored as the rows of a dense matrix, one row per
// point, so a degree-n curve in d dimensions is an (n+1) x d matrix.

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "bezred/errors.hpp"

namespace bezred {

template <typename Scalar>
using PointRows = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Point = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// A Bezier curve of degree `degree()` with control points in R^d.
template <typename Scalar>
class BezierCurve {
 public:
  BezierCurve() : points_(PointRows<Scalar>::Zero(1, 1)) {}

  explicit BezierCurve(PointRows<Scalar> points) : points_(std::move(points)) {
    if (points_.rows() < 1) throw DomainError("BezierCurve: at least one control point is required");
    if (points_.cols() < 1) throw DomainError("BezierCurve: dimension must be at least 1");
  }

  int degree() const { return static_cast<int>(points_.rows()) - 1; }
  int dimension() const { return static_cast<int>(points_.cols()); }

  const PointRows<Scalar>& points() const { return points_; }
  auto point(int i) const { return points_.row(i); }
  auto coordinate(int h) const { return points_.col(h); }

  BezierCurve reversed() const { return BezierCurve(points_.colwise().reverse()); }

  friend bool operator==(const BezierCurve& a, const BezierCurve& b) {
    return a.points_.rows() == b.points_.rows() && a.points_.cols() == b.points_.cols() &&
           a.points_ == b.points_;
  }

 private:
  PointRows<Scalar> points_;
};

/// Exponents of the weight (1-t)^alpha t^beta on [0,1].
template <typename Scalar>
struct JacobiWeight {
  Scalar alpha{0};
  Scalar beta{0};

  JacobiWeight() = default;
  JacobiWeight(Scalar a, Scalar b) : alpha(a), beta(b) {
    if (!(alpha > Scalar(-1)) || !(beta > Scalar(-1))) {
      std::ostringstream msg;
      msg << "JacobiWeight: alpha, beta > -1 required (alpha=" << alpha << ", beta=" << beta << ")";
      throw DomainError(msg.str());
    }
  }
};

/// Binomial coefficient with C(u,v) = 0 for v < 0 or v > u.
template <typename Scalar = double>
Scalar binomial(int u, int v) {
  if (u < 0 || v < 0 || v > u) return Scalar(0);
  if (v > u - v) v = u - v;
  Scalar c(1);
  // Each partial product is itself a binomial coefficient, so this is exact
  // while the values fit in the mantissa.
  for (int i = 1; i <= v; ++i) c = c * Scalar(u - v + i) / Scalar(i);
  return c;
}

/// Rising factorial (x)_j = x (x+1) ... (x+j-1), with (x)_0 = 1.
template <typename Scalar>
Scalar pochhammer(Scalar x, int j) {
  if (j < 0) throw DomainError("pochhammer: negative length");
  Scalar p(1);
  for (int s = 0; s < j; ++s) p *= x + Scalar(s);
  return p;
}

template <typename Scalar>
Scalar beta_function(Scalar a, Scalar b) {
  using std::exp;
  using std::lgamma;
  if (!(a > Scalar(0)) || !(b > Scalar(0))) throw DomainError("beta_function: arguments must be positive");
  return exp(lgamma(a) + lgamma(b) - lgamma(a + b));
}

/// B_i^n(t) = C(n,i) t^i (1-t)^(n-i).
template <typename Scalar>
Scalar bernstein(int i, int n, Scalar t) {
  if (n < 0 || i < 0 || i > n) {
    throw DomainError("bernstein: index " + std::to_string(i) + " outside 0.." + std::to_string(n));
  }
  Scalar value = binomial<Scalar>(n, i);
  for (int s = 0; s < i; ++s) value *= t;
  for (int s = 0; s < n - i; ++s) value *= Scalar(1) - t;
  return value;
}

/// De Casteljau evaluation.
template <typename Scalar>
Point<Scalar> evaluate(const BezierCurve<Scalar>& curve, Scalar t) {
  PointRows<Scalar> work = curve.points();
  const Scalar s = Scalar(1) - t;
  for (int level = curve.degree(); level > 0; --level) {
    for (int i = 0; i < level; ++i) work.row(i) = s * work.row(i) + t * work.row(i + 1);
  }
  return work.row(0);
}

/// Coefficients of B_h^m in the degree-n Bernstein basis (n >= m):
/// entry j is C(m,h) C(n-m, j-h) / C(n,j).
template <typename Scalar>
Vector<Scalar> elevation_coefficients(int m, int h, int n) {
  if (m < 0 || n < m || h < 0 || h > m) throw DomainError("elevation_coefficients: need 0 <= h <= m <= n");
  Vector<Scalar> e = Vector<Scalar>::Zero(n + 1);
  Scalar value = binomial<Scalar>(m, h) / binomial<Scalar>(n, h);
  e(h) = value;
  // Ratio of consecutive nonzero entries, j -> j+1 for h <= j < h + n - m.
  for (int j = h; j < h + n - m; ++j) {
    value *= Scalar(n - m - (j - h)) / Scalar(j + 1 - h) * Scalar(j + 1) / Scalar(n - j);
    e(j + 1) = value;
  }
  return e;
}

/// (n+1) x (m+1) matrix whose column h holds elevation_coefficients(m, h, n).
template <typename Scalar>
Matrix<Scalar> elevation_matrix(int m, int n) {
  Matrix<Scalar> e(n + 1, m + 1);
  for (int h = 0; h <= m; ++h) e.col(h) = elevation_coefficients<Scalar>(m, h, n);
  return e;
}

template <typename Scalar>
BezierCurve<Scalar> elevate(const BezierCurve<Scalar>& curve, int target) {
  const int m = curve.degree();
  if (target < m) {
    throw DomainError("elevate: target degree " + std::to_string(target) + " below curve degree " +
                      std::to_string(m));
  }
  if (target == m) return curve;
  return BezierCurve<Scalar>(elevation_matrix<Scalar>(m, target) * curve.points());
}

/// Delta^order q_start over the rows of `seq`.
template <typename Derived>
Point<typename Derived::Scalar> forward_difference(const Eigen::MatrixBase<Derived>& seq, int order, int start) {
  using Scalar = typename Derived::Scalar;
  if (order < 0 || start < 0 || start + order >= seq.rows()) {
    throw DomainError("forward_difference: order " + std::to_string(order) + " at index " +
                      std::to_string(start) + " exceeds sequence of length " + std::to_string(seq.rows()));
  }
  Point<Scalar> acc = Point<Scalar>::Zero(seq.cols());
  for (int s = 0; s <= order; ++s) {
    const Scalar sign = ((order - s) % 2 == 0) ? Scalar(1) : Scalar(-1);
    acc += sign * binomial<Scalar>(order, s) * seq.row(start + s);
  }
  return acc;
}

namespace detail {

// r(s) = (alpha+1)_{L-s} (beta+1)_s / (alpha+beta+2)_L for s = 0..L, built by
// ratios so that large L does not overflow.
template <typename Scalar>
Vector<Scalar> moment_ratios(int total, const JacobiWeight<Scalar>& w) {
  Vector<Scalar> r(total + 1);
  Scalar value(1);
  for (int s = 0; s < total; ++s) value *= (w.alpha + Scalar(1 + s)) / (w.alpha + w.beta + Scalar(2 + s));
  r(0) = value;
  for (int s = 0; s < total; ++s) {
    value *= (w.beta + Scalar(1 + s)) / (w.alpha + Scalar(total - s));
    r(s + 1) = value;
  }
  return r;
}

template <typename Scalar>
Vector<Scalar> binomial_row(int n) {
  Vector<Scalar> row(n + 1);
  row(0) = Scalar(1);
  for (int i = 1; i <= n; ++i) row(i) = row(i - 1) * Scalar(n - i + 1) / Scalar(i);
  return row;
}

}  // namespace detail

/// (N+1) x (M+1) matrix of <B_i^N, B_j^M> under the Jacobi weight.
template <typename Scalar>
Matrix<Scalar> bernstein_cross_gram(int N, int M, const JacobiWeight<Scalar>& w) {
  if (N < 0 || M < 0) throw DomainError("bernstein_cross_gram: negative degree");
  const Vector<Scalar> r = detail::moment_ratios(N + M, w);
  const Vector<Scalar> cn = detail::binomial_row<Scalar>(N);
  const Vector<Scalar> cm = detail::binomial_row<Scalar>(M);
  const Scalar b = beta_function(w.alpha + Scalar(1), w.beta + Scalar(1));
  Matrix<Scalar> g(N + 1, M + 1);
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= M; ++j) g(i, j) = b * cn(i) * cm(j) * r(i + j);
  return g;
}

/// <B_i^N, B_j^M> under the Jacobi weight: a single term of I_NM.
template <typename Scalar>
Scalar bernstein_inner(int N, int i, int M, int j, const JacobiWeight<Scalar>& w) {
  if (i < 0 || i > N || j < 0 || j > M) throw DomainError("bernstein_inner: index out of range");
  const Vector<Scalar> r = detail::moment_ratios(N + M, w);
  return beta_function(w.alpha + Scalar(1), w.beta + Scalar(1)) * binomial<Scalar>(N, i) *
         binomial<Scalar>(M, j) * r(i + j);
}

/// I_NM(a, b): the weighted inner product of sum a_i B_i^N and sum b_j B_j^M.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar inner_product(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                                        const JacobiWeight<typename DerivedA::Scalar>& w) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() < 1 || b.size() < 1) throw DomainError("inner_product: empty coefficient sequence");
  const int N = static_cast<int>(a.size()) - 1;
  const int M = static_cast<int>(b.size()) - 1;
  const Matrix<Scalar> g = bernstein_cross_gram(N, M, w);
  Scalar acc(0);
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= M; ++j) acc += g(i, j) * a(i) * b(j);
  return acc;
}

}  // namespace bezred
