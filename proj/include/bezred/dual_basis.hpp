#pragma once

// Constrained dual Bernstein coefficients.
//
// The subspace of degree-m polynomials whose derivatives of orders 0..k vanish
// at t=0 and 0..l vanish at t=1 is spanned by B_{k+1}^m .. B_{m-l-1}^m. Its
// dual basis D_i satisfies <D_i, B_s^m> = delta_is, so D_i = sum_t C_it B_t^m
// with C the inverse of the Gram matrix of that spanning set. The projection
// coefficients phi_ij = <B_j^n, D_i> are then a Gram solve away.

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <limits>
#include <string>

#include "bezred/bernstein.hpp"

namespace bezred {

inline void check_constrained_space(int m, int k, int l) {
  if (k < -1 || l < -1) throw DomainError("constraint orders must satisfy k, l >= -1");
  if (!(k + l < m - 1)) {
    throw DomainError("constrained space is empty: need k + l < m - 1 (k=" + std::to_string(k) +
                      ", l=" + std::to_string(l) + ", m=" + std::to_string(m) + ")");
  }
}

template <typename Scalar>
struct GramMatrix {
  int degree{0};
  int k{-1};
  int l{-1};
  JacobiWeight<Scalar> weight;
  /// Entry (a, b) is <B_{k+1+a}^m, B_{k+1+b}^m>.
  Matrix<Scalar> entries;

  int first_index() const { return k + 1; }
  int last_index() const { return degree - l - 1; }
  int size() const { return degree - k - l - 1; }
};

template <typename Scalar>
GramMatrix<Scalar> constrained_gram(int m, int k, int l, const JacobiWeight<Scalar>& w) {
  check_constrained_space(m, k, l);
  const Matrix<Scalar> full = bernstein_cross_gram(m, m, w);
  const int size = m - k - l - 1;
  const Matrix<Scalar> block = full.block(k + 1, k + 1, size, size);
  return GramMatrix<Scalar>{m, k, l, w, (block + block.transpose()) / Scalar(2)};
}

/// 2-norm condition number from the symmetric eigenvalues.
template <typename Scalar>
Scalar condition_estimate(const GramMatrix<Scalar>& g) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(g.entries, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const Scalar lo = ev.minCoeff();
  const Scalar hi = ev.maxCoeff();
  if (!(lo > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
  return hi / lo;
}

/// Inverse of the Gram matrix; row i holds the coefficients of D_{k+1+i}.
template <typename Scalar>
Matrix<Scalar> dual_coefficients(const GramMatrix<Scalar>& g) {
  const Eigen::LLT<Matrix<Scalar>> llt(g.entries);
  const Scalar cond = condition_estimate(g);
  const Scalar limit = Scalar(1) / (Scalar(64) * std::numeric_limits<Scalar>::epsilon());
  if (llt.info() != Eigen::Success || !(cond < limit)) {
    throw IllConditionedError("dual_coefficients: Gram matrix is numerically singular (condition estimate " +
                                  std::to_string(static_cast<double>(cond)) + ")",
                              static_cast<double>(cond));
  }
  return llt.solve(Matrix<Scalar>::Identity(g.size(), g.size()));
}

template <typename Scalar>
struct PhiTable {
  int n{0};
  int m{0};
  int k{-1};
  int l{-1};
  JacobiWeight<Scalar> weight;
  /// Row (i - k - 1), column j holds phi_ij for i = k+1..m-l-1, j = 0..n.
  Matrix<Scalar> entries;
  Scalar gram_condition{1};

  int first_index() const { return k + 1; }
  int last_index() const { return m - l - 1; }
  int rows() const { return m - k - l - 1; }
  Scalar operator()(int i, int j) const { return entries(i - k - 1, j); }
};

template <typename Scalar>
PhiTable<Scalar> phi_table(int n, int m, int k, int l, const JacobiWeight<Scalar>& w) {
  if (n < m) throw DomainError("phi_table: source degree n must be at least m");
  const GramMatrix<Scalar> gram = constrained_gram(m, k, l, w);
  const Matrix<Scalar> dual = dual_coefficients(gram);
  const Matrix<Scalar> cross = bernstein_cross_gram(m, n, w);
  PhiTable<Scalar> table{n, m, k, l, w, Matrix<Scalar>(), condition_estimate(gram)};
  table.entries = dual * cross.middleRows(k + 1, gram.size());
  return table;
}

}  // namespace bezred
