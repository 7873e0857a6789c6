#pragma once

// Small dense bound-constrained minimizers for the continuity parameters.
// Problems here have at most six variables and at most two bounded ones.

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <vector>

namespace bezred::optim {

inline constexpr double kUnbounded = -std::numeric_limits<double>::infinity();

struct BoundedQuadraticResult {
  Eigen::VectorXd x;
  double value{0.0};
  std::vector<int> active;  // indices held at their lower bound
};

/// Minimizes 0.5 x'Hx + g'x subject to x_i >= lower_i, for positive
/// semidefinite H. Every active-bound configuration of the finitely bounded
/// variables is solved as an equality-constrained problem; the feasible one
/// with the least value wins. Throws NumericalError for indefinite H.
BoundedQuadraticResult minimize_bounded_quadratic(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& gradient,
                                                  const Eigen::VectorXd& lower);

/// Minimizer of g's + 0.5 s'Hs over ||s|| <= radius (H symmetric, possibly indefinite).
Eigen::VectorXd trust_region_step(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& gradient, double radius);

struct NewtonOptions {
  int max_iterations{100};
  double gradient_tolerance{1e-10};
  double initial_radius{1.0};
  double hessian_step{1e-6};
};

struct NewtonResult {
  Eigen::VectorXd x;
  double value{0.0};
  int iterations{0};
  bool converged{false};
  double projected_gradient{0.0};
  std::vector<int> active;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Projected gradient: components held at a lower bound with positive slope are zeroed.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& gradient,
                                   const Eigen::VectorXd& lower);

/// Projected Newton iteration with a trust region; the Hessian is taken by
/// central differences of `gradient`. Stops when the projected gradient is at
/// most max(gradient_tolerance, gradient_floor), after max_iterations, or
/// when the trust region collapses. Steps must decrease the value, except that
/// a step within rounding noise of the current value (and no worse than the
/// start) is taken when it halves the projected gradient.
NewtonResult minimize_bounded_newton(const ObjectiveFn& objective, const GradientFn& gradient, Eigen::VectorXd x0,
                                     const Eigen::VectorXd& lower, const NewtonOptions& options = {},
                                     double gradient_floor = 0.0);

}  // namespace bezred::optim
