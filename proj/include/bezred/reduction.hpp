#pragma once

// Constrained multi-degree reduction of Bezier curves.
//
// A degree-n source curve is replaced by the degree-m curve of least
// Jacobi-weighted L2 distance whose endpoints satisfy C^{k,l}, hybrid
// C^{p,q}/G^{k,l} or G^{k,l} continuity with the source. The work splits into
// Phase A (dual coefficient table, then the continuity parameters) and
// Phase B (boundary points, the upsilon sequence, inner points).

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

#include "bezred/bernstein.hpp"
#include "bezred/continuity.hpp"
#include "bezred/dual_basis.hpp"
#include "bezred/optimize.hpp"

namespace bezred {

using Curve = BezierCurve<double>;
using Points = PointRows<double>;
using Weight = JacobiWeight<double>;
using Params = GParams<double>;

/// Source degrees above this are rejected unless the caller raises the limit.
inline constexpr int kDefaultMaxDegree = 20;
/// Sampling grid size for the maximum error.
inline constexpr int kDefaultGrid = 500;

enum class Mode {
  c,   // parametric C^{k,l}
  cg,  // C^{p,q}/G^{k,l}: lambda_1 (mu_1) pinned to 1 for k >= 2 (l >= 2)
  g,   // full G^{k,l}
};

std::string to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct ReductionProblem {
  Curve source;
  int target_degree{0};
  ContinuitySpec spec;
  Weight weight;

  int n() const { return source.degree(); }
  int m() const { return target_degree; }

  /// Throws DomainError naming the violated assumption.
  void validate(int max_degree = kDefaultMaxDegree) const;
};

/// Fixed control points r_0..r_k (start) and r_{m-l}..r_m (end).
struct Boundary {
  Points start;
  Points end;
};

/// upsilon_j = p_j - C(n,j)^{-1} sum_h C(n-m, j-h) C(m,h) r_h over the boundary
/// indices; (n+1) x d. Orders are taken from the boundary row counts.
Points upsilon(const Curve& source, int m, const Boundary& boundary);

/// r_i = sum_j upsilon_j phi_ij for the inner indices of `phi`.
Points inner_points(const Points& upsilons, const PhiTable<double>& phi);

/// Squared weighted L2 distance between two curves of the same dimension.
double squared_error(const Curve& p, const Curve& r, const Weight& w);

/// Largest Euclidean distance over the grid {0, 1/N, ..., 1}.
double max_error(const Curve& p, const Curve& r, int grid = kDefaultGrid);

struct FixedParameters {
  bool lambda1{false};
  bool mu1{false};
};

struct SolverReport {
  std::string route{"none"};
  int iterations{0};
  bool converged{true};
  /// Infinity norm of the free gradient residuals at the returned parameters
  /// (projected onto the bounds).
  double residual_norm{0.0};
  int starts{0};
  std::vector<std::string> active_bounds;
  std::vector<std::string> warnings;
};

struct SolveResult {
  Params params;
  SolverReport report;
};

/// A reduction problem with its dual coefficient table (Phase A, Step I)
/// computed once; evaluates Phase B and the error as functions of the jet.
class Reducer {
 public:
  explicit Reducer(ReductionProblem problem, int max_degree = kDefaultMaxDegree);

  const ReductionProblem& problem() const { return problem_; }
  const PhiTable<double>& phi() const { return phi_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  int k() const { return problem_.spec.k; }
  int l() const { return problem_.spec.l; }

  Boundary boundary(const Params& params) const;
  /// Phase B: boundary points, upsilon, inner points.
  Curve assemble(const Params& params) const;
  /// Squared error as a function of the jet.
  double objective(const Params& params) const;
  /// Left-hand sides of the stationarity system, ordered lambda_1..lambda_k, mu_1..mu_l.
  Eigen::VectorXd gradient_residuals(const Params& params) const;
  /// d objective / d theta = gradient_scale() * gradient_residuals.
  double gradient_scale() const { return gradient_scale_; }
  /// Round-off level of gradient_residuals for this source curve.
  double residual_floor() const { return residual_floor_; }

 private:
  ReductionProblem problem_;
  PhiTable<double> phi_;
  double gradient_scale_{1.0};
  double residual_floor_{0.0};
  std::vector<std::string> warnings_;
};

double objective(const ReductionProblem& problem, const Params& params);
Eigen::VectorXd gradient_residuals(const ReductionProblem& problem, const Params& params);

/// Exact minimizer of the quadratic objective with lambda_1 >= d0, mu_1 >= d1.
/// Fixed parameters keep their value from `initial`.
SolveResult solve_qp(const Reducer& reducer, const Params& initial, FixedParameters fixed = {});

/// Bound-constrained local minimization for the quartic and sextic cases.
SolveResult solve_nlp(const Reducer& reducer, const Params& initial, FixedParameters fixed = {},
                      const optim::NewtonOptions& options = {});

/// C^{p,q}/G^{k,l} parameters from the linear stationarity system, falling
/// back to solve_qp when a free lambda_1 or mu_1 comes out nonpositive.
SolveResult solve_linear_cg(const Reducer& reducer);

struct ReductionOptions {
  int max_degree{kDefaultMaxDegree};
  int grid{kDefaultGrid};
  optim::NewtonOptions nlp;
};

struct Diagnostics {
  SolverReport solver;
  double gram_condition{1.0};
  std::vector<std::string> warnings;
  double phase_a_seconds{0.0};
  double phase_b_seconds{0.0};
};

struct ReductionResult {
  Curve reduced;
  Params params;
  double e2{0.0};
  double einf{0.0};
  Diagnostics diagnostics;
};

ReductionResult reduce(const ReductionProblem& problem, Mode mode, const ReductionOptions& options = {});

/// Inner points from the normal equations of the constrained least-squares
/// problem; an independent check on inner_points.
Points oracle_normal_equations(const ReductionProblem& problem, const Boundary& boundary);

}  // namespace bezred
