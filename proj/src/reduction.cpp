#include "bezred/reduction.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace bezred {

namespace {

// Flat jet layout: lambda_1..lambda_k, then mu_1..mu_l.
struct ParamLayout {
  int k{0};
  int l{0};
  std::vector<int> free;  // flat indices not held fixed

  ParamLayout(int k_order, int l_order, FixedParameters fixed) : k(std::max(k_order, 0)), l(std::max(l_order, 0)) {
    for (int i = 0; i < k + l; ++i) {
      if (i == 0 && k >= 1 && fixed.lambda1) continue;
      if (i == k && l >= 1 && fixed.mu1) continue;
      free.push_back(i);
    }
  }

  int size() const { return static_cast<int>(free.size()); }

  std::string name(int flat) const {
    return flat < k ? "lambda" + std::to_string(flat + 1) : "mu" + std::to_string(flat - k + 1);
  }

  Eigen::VectorXd flatten(const Params& p) const {
    Eigen::VectorXd v(k + l);
    v << p.lambdas, p.mus;
    return v;
  }

  Params with_free(const Params& base, const Eigen::VectorXd& x) const {
    Eigen::VectorXd v = flatten(base);
    for (int a = 0; a < size(); ++a) v(free[a]) = x(a);
    return Params{v.head(k), v.tail(l)};
  }

  Eigen::VectorXd free_values(const Params& p) const {
    const Eigen::VectorXd v = flatten(p);
    Eigen::VectorXd x(size());
    for (int a = 0; a < size(); ++a) x(a) = v(free[a]);
    return x;
  }

  Eigen::VectorXd restrict(const Eigen::VectorXd& full) const {
    Eigen::VectorXd x(size());
    for (int a = 0; a < size(); ++a) x(a) = full(free[a]);
    return x;
  }

  // Positivity bounds apply to lambda_1 and mu_1 only.
  Eigen::VectorXd lower(const ContinuitySpec& spec) const {
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(size(), optim::kUnbounded);
    for (int a = 0; a < size(); ++a) {
      if (k >= 1 && free[a] == 0) lo(a) = spec.d0;
      if (l >= 1 && free[a] == k) lo(a) = spec.d1;
    }
    return lo;
  }
};

void check_params(const Reducer& r, const Params& p) {
  if (p.lambdas.size() != std::max(r.k(), 0) || p.mus.size() != std::max(r.l(), 0)) {
    throw DomainError("continuity parameters do not match the orders (k=" + std::to_string(r.k()) +
                      ", l=" + std::to_string(r.l()) + ")");
  }
}

[[noreturn]] void rethrow_in(const std::string& where) {
  try {
    throw;
  } catch (const IllConditionedError& e) {
    throw IllConditionedError(where + ": " + e.what(), e.condition());
  } catch (const DegenerateProblemError& e) {
    throw DegenerateProblemError(where + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(where + ": " + e.what());
  } catch (const UnsupportedOrderError& e) {
    throw UnsupportedOrderError(where + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(where + ": " + e.what());
  }
}

std::vector<std::string> bound_names(const ParamLayout& layout, const std::vector<int>& active) {
  std::vector<std::string> names;
  for (int a : active) names.push_back(layout.name(layout.free[a]));
  return names;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::c: return "c";
    case Mode::cg: return "cg";
    case Mode::g: return "g";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  if (text == "c") return Mode::c;
  if (text == "cg") return Mode::cg;
  if (text == "g") return Mode::g;
  throw DomainError("unknown mode '" + std::string(text) + "' (expected c, cg or g)");
}

void ReductionProblem::validate(int max_degree) const {
  const int n = source.degree();
  const int m = target_degree;
  if (!(n > m && m > 0)) {
    throw DomainError("assumption violated: n > m > 0 (n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")");
  }
  if (n > max_degree) {
    throw DomainError("source degree n=" + std::to_string(n) + " exceeds the supported maximum " +
                      std::to_string(max_degree) + " for double precision (raise max_degree to override)");
  }
  check_order(spec.k, "k");
  check_order(spec.l, "l");
  if (!(spec.k + spec.l < m - 1)) {
    throw DomainError("assumption violated: k + l < m - 1 (k=" + std::to_string(spec.k) +
                      ", l=" + std::to_string(spec.l) + ", m=" + std::to_string(m) + ")");
  }
  if (!(spec.d0 > 0.0) || !(spec.d1 > 0.0)) throw DomainError("assumption violated: d0, d1 > 0");
  if (!(weight.alpha > -1.0) || !(weight.beta > -1.0)) throw DomainError("assumption violated: alpha, beta > -1");
  if (!source.points().allFinite()) throw DomainError("source control points must be finite");
}

Points upsilon(const Curve& source, int m, const Boundary& boundary) {
  const int n = source.degree();
  const int k = static_cast<int>(boundary.start.rows()) - 1;
  const int l = static_cast<int>(boundary.end.rows()) - 1;
  if (n < m) throw DomainError("upsilon: source degree below target degree");
  Points v = source.points();
  // Subtract the degree-n image of r_h B_h^m; entries are nonzero for
  // h <= j <= h + n - m and follow a two-term ratio recurrence in j.
  auto subtract = [&](int h, const auto& rh) {
    double e = binomial(m, h) / binomial(n, h);
    v.row(h) -= e * rh;
    for (int j = h; j < h + n - m; ++j) {
      e *= double(n - m - (j - h)) / double(j + 1 - h) * double(j + 1) / double(n - j);
      v.row(j + 1) -= e * rh;
    }
  };
  for (int h = 0; h <= k; ++h) subtract(h, boundary.start.row(h));
  for (int s = 0; s <= l; ++s) subtract(m - l + s, boundary.end.row(s));
  return v;
}

Points inner_points(const Points& upsilons, const PhiTable<double>& phi) {
  if (upsilons.rows() != phi.n + 1) throw DomainError("inner_points: upsilon length does not match the table");
  Points r(phi.rows(), upsilons.cols());
  r.noalias() = phi.entries * upsilons;
  return r;
}

double squared_error(const Curve& p, const Curve& r, const Weight& w) {
  if (p.dimension() != r.dimension()) {
    throw DomainError("squared_error: dimension mismatch (" + std::to_string(p.dimension()) + " vs " +
                      std::to_string(r.dimension()) + ")");
  }
  // I_NN(p,p) + I_MM(r,r) - 2 I_NM(p,r) equals I_NN(d,d) for the difference
  // d of both curves at the common degree; the latter avoids cancellation.
  const int degree = std::max(p.degree(), r.degree());
  const Points diff = elevate(p, degree).points() - elevate(r, degree).points();
  const Matrix<double> gram = bernstein_cross_gram(degree, degree, w);
  double e = 0.0;
  for (int h = 0; h < p.dimension(); ++h) e += diff.col(h).dot(gram * diff.col(h));
  return std::max(e, 0.0);
}

double max_error(const Curve& p, const Curve& r, int grid) {
  if (grid < 1) throw DomainError("max_error: grid size must be at least 1");
  if (p.dimension() != r.dimension()) throw DomainError("max_error: dimension mismatch");
  double worst = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double t = double(i) / double(grid);
    worst = std::max(worst, (evaluate(p, t) - evaluate(r, t)).norm());
  }
  return worst;
}

Reducer::Reducer(ReductionProblem problem, int max_degree) : problem_(std::move(problem)) {
  problem_.validate(max_degree);
  const int n = problem_.n();
  const int m = problem_.m();
  const auto& spec = problem_.spec;
  const auto& w = problem_.weight;
  phi_ = phi_table(n, m, spec.k, spec.l, w);

  gradient_scale_ = 2.0 * beta_function(w.alpha + 1.0, w.beta + 1.0) / pochhammer(w.alpha + w.beta + 2.0, m);

  const auto& p = problem_.source.points();
  double f_scale = 0.0;
  for (int h = 0; h < problem_.source.dimension(); ++h)
    for (int j = 0; j <= m; ++j) f_scale = std::max(f_scale, std::abs(f_form(p.col(h), j, m, w)));
  residual_floor_ = 100.0 * std::numeric_limits<double>::epsilon() * f_scale * double(n + 1);

  const double size = p.cwiseAbs().maxCoeff();
  const double tiny = 1e-14 * std::max(size, 1e-300);
  if (spec.k >= 1 && forward_difference(p, 1, 0).norm() <= tiny) {
    warnings_.push_back("degenerate start tangent: lambda parameters are not identifiable");
  }
  if (spec.l >= 1 && forward_difference(p, 1, n - 1).norm() <= tiny) {
    warnings_.push_back("degenerate end tangent: mu parameters are not identifiable");
  }
}

Boundary Reducer::boundary(const Params& params) const {
  check_params(*this, params);
  const int m = problem_.m();
  return Boundary{start_boundary(problem_.source, m, k(), params.lambdas),
                  end_boundary(problem_.source, m, l(), params.mus)};
}

Curve Reducer::assemble(const Params& params) const {
  const int m = problem_.m();
  const Boundary b = boundary(params);
  const Points v = upsilon(problem_.source, m, b);
  Points r(m + 1, problem_.source.dimension());
  r.topRows(k() + 1) = b.start;
  r.middleRows(k() + 1, phi_.rows()).noalias() = phi_.entries * v;
  r.bottomRows(l() + 1) = b.end;
  return Curve(std::move(r));
}

double Reducer::objective(const Params& params) const {
  return squared_error(problem_.source, assemble(params), problem_.weight);
}

Eigen::VectorXd Reducer::gradient_residuals(const Params& params) const {
  const int m = problem_.m();
  const int kk = std::max(k(), 0);
  const int ll = std::max(l(), 0);
  const int d = problem_.source.dimension();
  const auto& w = problem_.weight;
  const auto& p = problem_.source.points();
  const Curve reduced = assemble(params);
  const auto& r = reduced.points();

  // F_mj(r^h) - F_nj(p^h)
  Points fdiff(m + 1, d);
  for (int h = 0; h < d; ++h)
    for (int j = 0; j <= m; ++j) fdiff(j, h) = f_form(r.col(h), j, m, w) - f_form(p.col(h), j, m, w);

  Eigen::VectorXd res = Eigen::VectorXd::Zero(kk + ll);
  for (int u = 1; u <= kk; ++u) {
    const Points bp = start_partials(problem_.source, m, k(), params.lambdas, u);
    const Points ip = inner_partials(phi_, bp, Side::start);
    double acc = 0.0;
    for (int j = u; j <= k(); ++j) acc += fdiff.row(j).dot(bp.row(j));
    for (int j = k() + 1; j <= m - l() - 1; ++j) acc += fdiff.row(j).dot(ip.row(j - k() - 1));
    res(u - 1) = acc;
  }
  for (int v = 1; v <= ll; ++v) {
    const Points bp = end_partials(problem_.source, m, l(), params.mus, v);
    const Points ip = inner_partials(phi_, bp, Side::end);
    double acc = 0.0;
    for (int j = k() + 1; j <= m - l() - 1; ++j) acc += fdiff.row(j).dot(ip.row(j - k() - 1));
    for (int j = m - l(); j <= m - v; ++j) acc += fdiff.row(j).dot(bp.row(j - (m - l())));
    res(kk + v - 1) = acc;
  }
  return res;
}

double objective(const ReductionProblem& problem, const Params& params) {
  return Reducer(problem).objective(params);
}

Eigen::VectorXd gradient_residuals(const ReductionProblem& problem, const Params& params) {
  return Reducer(problem).gradient_residuals(params);
}

namespace {

// Affine map x -> free residuals; exact for objectives quadratic in the free parameters.
Eigen::MatrixXd residual_jacobian(const Reducer& reducer, const ParamLayout& layout, const Params& base,
                                  const Eigen::VectorXd& x0, const Eigen::VectorXd& g0) {
  Eigen::MatrixXd jac(layout.size(), layout.size());
  for (int a = 0; a < layout.size(); ++a) {
    Eigen::VectorXd x = x0;
    x(a) += 1.0;
    jac.col(a) = layout.restrict(reducer.gradient_residuals(layout.with_free(base, x))) - g0;
  }
  return jac;
}

SolveResult solve_linear_system(const Reducer& reducer, FixedParameters fixed) {
  const ParamLayout layout(reducer.k(), reducer.l(), fixed);
  const Params initial = identity_jet(reducer.k(), reducer.l());
  SolveResult out{initial, {}};
  out.report.route = "linear";
  out.report.starts = 1;
  if (layout.size() == 0) return out;

  const Eigen::VectorXd x0 = layout.free_values(initial);
  const Eigen::VectorXd g0 = layout.restrict(reducer.gradient_residuals(initial));
  const Eigen::MatrixXd jac = residual_jacobian(reducer, layout, initial, x0, g0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
  lu.setThreshold(1e-12);
  if (lu.rank() < layout.size()) {
    std::ostringstream msg;
    msg << "linear parameter system is singular (rank " << lu.rank() << " of " << layout.size()
        << "); a continuity parameter is not identifiable";
    throw DegenerateProblemError(msg.str());
  }
  const Eigen::VectorXd x = x0 - lu.solve(g0);
  out.params = layout.with_free(initial, x);
  out.report.iterations = 1;
  out.report.residual_norm = layout.restrict(reducer.gradient_residuals(out.params)).lpNorm<Eigen::Infinity>();
  return out;
}

}  // namespace

SolveResult solve_qp(const Reducer& reducer, const Params& initial, FixedParameters fixed) {
  check_params(reducer, initial);
  const ParamLayout layout(reducer.k(), reducer.l(), fixed);
  SolveResult out{initial, {}};
  out.report.route = "qp";
  out.report.starts = 1;
  if (layout.size() == 0) return out;

  const Eigen::VectorXd x0 = layout.free_values(initial);
  const Eigen::VectorXd g0 = layout.restrict(reducer.gradient_residuals(initial));
  const Eigen::MatrixXd hess = residual_jacobian(reducer, layout, initial, x0, g0);
  const Eigen::VectorXd lower = layout.lower(reducer.problem().spec);
  const auto qp = optim::minimize_bounded_quadratic(hess, g0, lower - x0);

  // Offsets are relative to x0; clamp so active bounds hold exactly.
  Eigen::VectorXd x = (x0 + qp.x).cwiseMax(lower);
  for (int a : qp.active) x(a) = lower(a);
  out.params = layout.with_free(initial, x);
  out.report.iterations = 1;
  out.report.active_bounds = bound_names(layout, qp.active);
  const Eigen::VectorXd g = layout.restrict(reducer.gradient_residuals(out.params));
  out.report.residual_norm = optim::projected_gradient(x, g, lower).lpNorm<Eigen::Infinity>();
  return out;
}

SolveResult solve_nlp(const Reducer& reducer, const Params& initial, FixedParameters fixed,
                      const optim::NewtonOptions& options) {
  check_params(reducer, initial);
  const ParamLayout layout(reducer.k(), reducer.l(), fixed);
  SolveResult out{initial, {}};
  out.report.route = "nlp";
  if (layout.size() == 0) return out;

  const double scale = reducer.gradient_scale();
  const optim::ObjectiveFn f = [&](const Eigen::VectorXd& x) {
    return reducer.objective(layout.with_free(initial, x)) / scale;
  };
  const optim::GradientFn grad = [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(layout.restrict(reducer.gradient_residuals(layout.with_free(initial, x))));
  };
  const Eigen::VectorXd lower = layout.lower(reducer.problem().spec);
  const Eigen::VectorXd x0 = layout.free_values(initial).cwiseMax(lower);
  const double f0 = f(x0);

  optim::NewtonResult best = optim::minimize_bounded_newton(f, grad, x0, lower, options, reducer.residual_floor());
  int starts = 1;
  const bool stationary_start = best.converged && best.iterations == 0;
  if (!(best.value < f0) && !stationary_start) {
    // No descent from the given start: retry from perturbed lambda_1 / mu_1.
    for (double sl : {0.5, 1.5}) {
      for (double sm : {0.5, 1.5}) {
        Eigen::VectorXd xs = x0;
        for (int a = 0; a < layout.size(); ++a) {
          if (layout.k >= 1 && layout.free[a] == 0) xs(a) *= sl;
          if (layout.l >= 1 && layout.free[a] == layout.k) xs(a) *= sm;
        }
        ++starts;
        auto trial = optim::minimize_bounded_newton(f, grad, xs, lower, options, reducer.residual_floor());
        if (trial.value < best.value) best = trial;
      }
    }
  }

  out.params = layout.with_free(initial, best.x);
  out.report.iterations = best.iterations;
  out.report.converged = best.converged;
  out.report.residual_norm = best.projected_gradient;
  out.report.starts = starts;
  out.report.active_bounds = bound_names(layout, best.active);
  if (!best.converged) {
    std::ostringstream msg;
    msg << "nlp stopped before reaching the gradient tolerance; final projected residual "
        << best.projected_gradient;
    out.report.warnings.push_back(msg.str());
  }
  return out;
}

SolveResult solve_linear_cg(const Reducer& reducer) {
  const auto& spec = reducer.problem().spec;
  if (spec.k >= 2 && !spec.p_fixed) {
    throw DomainError("C^{p,q}/G^{k,l} reduction with k >= 2 requires lambda_1 pinned (p fixed)");
  }
  if (spec.l >= 2 && !spec.q_fixed) {
    throw DomainError("C^{p,q}/G^{k,l} reduction with l >= 2 requires mu_1 pinned (q fixed)");
  }
  const FixedParameters fixed{spec.k >= 2, spec.l >= 2};
  SolveResult out = solve_linear_system(reducer, fixed);
  const bool bad_start = spec.k == 1 && !(out.params.lambdas(0) > 0.0);
  const bool bad_end = spec.l == 1 && !(out.params.mus(0) > 0.0);
  if (bad_start || bad_end) {
    SolveResult qp = solve_qp(reducer, identity_jet(spec.k, spec.l), fixed);
    qp.report.route = "linear+qp";
    qp.report.warnings.push_back("linear solution violated positivity; re-solved with bounds");
    return qp;
  }
  return out;
}

ReductionResult reduce(const ReductionProblem& problem, Mode mode, const ReductionOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();
  std::string step = "Phase A, Step I";
  try {
    const Reducer reducer(problem, options.max_degree);
    const int k = problem.spec.k;
    const int l = problem.spec.l;
    Params params = identity_jet(k, l);
    SolverReport report;

    step = "Phase A, Step V";
    if (k >= 1 || l >= 1) {
      switch (mode) {
        case Mode::c:
          report.route = "identity";
          break;
        case Mode::cg: {
          auto solved = solve_linear_cg(reducer);
          params = solved.params;
          report = solved.report;
          break;
        }
        case Mode::g: {
          if (k > 1 || l > 1) {
            auto solved = solve_nlp(reducer, params, {}, options.nlp);
            // Also descend from the hybrid solution, which is feasible here.
            try {
              auto hybrid = solve_linear_system(reducer, FixedParameters{k >= 2, l >= 2});
              const bool feasible = (k < 1 || hybrid.params.lambdas(0) >= problem.spec.d0) &&
                                    (l < 1 || hybrid.params.mus(0) >= problem.spec.d1);
              if (feasible) {
                auto second = solve_nlp(reducer, hybrid.params, {}, options.nlp);
                if (reducer.objective(second.params) < reducer.objective(solved.params)) {
                  second.report.starts += solved.report.starts;
                  solved = second;
                } else {
                  solved.report.starts += second.report.starts;
                }
              }
            } catch (const DegenerateProblemError&) {
            }
            params = solved.params;
            report = solved.report;
          } else {
            auto solved = solve_qp(reducer, params);
            params = solved.params;
            report = solved.report;
          }
          break;
        }
      }
    }
    const double phase_a = seconds_since(t_start);

    step = "Phase B, Steps VI-VIII";
    const auto t_b = std::chrono::steady_clock::now();
    Curve reduced = reducer.assemble(params);
    const double phase_b = seconds_since(t_b);

    step = "Step IX";
    ReductionResult result;
    result.e2 = std::sqrt(squared_error(problem.source, reduced, problem.weight));
    result.einf = max_error(problem.source, reduced, options.grid);
    if (!std::isfinite(result.e2) || !reduced.points().allFinite()) {
      throw NumericalError("non-finite reduced curve");
    }
    result.reduced = std::move(reduced);
    result.params = params;
    result.diagnostics.solver = report;
    result.diagnostics.gram_condition = reducer.phi().gram_condition;
    result.diagnostics.warnings = reducer.warnings();
    result.diagnostics.warnings.insert(result.diagnostics.warnings.end(), report.warnings.begin(),
                                       report.warnings.end());
    result.diagnostics.phase_a_seconds = phase_a;
    result.diagnostics.phase_b_seconds = phase_b;
    return result;
  } catch (...) {
    rethrow_in(step);
  }
}

Points oracle_normal_equations(const ReductionProblem& problem, const Boundary& boundary) {
  const int m = problem.m();
  const int k = problem.spec.k;
  const int l = problem.spec.l;
  const auto& w = problem.weight;
  if (boundary.start.rows() != k + 1 || boundary.end.rows() != l + 1) {
    throw DomainError("oracle_normal_equations: boundary does not match the orders");
  }
  const GramMatrix<double> gram = constrained_gram(m, k, l, w);
  const double cond = condition_estimate(gram);
  if (!(cond < 1e13)) throw IllConditionedError("oracle_normal_equations: Gram matrix is ill-conditioned", cond);

  const int d = problem.source.dimension();
  Points rhs(gram.size(), d);
  for (int a = 0; a < gram.size(); ++a) {
    const int i = k + 1 + a;
    const Eigen::VectorXd unit = Eigen::VectorXd::Unit(m + 1, i);
    for (int h = 0; h < d; ++h) {
      double value = inner_product(problem.source.coordinate(h), unit, w);
      for (int b = 0; b <= k; ++b) value -= boundary.start(b, h) * bernstein_inner(m, b, m, i, w);
      for (int s = 0; s <= l; ++s) value -= boundary.end(s, h) * bernstein_inner(m, m - l + s, m, i, w);
      rhs(a, h) = value;
    }
  }
  return gram.entries.colPivHouseholderQr().solve(Matrix<double>(rhs));
}

}  // namespace bezred
