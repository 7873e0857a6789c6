#include "bezred/optimize.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bezred/errors.hpp"

namespace bezred::optim {

namespace {

bool at_bound(double x, double lower) {
  return std::isfinite(lower) && x - lower <= 1e-12 * (1.0 + std::abs(lower));
}

double quadratic_value(const Eigen::MatrixXd& h, const Eigen::VectorXd& g, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(h * x) + g.dot(x);
}

}  // namespace

BoundedQuadraticResult minimize_bounded_quadratic(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& gradient,
                                                  const Eigen::VectorXd& lower) {
  const Eigen::Index n = gradient.size();
  if (hessian.rows() != n || hessian.cols() != n || lower.size() != n) {
    throw DomainError("minimize_bounded_quadratic: inconsistent dimensions");
  }
  if (n == 0) return {Eigen::VectorXd(), 0.0, {}};

  const Eigen::MatrixXd h = 0.5 * (hessian + hessian.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw NumericalError("minimize_bounded_quadratic: quadratic model is indefinite (min eigenvalue " +
                         std::to_string(eig.eigenvalues().minCoeff()) + ")");
  }

  std::vector<int> bounded;
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::isfinite(lower(i))) bounded.push_back(static_cast<int>(i));
  if (bounded.size() > 16) throw DomainError("minimize_bounded_quadratic: too many bounded variables");

  bool found = false;
  BoundedQuadraticResult best;
  for (unsigned mask = 0; mask < (1u << bounded.size()); ++mask) {
    std::vector<bool> active(n, false);
    for (size_t b = 0; b < bounded.size(); ++b)
      if (mask & (1u << b)) active[bounded[b]] = true;

    std::vector<int> free_idx;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active[i]) x(i) = lower(i);
      else free_idx.push_back(static_cast<int>(i));
    }

    if (!free_idx.empty()) {
      const Eigen::Index f = static_cast<Eigen::Index>(free_idx.size());
      Eigen::MatrixXd hff(f, f);
      Eigen::VectorXd rhs(f);
      for (Eigen::Index a = 0; a < f; ++a) {
        rhs(a) = -gradient(free_idx[a]);
        for (Eigen::Index j = 0; j < n; ++j)
          if (active[j]) rhs(a) -= h(free_idx[a], j) * x(j);
        for (Eigen::Index b = 0; b < f; ++b) hff(a, b) = h(free_idx[a], free_idx[b]);
      }
      const Eigen::VectorXd xf = hff.completeOrthogonalDecomposition().solve(rhs);
      // An inconsistent singular system means the objective is unbounded
      // along this face; such a configuration holds no minimizer.
      const double resid = (hff * xf - rhs).norm();
      if (!(resid <= 1e-9 * (rhs.norm() + hff.norm() * xf.norm() + 1e-300))) continue;
      for (Eigen::Index a = 0; a < f; ++a) x(free_idx[a]) = xf(a);
    }

    bool feasible = true;
    for (int i : bounded)
      if (x(i) < lower(i) - 1e-12 * (1.0 + std::abs(lower(i)))) feasible = false;
    if (!feasible) continue;

    const double value = quadratic_value(h, gradient, x);
    if (!found || value < best.value - 1e-14 * std::abs(best.value)) {
      found = true;
      best.x = x;
      best.value = value;
      best.active.clear();
      for (Eigen::Index i = 0; i < n; ++i)
        if (active[i]) best.active.push_back(static_cast<int>(i));
    }
  }
  if (!found) throw NumericalError("minimize_bounded_quadratic: no feasible active-set configuration");
  return best;
}

Eigen::VectorXd trust_region_step(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& gradient, double radius) {
  const Eigen::Index n = gradient.size();
  if (n == 0) return Eigen::VectorXd();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (hessian + hessian.transpose()));
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const Eigen::MatrixXd& v = eig.eigenvectors();
  const Eigen::VectorXd gt = v.transpose() * gradient;
  const double lam_min = lam.minCoeff();

  auto step_for = [&](double shift) {
    Eigen::VectorXd s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = lam(i) + shift;
      s(i) = d > 0.0 ? -gt(i) / d : 0.0;
    }
    return s;
  };

  if (lam_min > 0.0) {
    const Eigen::VectorXd s = step_for(0.0);
    if (s.norm() <= radius) return v * s;
  }

  const double lo = std::max(0.0, -lam_min);
  const double tiny = 1e-14 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  if (step_for(lo + tiny).norm() < radius) {
    // Hard case: the gradient has no component along the lowest eigenvector.
    Eigen::VectorXd s = step_for(lo + tiny);
    Eigen::Index idx = 0;
    lam.minCoeff(&idx);
    const double tau = std::sqrt(std::max(0.0, radius * radius - s.squaredNorm()));
    s(idx) += tau;
    return v * s;
  }

  double a = lo + tiny;
  double b = lo + gradient.norm() / radius + tiny;
  for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
    const double mid = 0.5 * (a + b);
    if (step_for(mid).norm() > radius) a = mid;
    else b = mid;
  }
  return v * step_for(b);
}

Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& gradient,
                                   const Eigen::VectorXd& lower) {
  Eigen::VectorXd pg = gradient;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (at_bound(x(i), lower(i)) && gradient(i) > 0.0) pg(i) = 0.0;
  return pg;
}

NewtonResult minimize_bounded_newton(const ObjectiveFn& objective, const GradientFn& gradient, Eigen::VectorXd x0,
                                     const Eigen::VectorXd& lower, const NewtonOptions& options,
                                     double gradient_floor) {
  const Eigen::Index n = x0.size();
  if (lower.size() != n) throw DomainError("minimize_bounded_newton: bound vector has the wrong size");
  Eigen::VectorXd x = x0.cwiseMax(lower);
  NewtonResult result;
  double f = objective(x);
  const double f_start = f;
  Eigen::VectorXd g = gradient(x);
  double radius = options.initial_radius;
  const double tol = std::max(options.gradient_tolerance, gradient_floor);

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const Eigen::VectorXd pg = projected_gradient(x, g, lower);
    if (pg.lpNorm<Eigen::Infinity>() <= tol) break;

    Eigen::MatrixXd h(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double step = options.hessian_step * std::max(1.0, std::abs(x(i)));
      Eigen::VectorXd xp = x, xm = x;
      xp(i) += step;
      xm(i) -= step;
      h.col(i) = (gradient(xp) - gradient(xm)) / (2.0 * step);
    }
    h = 0.5 * (h + h.transpose()).eval();

    std::vector<int> free_idx;
    for (Eigen::Index i = 0; i < n; ++i)
      if (pg(i) != 0.0 || !at_bound(x(i), lower(i))) free_idx.push_back(static_cast<int>(i));
    const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
    Eigen::MatrixXd hf(nf, nf);
    Eigen::VectorXd gf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      gf(a) = g(free_idx[a]);
      for (Eigen::Index b = 0; b < nf; ++b) hf(a, b) = h(free_idx[a], free_idx[b]);
    }
    const Eigen::VectorXd sf = trust_region_step(hf, gf, radius);
    Eigen::VectorXd trial = x;
    for (Eigen::Index a = 0; a < nf; ++a) trial(free_idx[a]) += sf(a);
    trial = trial.cwiseMax(lower);

    const Eigen::VectorXd d = trial - x;
    const double predicted = -(g.dot(d) + 0.5 * d.dot(h * d));
    const double step_norm = d.norm();
    if (!(predicted > 0.0) || step_norm == 0.0) {
      radius = 0.25 * std::max(step_norm, 0.25 * radius);
    } else {
      const double f_trial = objective(trial);
      const double rho = (f - f_trial) / predicted;
      // Near a minimizer the change in f drowns in rounding; judge the step by the gradient instead.
      const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(f), std::abs(f_trial));
      bool flat_accept = false;
      if (rho > 1e-4 && f_trial < f) {
        x = trial;
        f = f_trial;
        g = gradient(x);
      } else if (std::abs(f - f_trial) <= noise && f_trial <= f_start) {
        const Eigen::VectorXd g_trial = gradient(trial);
        if (projected_gradient(trial, g_trial, lower).lpNorm<Eigen::Infinity>() <= 0.5 * pg.lpNorm<Eigen::Infinity>()) {
          x = trial;
          f = f_trial;
          g = g_trial;
          flat_accept = true;
        }
      }
      if (!flat_accept) {
        if (rho < 0.25) radius = 0.25 * step_norm;
        else if (rho > 0.75 && step_norm >= 0.99 * radius) radius *= 2.0;
      }
    }
    if (radius < 1e-14 * (1.0 + x.norm())) {
      ++it;
      break;
    }
  }

  result.x = x;
  result.value = f;
  result.iterations = it;
  const Eigen::VectorXd pg = projected_gradient(x, g, lower);
  result.projected_gradient = pg.lpNorm<Eigen::Infinity>();
  result.converged = result.projected_gradient <= tol;
  for (Eigen::Index i = 0; i < n; ++i)
    if (at_bound(x(i), lower(i))) result.active.push_back(static_cast<int>(i));
  return result;
}

}  // namespace bezred::optim
