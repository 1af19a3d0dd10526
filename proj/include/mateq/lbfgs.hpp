#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

namespace mateq {

struct LbfgsOptions {
  std::size_t memory = 10;
  double armijo_c1 = 1e-4;
  double shrink = 0.5;
  std::size_t max_backtracks = 30;
  double grad_tol = 1e-8;
  double rel_decrease_tol = 1e-12;
  std::size_t max_iters = 100;
};

enum class LbfgsStatus {
  converged_gradient,
  converged_loss,
  stationary_start,
  max_iterations,
  line_search_failed,
};

struct LbfgsIterate {
  std::size_t iter;
  double loss;
  double aux_norm;   // caller-defined norm of the iterate (e.g. ||Q||_F)
  double grad_norm;
  double step;       // step length that produced this iterate (0 at start)
};

struct LbfgsResult {
  std::vector<double> x;
  double loss = std::numeric_limits<double>::infinity();
  LbfgsStatus status = LbfgsStatus::max_iterations;
  std::vector<LbfgsIterate> trace;
};

/// Objective: fills grad (same length as x) and returns the loss. May throw;
/// a throwing evaluation inside the line search is treated as infinite loss.
using LbfgsObjective =
    std::function<double(const std::vector<double>&, std::vector<double>&)>;

namespace detail {

inline double vdot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double vnorm(const std::vector<double>& a) {
  return std::sqrt(vdot(a, a));
}

inline void axpy(double alpha, const std::vector<double>& x,
                 std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace detail

/// L-BFGS with two-loop recursion and Armijo backtracking.
/// aux_norm, when given, is recorded per iterate in the trace.
inline LbfgsResult lbfgs_minimize(
    const LbfgsObjective& objective, std::vector<double> x0,
    const LbfgsOptions& opts = {},
    const std::function<double(const std::vector<double>&)>& aux_norm = {}) {
  const std::size_t dim = x0.size();
  LbfgsResult result;
  auto record = [&](std::size_t iter, double f, const std::vector<double>& x,
                    double gnorm, double step) {
    result.trace.push_back(
        {iter, f, aux_norm ? aux_norm(x) : detail::vnorm(x), gnorm, step});
  };

  std::vector<double> x = std::move(x0);
  std::vector<double> grad(dim, 0.0);
  double f = objective(x, grad);
  double gnorm = detail::vnorm(grad);
  record(0, f, x, gnorm, 0.0);
  result.x = x;
  result.loss = f;

  if (gnorm <= opts.grad_tol) {
    result.status = LbfgsStatus::stationary_start;
    return result;
  }

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> mem;

  for (std::size_t iter = 1; iter <= opts.max_iters; ++iter) {
    // two-loop recursion
    std::vector<double> d = grad;
    std::vector<double> alphas(mem.size());
    for (std::size_t i = mem.size(); i-- > 0;) {
      alphas[i] = mem[i].rho * detail::vdot(mem[i].s, d);
      detail::axpy(-alphas[i], mem[i].y, d);
    }
    if (!mem.empty()) {
      const Pair& last = mem.back();
      const double gamma =
          detail::vdot(last.s, last.y) / detail::vdot(last.y, last.y);
      for (double& v : d) v *= gamma;
    }
    for (std::size_t i = 0; i < mem.size(); ++i) {
      const double beta = mem[i].rho * detail::vdot(mem[i].y, d);
      detail::axpy(alphas[i] - beta, mem[i].s, d);
    }
    for (double& v : d) v = -v;

    double dir_deriv = detail::vdot(grad, d);
    if (dir_deriv >= 0.0) {
      // not a descent direction; fall back to steepest descent
      for (std::size_t i = 0; i < dim; ++i) d[i] = -grad[i];
      dir_deriv = -gnorm * gnorm;
      mem.clear();
    }

    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    std::vector<double> x_new(dim), grad_new(dim, 0.0);
    bool accepted = false;
    for (std::size_t bt = 0; bt <= opts.max_backtracks; ++bt) {
      x_new = x;
      detail::axpy(step, d, x_new);
      try {
        f_new = objective(x_new, grad_new);
      } catch (...) {
        f_new = std::numeric_limits<double>::infinity();
      }
      if (std::isfinite(f_new) && f_new <= f + opts.armijo_c1 * step * dir_deriv) {
        accepted = true;
        break;
      }
      step *= opts.shrink;
    }
    if (!accepted) {
      result.status = LbfgsStatus::line_search_failed;
      return result;
    }

    Pair pair;
    pair.s.resize(dim);
    pair.y.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      pair.s[i] = x_new[i] - x[i];
      pair.y[i] = grad_new[i] - grad[i];
    }
    const double sy = detail::vdot(pair.s, pair.y);
    if (sy > 1e-12 * detail::vnorm(pair.s) * detail::vnorm(pair.y)) {
      pair.rho = 1.0 / sy;
      mem.push_back(std::move(pair));
      if (mem.size() > opts.memory) mem.pop_front();
    }

    const double f_old = f;
    x = std::move(x_new);
    grad = grad_new;
    f = f_new;
    gnorm = detail::vnorm(grad);
    record(iter, f, x, gnorm, step);
    result.x = x;
    result.loss = f;

    if (gnorm <= opts.grad_tol) {
      result.status = LbfgsStatus::converged_gradient;
      return result;
    }
    if (std::abs(f_old - f) <= opts.rel_decrease_tol * std::max(1.0, std::abs(f_old))) {
      result.status = LbfgsStatus::converged_loss;
      return result;
    }
  }
  result.status = LbfgsStatus::max_iterations;
  return result;
}

}  // namespace mateq
