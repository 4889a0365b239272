#include "aggtherm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "aggtherm/error.hpp"

namespace aggtherm::solver {

namespace {

constexpr double kActiveEps = 1e-12;

void project(const Problem& p, Eigen::VectorXd& v) {
  v = v.cwiseMax(p.lower).cwiseMin(p.upper);
}

double projected_gradient_norm(const Problem& p, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& g) {
  double norm = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double step = std::clamp(v[i] - g[i], p.lower[i], p.upper[i]) - v[i];
    norm = std::max(norm, std::abs(step));
  }
  return norm;
}

// Augmented Lagrangian evaluation with a scratch constraint buffer.
struct Merit {
  const Problem& p;
  Eigen::VectorXd c;

  double value(const Eigen::VectorXd& v, const Eigen::VectorXd& mu, double rho) {
    double f = p.objective(v);
    if (p.m > 0) {
      p.constraints(v, c);
      f += mu.dot(c) + 0.5 * rho * c.squaredNorm();
    }
    return f;
  }

  double value_and_gradient(const Eigen::VectorXd& v, const Eigen::VectorXd& mu,
                            double rho, Eigen::VectorXd& grad,
                            Eigen::VectorXd& jtv_scratch) {
    double f = p.objective(v);
    p.objective_gradient(v, grad);
    if (p.m > 0) {
      p.constraints(v, c);
      f += mu.dot(c) + 0.5 * rho * c.squaredNorm();
      p.constraint_jtv(v, (mu + rho * c).eval(), jtv_scratch);
      grad += jtv_scratch;
    }
    return f;
  }
};

struct LbfgsHistory {
  std::deque<Eigen::VectorXd> s, y;
  std::deque<double> rho;
  int memory;
  Eigen::VectorXd h0_diag;  // initial inverse-Hessian diagonal; empty = scaled identity

  explicit LbfgsHistory(int mem) : memory(mem) {}

  void push(const Eigen::VectorXd& si, const Eigen::VectorXd& yi) {
    const double sy = si.dot(yi);
    if (sy <= 1e-10 * si.norm() * yi.norm()) return;  // curvature guard
    s.push_back(si);
    y.push_back(yi);
    rho.push_back(1.0 / sy);
    if (static_cast<int>(s.size()) > memory) {
      s.pop_front();
      y.pop_front();
      rho.pop_front();
    }
  }

  // Two-loop recursion, d = -H g.
  void direction(const Eigen::VectorXd& g, Eigen::VectorXd& d) const {
    d = -g;
    const int k = static_cast<int>(s.size());
    std::vector<double> alpha(static_cast<std::size_t>(k));
    for (int i = k - 1; i >= 0; --i) {
      alpha[static_cast<std::size_t>(i)] =
          rho[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(i)].dot(d);
      d -= alpha[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    }
    if (h0_diag.size() == d.size()) {
      d.array() *= h0_diag.array();
    } else if (k > 0) {
      const auto& y_last = y.back();
      d *= s.back().dot(y_last) / y_last.squaredNorm();
    }
    for (int i = 0; i < k; ++i) {
      const double beta =
          rho[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)].dot(d);
      d += (alpha[static_cast<std::size_t>(i)] - beta) * s[static_cast<std::size_t>(i)];
    }
  }
};

struct InnerResult {
  double merit = 0;
  double stationarity = 0;
  int iterations = 0;
};

// Projected L-BFGS with Armijo backtracking along the projection arc and an
// optional diagonal preconditioner as the initial metric.
InnerResult minimize_inner(const Problem& p, Merit& merit, Eigen::VectorXd& v,
                           const Eigen::VectorXd& mu, double rho, double tol,
                           const Options& opts) {
  const Eigen::Index n = p.n;
  Eigen::VectorXd g(n), jtv(n), d(n), trial(n), g_masked(n), step(n), g_new(n);
  Eigen::VectorXd hd(n);
  LbfgsHistory history(opts.lbfgs_memory);
  auto refresh_preconditioner = [&] {
    if (!p.hessian_diag) return;
    p.hessian_diag(v, rho, hd);
    const double floor = std::max(1e-12, 1e-10 * hd.maxCoeff());
    history.h0_diag = hd.cwiseMax(floor).cwiseInverse();
  };
  refresh_preconditioner();

  double f = merit.value_and_gradient(v, mu, rho, g, jtv);
  InnerResult res;
  res.merit = f;
  res.stationarity = projected_gradient_norm(p, v, g);

  for (int it = 0; it < opts.max_inner; ++it) {
    if (res.stationarity <= tol) break;
    if (it > 0 && opts.precondition_refresh > 0 && it % opts.precondition_refresh == 0)
      refresh_preconditioner();

    // Variables pinned at a bound with the gradient pushing outward take a
    // plain projected-gradient step; the rest get the quasi-Newton direction.
    g_masked = g;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lower = v[i] - p.lower[i] <= kActiveEps && g[i] > 0;
      const bool at_upper = p.upper[i] - v[i] <= kActiveEps && g[i] < 0;
      if (at_lower || at_upper) g_masked[i] = 0;
    }
    history.direction(g_masked, d);
    for (Eigen::Index i = 0; i < n; ++i)
      if (g_masked[i] == 0 && g[i] != 0) d[i] = -g[i];
    if (history.s.empty() && history.h0_diag.size() == 0) {
      const double gn = d.norm();
      if (gn > 1) d /= gn;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1) d = -g;  // quasi-Newton step failed, fall back
      double t = 1.0;
      for (int ls = 0; ls < opts.max_line_search; ++ls, t *= 0.5) {
        trial = v + t * d;
        project(p, trial);
        step = trial - v;
        const double pred = g.dot(step);
        if (pred >= 0) continue;  // not a descent direction after projection
        const double f_trial = merit.value(trial, mu, rho);
        if (f_trial <= f + opts.armijo_c * pred) {
          const double f_new = merit.value_and_gradient(trial, mu, rho, g_new, jtv);
          history.push(step, (g_new - g).eval());
          v.swap(trial);
          g.swap(g_new);
          f = f_new;
          accepted = true;
          break;
        }
      }
    }
    ++res.iterations;
    if (!accepted) break;  // numerically stationary
    res.merit = f;
    res.stationarity = projected_gradient_norm(p, v, g);
  }
  return res;
}

}  // namespace

Result minimize(const Problem& p, const Eigen::VectorXd& v0, const Options& opts) {
  require(p.n == v0.size(), "initial point has the wrong size");
  require(p.lower.size() == p.n && p.upper.size() == p.n,
          "bounds must match the variable count");
  require((p.lower.array() <= p.upper.array()).all(), "empty box constraints");

  Result result;
  result.v = v0;
  project(p, result.v);
  result.multipliers = Eigen::VectorXd::Zero(p.m);

  Merit merit{p, Eigen::VectorXd(p.m)};
  Eigen::VectorXd g(p.n), jtv(p.n);

  if (p.m == 0) {
    const double tol = opts.kkt_tol;
    InnerResult inner = minimize_inner(p, merit, result.v, result.multipliers, 0,
                                       tol, opts);
    result.inner_iterations = inner.iterations;
    result.outer_iterations = 1;
    result.kkt_residual = inner.stationarity;
    result.constraint_inf = 0;
    result.converged = inner.stationarity <= opts.kkt_tol;
    return result;
  }

  double rho = opts.initial_penalty;
  double inner_tol = opts.initial_inner_tol;
  double best_c_inf = std::numeric_limits<double>::infinity();

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    OuterLog log;
    log.penalty = rho;
    log.merit_start = merit.value(result.v, result.multipliers, rho);

    InnerResult inner = minimize_inner(p, merit, result.v, result.multipliers, rho,
                                       inner_tol, opts);
    log.merit_end = inner.merit;
    log.inner_iterations = inner.iterations;
    log.stationarity = inner.stationarity;
    result.inner_iterations += inner.iterations;
    ++result.outer_iterations;

    p.constraints(result.v, merit.c);
    const double c_inf = merit.c.lpNorm<Eigen::Infinity>();
    log.constraint_inf = c_inf;
    result.constraint_inf = c_inf;

    // Keep updating the multipliers while feasibility makes clear progress;
    // escalate the penalty only on a stall well above the tolerance. Near and
    // below the tolerance the penalty is walked back down: the multipliers
    // carry the constraints there, and a smaller penalty keeps the inner
    // problem conditioned and the gradient's rho*c noise floor below kkt_tol.
    if (c_inf <= std::max(opts.feasibility_progress * best_c_inf,
                          10.0 * opts.constraint_tol)) {
      // First-order multiplier update; the stationarity already measured is
      // exactly the KKT residual with the updated multipliers.
      result.multipliers += rho * merit.c;
      log.dual_updated = true;
      result.kkt_residual = inner.stationarity;
      inner_tol = std::max(opts.kkt_tol, inner_tol * opts.inner_tol_shrink);
      if (c_inf <= 0.1 * opts.constraint_tol && rho > opts.initial_penalty)
        rho = std::max(opts.initial_penalty, rho / opts.penalty_growth);
    } else {
      rho = std::min(opts.max_penalty, rho * opts.penalty_growth);
    }
    best_c_inf = std::min(best_c_inf, c_inf);
    result.trace.push_back(log);
    if (log.dual_updated && c_inf <= opts.constraint_tol &&
        inner.stationarity <= opts.kkt_tol) {
      result.converged = true;
      break;
    }
  }

  // Report the KKT residual at the final multipliers.
  p.objective_gradient(result.v, g);
  if (p.m > 0) {
    p.constraint_jtv(result.v, result.multipliers, jtv);
    g += jtv;
  }
  result.kkt_residual = projected_gradient_norm(p, result.v, g);
  return result;
}

}  // namespace aggtherm::solver
