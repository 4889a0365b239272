#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <vector>

namespace aggtherm::solver {

/// minimize f(v) subject to c(v) = 0 and lower <= v <= upper.
struct Problem {
  std::function<double(const Eigen::VectorXd&)> objective;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> objective_gradient;
  // Writes c(v), size m. Leave empty (m == 0) for box-only problems.
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> constraints;
  // Writes J(v)^T y, size n.
  std::function<void(const Eigen::VectorXd&, const Eigen::VectorXd&, Eigen::VectorXd&)>
      constraint_jtv;
  // Optional Gauss-Newton diagonal of the augmented-Lagrangian Hessian,
  // diag(hess f) + rho * diag(J^T J); used to precondition the inner solver.
  std::function<void(const Eigen::VectorXd&, double, Eigen::VectorXd&)> hessian_diag;
  Eigen::VectorXd lower, upper;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
};

struct Options {
  double kkt_tol = 1e-6;
  double constraint_tol = 1e-8;
  int max_outer = 50;
  int max_inner = 500;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double max_penalty = 1e12;
  double initial_inner_tol = 1e-2;
  double inner_tol_shrink = 0.3;
  // Multipliers are updated while the constraint violation keeps falling by
  // this factor per outer iteration; the penalty grows only on a stall.
  double feasibility_progress = 0.3;
  int lbfgs_memory = 10;
  double armijo_c = 1e-4;
  int max_line_search = 50;
  int precondition_refresh = 25;  // inner iterations between diagonal refreshes
};

/// One outer iteration of the augmented-Lagrangian loop. merit_start and
/// merit_end are the augmented Lagrangian at this iteration's fixed
/// multipliers and penalty, before and after the inner minimization; the
/// inner solver only ever accepts descent steps, so merit_end <= merit_start.
struct OuterLog {
  double penalty = 0;
  double merit_start = 0;
  double merit_end = 0;
  double constraint_inf = 0;
  double stationarity = 0;
  int inner_iterations = 0;
  bool dual_updated = false;
};

struct Result {
  Eigen::VectorXd v;
  Eigen::VectorXd multipliers;
  double kkt_residual = std::numeric_limits<double>::infinity();
  double constraint_inf = 0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
  std::vector<OuterLog> trace;
};

Result minimize(const Problem& problem, const Eigen::VectorXd& v0,
                const Options& options);

}  // namespace aggtherm::solver
