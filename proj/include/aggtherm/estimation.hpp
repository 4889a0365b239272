#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "aggtherm/aggregation.hpp"
#include "aggtherm/solver.hpp"

namespace aggtherm {

/// Continuous-time augmented state-space model with state (Tbar_z, Tbar_w,
/// q_bar_agg) and input (Tbar_a, eta_bar, q_bar_ac). The aggregate load is a
/// constant-by-default extra state, F picks the measured output Tbar_z, and
/// only the load channel carries process noise.
struct AugmentedModel {
  AggregateParams theta;
  Eigen::Matrix3d a;
  Eigen::Matrix3d b;
  Eigen::RowVector3d f;
  Eigen::Vector3d g;
};

AugmentedModel build_augmented_model(const AggregateParams& theta);

/// Forward-Euler one-step map x[k+1] = x[k] + t_s (A x[k] + B u[k]) + G xi[k].
struct DiscreteModel {
  Eigen::Matrix3d a;  // I + t_s A
  Eigen::Matrix3d b;  // t_s B
  Eigen::Vector3d g;
  double t_s = 0;

  Eigen::Vector3d step(const Eigen::Vector3d& x, const Eigen::Vector3d& u,
                       double xi) const {
    return a * x + b * u + g * xi;
  }
};

DiscreteModel discretize(const AugmentedModel& model, double t_s);

struct IdentConfig {
  // Prior on the initial state; filled from the data (z[0], z[0], 0) when
  // x0_prior_auto is set.
  Eigen::Vector3d x0_prior = Eigen::Vector3d::Zero();
  bool x0_prior_auto = true;
  Eigen::Matrix3d x0_weight =
      Eigen::Vector3d(1.0, 0.01, 0.01).asDiagonal();  // P_x0^{-1}

  AggregateParams theta_prior{1.0, 0.5, 20.0, 3.0, 1.0, 1.0, 4.0};
  Eigen::Matrix<double, 7, 7> theta_weight =
      0.1 * Eigen::Matrix<double, 7, 7>::Identity();  // P_Theta^{-1}

  double lambda = 10.0;  // L1 weight on the process noise
  double r_inv = 100.0;  // measurement residual weight
  double alpha = 1e-3;   // quadratic penalty on the aggregate load

  // Box constraints; the load state must stay non-negative.
  Eigen::Vector3d x_lower{-std::numeric_limits<double>::infinity(),
                          -std::numeric_limits<double>::infinity(), 0.0};
  Eigen::Vector3d x_upper{std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity()};
  Eigen::Matrix<double, 7, 1> theta_lower =
      Eigen::Matrix<double, 7, 1>::Constant(1e-3);
  Eigen::Matrix<double, 7, 1> theta_upper =
      Eigen::Matrix<double, 7, 1>::Constant(1e3);

  double q_agg_scale = 1.0;  // internal scaling of the load state (kW)

  double kkt_tol = 1e-6;
  double constraint_tol = 1e-8;
  int max_outer = 50;
  int max_inner = 500;

  // Optional seeded multi-start around the prior; 0 or 1 keeps the single
  // deterministic start.
  int multistart = 0;
  std::uint64_t multistart_seed = 1;
  double multistart_spread = 0.5;
};

void validate(const IdentConfig& config);

struct EstimationResult {
  AggregateParams theta_hat{};
  Eigen::MatrixXd x_hat;   // 3 x N_t rows (Tbar_z, Tbar_w, q_agg_hat)
  Eigen::VectorXd xi_hat;  // N_t - 1
  Eigen::VectorXd nu_hat;  // N_t
  double objective_value = 0;
  double kkt_residual = std::numeric_limits<double>::infinity();
  double constraint_inf = std::numeric_limits<double>::infinity();
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
  std::vector<solver::OuterLog> solver_trace;
};

/// Full-transcription batch problem: decision variables are theta, the state
/// trajectory, and the split process-noise halves xi = xi_plus - xi_minus,
/// with the Euler dynamics as equality constraints. All evaluations are in
/// physical units; solve_batch applies its own internal variable scaling.
class BatchProblem {
 public:
  BatchProblem(const AggregateData& data, const IdentConfig& config);

  Eigen::Index n_samples() const { return z_.size(); }
  Eigen::Index n_vars() const { return 7 + 5 * n_samples() - 2; }
  Eigen::Index n_constraints() const { return 3 * (n_samples() - 1); }

  double objective(const Eigen::VectorXd& v) const;
  void objective_gradient(const Eigen::VectorXd& v, Eigen::VectorXd& grad) const;
  void constraints(const Eigen::VectorXd& v, Eigen::VectorXd& c) const;
  void constraint_jtv(const Eigen::VectorXd& v, const Eigen::VectorXd& y,
                      Eigen::VectorXd& grad) const;
  /// diag(hess objective) + rho * diag(J^T J), the Gauss-Newton diagonal of
  /// the augmented Lagrangian used as a solver preconditioner.
  void hessian_diag(const Eigen::VectorXd& v, double rho, Eigen::VectorXd& diag) const;

  Eigen::VectorXd lower_bounds() const;
  Eigen::VectorXd upper_bounds() const;
  Eigen::VectorXd initial_point() const;

  Eigen::Index theta_index(int i) const { return i; }
  Eigen::Index state_index(Eigen::Index k, int i) const { return 7 + 3 * k + i; }
  Eigen::Index xi_plus_index(Eigen::Index k) const {
    return 7 + 3 * n_samples() + k;
  }
  Eigen::Index xi_minus_index(Eigen::Index k) const {
    return 7 + 4 * n_samples() - 1 + k;
  }

  const IdentConfig& config() const { return config_; }
  const Eigen::VectorXd& measured() const { return z_; }
  double t_s() const { return t_s_; }

 private:
  Eigen::VectorXd z_, t_a_, eta_, q_ac_;
  double t_s_;
  IdentConfig config_;
  Eigen::Vector3d x0_prior_;
};

EstimationResult solve_batch(const AggregateData& data, const IdentConfig& config);

struct PredictionResult {
  Eigen::VectorXd t_bar_z_pred;
  double rmse = 0;
  bool rmse_defined = false;
};

/// Forward simulation of the augmented model with zero process noise and the
/// load state replaced sample-by-sample by `disturbance`. x0 provides the
/// temperature states at the first prediction sample.
PredictionResult predict_out_of_sample(const AggregateParams& theta,
                                       const AggregateData& data,
                                       const Eigen::VectorXd& disturbance,
                                       const Eigen::Vector3d& x0);

}  // namespace aggtherm
