#include "aggtherm/estimation.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <random>

namespace aggtherm {

AugmentedModel build_augmented_model(const AggregateParams& theta) {
  require(theta.all_positive(), "aggregate parameters must be strictly positive");
  AugmentedModel m;
  m.theta = theta;
  m.a << -1.0 / theta.tau_za - 1.0 / theta.tau_zw, 1.0 / theta.tau_zw,
      1.0 / theta.c_z,  //
      1.0 / theta.tau_wz, -1.0 / theta.tau_wa - 1.0 / theta.tau_wz, 0.0,  //
      0.0, 0.0, 0.0;
  m.b << 1.0 / theta.tau_za, theta.a_z, -1.0 / theta.c_z,  //
      1.0 / theta.tau_wa, theta.a_w, 0.0,                  //
      0.0, 0.0, 0.0;
  m.f << 1.0, 0.0, 0.0;
  m.g << 0.0, 0.0, 1.0;
  return m;
}

DiscreteModel discretize(const AugmentedModel& model, double t_s) {
  require(t_s > 0, "sampling interval must be positive");
  DiscreteModel d;
  d.a = Eigen::Matrix3d::Identity() + t_s * model.a;
  d.b = t_s * model.b;
  d.g = model.g;
  d.t_s = t_s;
  return d;
}

namespace {

bool spd(const Eigen::MatrixXd& m) {
  if (!m.isApprox(m.transpose())) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

}  // namespace

void validate(const IdentConfig& c) {
  require(c.lambda > 0 && c.r_inv > 0 && c.alpha > 0,
          "lambda, r and alpha weights must be positive");
  require(spd(c.x0_weight), "x0 weight matrix must be symmetric positive definite");
  require(spd(c.theta_weight),
          "theta weight matrix must be symmetric positive definite");
  require((c.theta_lower.array() <= c.theta_upper.array()).all(),
          "theta box is empty");
  require((c.x_lower.array() <= c.x_upper.array()).all(), "state box is empty");
  require(c.theta_prior.all_positive(), "theta prior must be positive");
  require(c.q_agg_scale > 0, "load scaling must be positive");
  require(c.kkt_tol > 0 && c.constraint_tol > 0, "tolerances must be positive");
  require(c.max_outer >= 1 && c.max_inner >= 1, "iteration caps must be positive");
}

BatchProblem::BatchProblem(const AggregateData& data, const IdentConfig& config)
    : z_(data.t_bar_z.values),
      t_a_(data.t_bar_a.values),
      eta_(data.eta_bar_solar.values),
      q_ac_(data.q_bar_ac.values),
      t_s_(data.t_s_hours()),
      config_(config) {
  validate(config_);
  const Eigen::Index n = z_.size();
  require(n >= 3, "identification needs at least three samples");
  require(t_a_.size() == n && eta_.size() == n && q_ac_.size() == n,
          "aggregate signals must share one grid");
  require(z_.allFinite() && t_a_.allFinite() && eta_.allFinite() && q_ac_.allFinite(),
          "aggregate data must be finite");
  require(t_s_ > 0, "sampling interval must be positive");
  x0_prior_ = config_.x0_prior_auto ? Eigen::Vector3d(z_[0], z_[0], 0.0)
                                    : config_.x0_prior;
}

double BatchProblem::objective(const Eigen::VectorXd& v) const {
  const Eigen::Index n = n_samples();
  const Eigen::Vector3d x0 = v.segment<3>(state_index(0, 0));
  const Eigen::Matrix<double, 7, 1> theta = v.head<7>();
  const Eigen::Vector3d dx0 = x0 - x0_prior_;
  const Eigen::Matrix<double, 7, 1> dtheta = theta - config_.theta_prior.as_vector();

  double obj = dx0.dot(config_.x0_weight * dx0) +
               dtheta.dot(config_.theta_weight * dtheta);
  for (Eigen::Index k = 0; k + 1 < n; ++k)
    obj += config_.lambda * (v[xi_plus_index(k)] + v[xi_minus_index(k)]);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double nu = z_[k] - v[state_index(k, 0)];
    obj += config_.r_inv * nu * nu;
  }
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double q = v[state_index(k, 2)];
    obj += config_.alpha * q * q;
  }
  return obj;
}

void BatchProblem::objective_gradient(const Eigen::VectorXd& v,
                                      Eigen::VectorXd& grad) const {
  const Eigen::Index n = n_samples();
  grad.setZero(n_vars());

  const Eigen::Vector3d x0 = v.segment<3>(state_index(0, 0));
  const Eigen::Matrix<double, 7, 1> theta = v.head<7>();
  grad.segment<3>(state_index(0, 0)) = 2.0 * (config_.x0_weight * (x0 - x0_prior_));
  grad.head<7>() =
      2.0 * (config_.theta_weight * (theta - config_.theta_prior.as_vector()));

  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    grad[xi_plus_index(k)] += config_.lambda;
    grad[xi_minus_index(k)] += config_.lambda;
  }
  for (Eigen::Index k = 0; k < n; ++k)
    grad[state_index(k, 0)] += -2.0 * config_.r_inv * (z_[k] - v[state_index(k, 0)]);
  for (Eigen::Index k = 0; k + 1 < n; ++k)
    grad[state_index(k, 2)] += 2.0 * config_.alpha * v[state_index(k, 2)];
}

void BatchProblem::constraints(const Eigen::VectorXd& v, Eigen::VectorXd& c) const {
  const Eigen::Index n = n_samples();
  c.resize(n_constraints());
  const double tau_za = v[0], tau_zw = v[1], tau_wa = v[2], tau_wz = v[3];
  const double c_z = v[4], a_z = v[5], a_w = v[6];
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double x1 = v[state_index(k, 0)], x2 = v[state_index(k, 1)],
                 x3 = v[state_index(k, 2)];
    const double d1 = (t_a_[k] - x1) / tau_za + (x2 - x1) / tau_zw +
                      (x3 - q_ac_[k]) / c_z + a_z * eta_[k];
    const double d2 = (t_a_[k] - x2) / tau_wa + (x1 - x2) / tau_wz + a_w * eta_[k];
    const double xi = v[xi_plus_index(k)] - v[xi_minus_index(k)];
    c[3 * k + 0] = v[state_index(k + 1, 0)] - x1 - t_s_ * d1;
    c[3 * k + 1] = v[state_index(k + 1, 1)] - x2 - t_s_ * d2;
    c[3 * k + 2] = v[state_index(k + 1, 2)] - x3 - xi;
  }
}

void BatchProblem::constraint_jtv(const Eigen::VectorXd& v, const Eigen::VectorXd& y,
                                  Eigen::VectorXd& grad) const {
  const Eigen::Index n = n_samples();
  require(y.size() == n_constraints(), "multiplier vector has the wrong size");
  grad.setZero(n_vars());
  const double tau_za = v[0], tau_zw = v[1], tau_wa = v[2], tau_wz = v[3];
  const double c_z = v[4];
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double y0 = y[3 * k + 0], y1 = y[3 * k + 1], y2 = y[3 * k + 2];
    const double x1 = v[state_index(k, 0)], x2 = v[state_index(k, 1)],
                 x3 = v[state_index(k, 2)];

    grad[state_index(k + 1, 0)] += y0;
    grad[state_index(k + 1, 1)] += y1;
    grad[state_index(k + 1, 2)] += y2;

    grad[state_index(k, 0)] +=
        y0 * (-1.0 + t_s_ * (1.0 / tau_za + 1.0 / tau_zw)) + y1 * (-t_s_ / tau_wz);
    grad[state_index(k, 1)] +=
        y0 * (-t_s_ / tau_zw) + y1 * (-1.0 + t_s_ * (1.0 / tau_wa + 1.0 / tau_wz));
    grad[state_index(k, 2)] += y0 * (-t_s_ / c_z) - y2;

    grad[xi_plus_index(k)] -= y2;
    grad[xi_minus_index(k)] += y2;

    grad[0] += y0 * t_s_ * (t_a_[k] - x1) / (tau_za * tau_za);
    grad[1] += y0 * t_s_ * (x2 - x1) / (tau_zw * tau_zw);
    grad[2] += y1 * t_s_ * (t_a_[k] - x2) / (tau_wa * tau_wa);
    grad[3] += y1 * t_s_ * (x1 - x2) / (tau_wz * tau_wz);
    grad[4] += y0 * t_s_ * (x3 - q_ac_[k]) / (c_z * c_z);
    grad[5] += -y0 * t_s_ * eta_[k];
    grad[6] += -y1 * t_s_ * eta_[k];
  }
}

void BatchProblem::hessian_diag(const Eigen::VectorXd& v, double rho,
                                Eigen::VectorXd& diag) const {
  const Eigen::Index n = n_samples();
  diag.setZero(n_vars());

  for (int i = 0; i < 7; ++i) diag[i] = 2.0 * config_.theta_weight(i, i);
  for (int i = 0; i < 3; ++i)
    diag[state_index(0, i)] += 2.0 * config_.x0_weight(i, i);
  for (Eigen::Index k = 0; k < n; ++k) diag[state_index(k, 0)] += 2.0 * config_.r_inv;
  for (Eigen::Index k = 0; k + 1 < n; ++k)
    diag[state_index(k, 2)] += 2.0 * config_.alpha;

  if (rho <= 0) return;
  const double tau_za = v[0], tau_zw = v[1], tau_wa = v[2], tau_wz = v[3];
  const double c_z = v[4];
  const double a00 = -1.0 + t_s_ * (1.0 / tau_za + 1.0 / tau_zw);
  const double a11 = -1.0 + t_s_ * (1.0 / tau_wa + 1.0 / tau_wz);
  const double a01 = -t_s_ / tau_zw, a10 = -t_s_ / tau_wz, a02 = -t_s_ / c_z;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double x1 = v[state_index(k, 0)], x2 = v[state_index(k, 1)],
                 x3 = v[state_index(k, 2)];
    diag[state_index(k + 1, 0)] += rho;
    diag[state_index(k + 1, 1)] += rho;
    diag[state_index(k + 1, 2)] += rho;
    diag[state_index(k, 0)] += rho * (a00 * a00 + a10 * a10);
    diag[state_index(k, 1)] += rho * (a01 * a01 + a11 * a11);
    diag[state_index(k, 2)] += rho * (a02 * a02 + 1.0);
    diag[xi_plus_index(k)] += rho;
    diag[xi_minus_index(k)] += rho;
    const double j_za = t_s_ * (t_a_[k] - x1) / (tau_za * tau_za);
    const double j_zw = t_s_ * (x2 - x1) / (tau_zw * tau_zw);
    const double j_wa = t_s_ * (t_a_[k] - x2) / (tau_wa * tau_wa);
    const double j_wz = t_s_ * (x1 - x2) / (tau_wz * tau_wz);
    const double j_cz = t_s_ * (x3 - q_ac_[k]) / (c_z * c_z);
    const double j_eta = t_s_ * eta_[k];
    diag[0] += rho * j_za * j_za;
    diag[1] += rho * j_zw * j_zw;
    diag[2] += rho * j_wa * j_wa;
    diag[3] += rho * j_wz * j_wz;
    diag[4] += rho * j_cz * j_cz;
    diag[5] += rho * j_eta * j_eta;
    diag[6] += rho * j_eta * j_eta;
  }
}

Eigen::VectorXd BatchProblem::lower_bounds() const {
  const Eigen::Index n = n_samples();
  Eigen::VectorXd lb(n_vars());
  lb.head<7>() = config_.theta_lower;
  for (Eigen::Index k = 0; k < n; ++k)
    lb.segment<3>(state_index(k, 0)) = config_.x_lower;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    lb[xi_plus_index(k)] = 0.0;
    lb[xi_minus_index(k)] = 0.0;
  }
  return lb;
}

Eigen::VectorXd BatchProblem::upper_bounds() const {
  const Eigen::Index n = n_samples();
  Eigen::VectorXd ub(n_vars());
  ub.head<7>() = config_.theta_upper;
  for (Eigen::Index k = 0; k < n; ++k)
    ub.segment<3>(state_index(k, 0)) = config_.x_upper;
  const double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    ub[xi_plus_index(k)] = inf;
    ub[xi_minus_index(k)] = inf;
  }
  return ub;
}

Eigen::VectorXd BatchProblem::initial_point() const {
  const Eigen::Index n = n_samples();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n_vars());
  v.head<7>() = config_.theta_prior.as_vector()
                    .cwiseMax(config_.theta_lower)
                    .cwiseMin(config_.theta_upper);
  // Temperature states start on the measured trace, the load state at zero.
  for (Eigen::Index k = 0; k < n; ++k) {
    v[state_index(k, 0)] = z_[k];
    v[state_index(k, 1)] = z_[k];
    v[state_index(k, 2)] = std::clamp(0.0, config_.x_lower[2], config_.x_upper[2]);
  }
  v[state_index(0, 0)] = x0_prior_[0];
  v[state_index(0, 1)] = x0_prior_[1];
  v[state_index(0, 2)] = std::clamp(x0_prior_[2], config_.x_lower[2], config_.x_upper[2]);
  return v;
}

namespace {

// Runs the augmented-Lagrangian solver on the scaled problem; scaling keeps
// the quasi-Newton steps balanced between O(10 h) time constants and
// sub-unity capacitances.
EstimationResult solve_once(const BatchProblem& problem,
                            const Eigen::VectorXd& v_init) {
  const IdentConfig& cfg = problem.config();
  const Eigen::Index n_vars = problem.n_vars();
  const Eigen::Index n = problem.n_samples();

  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n_vars);
  const Eigen::Matrix<double, 7, 1> prior = cfg.theta_prior.as_vector();
  for (int i = 0; i < 7; ++i) scale[i] = std::max(std::abs(prior[i]), 1e-2);
  for (Eigen::Index k = 0; k < n; ++k)
    scale[problem.state_index(k, 2)] = cfg.q_agg_scale;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    scale[problem.xi_plus_index(k)] = cfg.q_agg_scale;
    scale[problem.xi_minus_index(k)] = cfg.q_agg_scale;
  }

  Eigen::VectorXd v_phys(n_vars), g_phys(n_vars);
  solver::Problem sp;
  sp.n = n_vars;
  sp.m = problem.n_constraints();
  sp.lower = problem.lower_bounds().cwiseQuotient(scale);
  sp.upper = problem.upper_bounds().cwiseQuotient(scale);
  sp.objective = [&](const Eigen::VectorXd& v) {
    return problem.objective(v.cwiseProduct(scale));
  };
  sp.objective_gradient = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
    problem.objective_gradient(v.cwiseProduct(scale), g);
    g.array() *= scale.array();
  };
  sp.constraints = [&](const Eigen::VectorXd& v, Eigen::VectorXd& c) {
    problem.constraints(v.cwiseProduct(scale), c);
  };
  sp.constraint_jtv = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& y,
                          Eigen::VectorXd& g) {
    problem.constraint_jtv(v.cwiseProduct(scale), y, g);
    g.array() *= scale.array();
  };
  sp.hessian_diag = [&](const Eigen::VectorXd& v, double rho, Eigen::VectorXd& hd) {
    problem.hessian_diag(v.cwiseProduct(scale), rho, hd);
    hd.array() *= scale.array().square();
  };

  solver::Options opts;
  opts.kkt_tol = cfg.kkt_tol;
  opts.constraint_tol = cfg.constraint_tol;
  opts.max_outer = cfg.max_outer;
  opts.max_inner = cfg.max_inner;

  const solver::Result sr = solver::minimize(sp, v_init.cwiseQuotient(scale), opts);
  const Eigen::VectorXd v = sr.v.cwiseProduct(scale);

  EstimationResult result;
  result.theta_hat = AggregateParams::from_vector(v.head<7>());
  result.x_hat.resize(3, n);
  for (Eigen::Index k = 0; k < n; ++k)
    result.x_hat.col(k) = v.segment<3>(problem.state_index(k, 0));
  result.xi_hat.resize(n - 1);
  for (Eigen::Index k = 0; k + 1 < n; ++k)
    result.xi_hat[k] = v[problem.xi_plus_index(k)] - v[problem.xi_minus_index(k)];
  result.nu_hat = problem.measured() - result.x_hat.row(0).transpose();
  result.objective_value = problem.objective(v);
  result.kkt_residual = sr.kkt_residual;
  result.constraint_inf = sr.constraint_inf;
  result.outer_iterations = sr.outer_iterations;
  result.inner_iterations = sr.inner_iterations;
  result.converged = sr.converged;
  result.solver_trace = sr.trace;
  return result;
}

}  // namespace

EstimationResult solve_batch(const AggregateData& data, const IdentConfig& config) {
  const BatchProblem problem(data, config);
  EstimationResult best = solve_once(problem, problem.initial_point());

  if (config.multistart > 1) {
    std::mt19937_64 rng(config.multistart_seed);
    const auto uniform = [&rng]() {
      return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
    };
    for (int run = 1; run < config.multistart; ++run) {
      Eigen::VectorXd v = problem.initial_point();
      for (int i = 0; i < 7; ++i)
        v[i] = std::clamp(v[i] * std::exp(config.multistart_spread * uniform()),
                          config.theta_lower[i], config.theta_upper[i]);
      EstimationResult cand = solve_once(problem, v);
      const bool better =
          (cand.converged && !best.converged) ||
          (cand.converged == best.converged &&
           cand.objective_value < best.objective_value);
      if (better) best = std::move(cand);
    }
  }
  return best;
}

PredictionResult predict_out_of_sample(const AggregateParams& theta,
                                       const AggregateData& data,
                                       const Eigen::VectorXd& disturbance,
                                       const Eigen::Vector3d& x0) {
  const Eigen::Index n = data.n_samples();
  require(disturbance.size() == n,
          "disturbance trace must match the data horizon");
  PredictionResult out;
  if (n == 0) return out;  // rmse stays undefined

  const AugmentedModel model = build_augmented_model(theta);
  const DiscreteModel d = discretize(model, data.t_s_hours());

  out.t_bar_z_pred.resize(n);
  Eigen::Vector3d x(x0[0], x0[1], disturbance[0]);
  for (Eigen::Index k = 0; k < n; ++k) {
    x[2] = disturbance[k];
    out.t_bar_z_pred[k] = x[0];
    if (k + 1 == n) break;
    const Eigen::Vector3d u(data.t_bar_a.values[k], data.eta_bar_solar.values[k],
                            data.q_bar_ac.values[k]);
    x = d.step(x, u, 0.0);
  }
  const Eigen::VectorXd err = out.t_bar_z_pred - data.t_bar_z.values;
  out.rmse = std::sqrt(err.squaredNorm() / static_cast<double>(n));
  out.rmse_defined = true;
  return out;
}

}  // namespace aggtherm
