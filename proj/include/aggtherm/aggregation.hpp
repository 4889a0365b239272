#pragma once

#include <Eigen/Core>
#include <optional>

#include "aggtherm/signal.hpp"
#include "aggtherm/thermal.hpp"

namespace aggtherm {

/// Zone-averaged signals. t_bar_w and q_bar_int are only available when the
/// underlying trace set carries them (simulation, or metered buildings).
struct AggregateData {
  SignalTrace t_bar_z;
  SignalTrace t_bar_a;
  SignalTrace eta_bar_solar;
  SignalTrace q_bar_ac;
  std::optional<SignalTrace> t_bar_w;
  std::optional<SignalTrace> q_bar_int;

  Eigen::Index n_samples() const { return t_bar_z.size(); }
  double t_s_hours() const { return t_bar_z.t_s_hours; }
  std::int64_t start_time_s() const { return t_bar_z.start_time_s; }
};

/// The seven time-invariant parameters of the single-zone equivalent model:
/// four time constants (hours), the aggregate zone capacitance (kWh/degC) and
/// two aggregate solar coefficients (degC*m^2/kWh).
struct AggregateParams {
  double tau_za;
  double tau_zw;
  double tau_wa;
  double tau_wz;
  double c_z;
  double a_z;
  double a_w;

  Eigen::Matrix<double, 7, 1> as_vector() const;
  static AggregateParams from_vector(const Eigen::Matrix<double, 7, 1>& v);
  bool all_positive() const;
};

/// Per-zone deviations from the zone average, one row per zone.
struct DeviationTraces {
  Eigen::MatrixXd t_z;
  Eigen::MatrixXd t_a;
  Eigen::MatrixXd eta_solar;
  Eigen::MatrixXd q_ac;
  std::optional<Eigen::MatrixXd> t_w;
  std::optional<Eigen::MatrixXd> q_int;
};

/// Time-varying residuals that make the averaged dynamics exact, plus the
/// aggregate internal heat load q_bar_agg = q_bar_int + c_z_bar * w_tilde_z.
/// For models with inter-zone couplings w_tilde_z already contains the
/// interaction correction, so the aggregate model stays exact there too.
struct AggregationErrors {
  SignalTrace w_tilde_z;   // degC/h
  SignalTrace w_tilde_w;   // degC/h
  SignalTrace q_bar_agg;   // kW
};

/// Per-sample arithmetic mean over zones, fixed zone-index summation order.
AggregateData average_signals(const ZoneTraceSet& traces);

/// tilde = individual - average, per sample.
DeviationTraces deviation_signals(const ZoneTraceSet& traces,
                                  const AggregateData& averages);

/// Harmonic-style combination of the per-zone parameters:
///   tau_pm = N_z / sum_j 1/(R_pm^j C_p^j)
///   c_p    = N_z / sum_j 1/C_p^j
///   a_p    = (sum_j A_p^j / C_p^j) / N_z
AggregateParams aggregate_params(const BuildingModel& model);

/// Simulation-only: requires full knowledge of every zone (walls + metered
/// internal loads). Needs the building the traces were generated from.
AggregationErrors aggregation_errors(const BuildingModel& model,
                                     const ZoneTraceSet& traces,
                                     const DeviationTraces& tildes);

struct AverageDerivatives {
  Eigen::VectorXd d_t_bar_z;  // degC/h
  Eigen::VectorXd d_t_bar_w;  // degC/h
};

/// Right-hand sides of the time-invariant aggregate model evaluated per
/// sample, including the w_tilde correction terms. With exact aggregate
/// parameters this reproduces the zone-averaged derivatives identically.
AverageDerivatives reconstruct_average_dynamics(const AggregateParams& params,
                                                const AggregateData& averages,
                                                const AggregationErrors& errors);

/// Diagnostic traces of the would-be aggregate parameters when they are read
/// off the averaged dynamics directly, without deviation variables. Samples
/// where the construction is singular carry defined(k) == false.
struct TimeVaryingParams {
  Eigen::VectorXd tau_za, tau_zw, tau_wa, tau_wz;
  Eigen::VectorXd c_z_ac, c_z_int;
  Eigen::VectorXd a_z, a_w;
  Eigen::Array<bool, Eigen::Dynamic, 1> tau_za_defined, tau_zw_defined,
      tau_wa_defined, tau_wz_defined, c_z_ac_defined, c_z_int_defined,
      a_z_defined, a_w_defined;
};

TimeVaryingParams time_varying_params(const ZoneTraceSet& traces,
                                      const BuildingModel& model,
                                      double epsilon = 1e-9);

}  // namespace aggtherm
