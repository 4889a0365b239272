#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "aggtherm/signal.hpp"

namespace aggtherm {

// Units everywhere: hours, degC, kW, kWh. Resistances degC*h/kWh,
// capacitances kWh/degC, apertures m^2, irradiance kW/m^2.

struct ZoneParams {
  double r_za;  // zone <-> ambient resistance
  double c_z;   // zone air capacitance
  double r_zw;  // zone <-> wall resistance
  double c_w;   // wall capacitance
  double r_wa;  // wall <-> ambient resistance
  double a_z;   // effective solar aperture to the zone
  double a_w;   // effective solar aperture to the wall
};

struct ZoneState {
  double t_z;
  double t_w;
};

struct ZoneInputs {
  double t_a;
  double eta_solar;
  double q_ac;
  double q_int;
};

struct ZoneDerivative {
  double d_t_z;  // degC/h
  double d_t_w;  // degC/h
};

/// Multi-zone building. interaction_resistance, when present, is an
/// N_z x N_z symmetric matrix of pairwise zone<->zone resistances; an entry of
/// +infinity means "no coupling" and the diagonal is unused.
struct BuildingModel {
  std::vector<ZoneParams> zones;
  std::optional<Eigen::MatrixXd> interaction_resistance;

  Eigen::Index n_zones() const { return static_cast<Eigen::Index>(zones.size()); }
};

void validate(const ZoneParams& params);
void validate(const BuildingModel& model);

/// Validating constructor; rejects asymmetric or non-positive couplings.
BuildingModel make_building_model(std::vector<ZoneParams> zones,
                                  std::optional<Eigen::MatrixXd> interaction = {});

/// Continuous-time 2R2C dynamics of a single zone.
ZoneDerivative zone_derivative(const ZoneState& state, const ZoneInputs& inputs,
                               const ZoneParams& params);

/// Per-zone derivatives plus the pairwise interaction term on d_t_z when the
/// model carries an interaction matrix. Summation order is fixed by zone index.
void building_derivative(std::span<const ZoneState> states,
                         std::span<const ZoneInputs> inputs,
                         const BuildingModel& model,
                         std::vector<ZoneDerivative>& out);
std::vector<ZoneDerivative> building_derivative(std::span<const ZoneState> states,
                                                std::span<const ZoneInputs> inputs,
                                                const BuildingModel& model);

/// One explicit Euler step, x[k+1] = x[k] + t_s * f(x[k], u[k]).
std::vector<ZoneState> step_forward_euler(std::span<const ZoneState> states,
                                          std::span<const ZoneInputs> inputs,
                                          const BuildingModel& model, double t_s);

/// Per-zone input series for simulation; all vectors share one grid.
struct ZoneInputTrace {
  Eigen::VectorXd t_a;
  Eigen::VectorXd eta_solar;
  Eigen::VectorXd q_ac;
  Eigen::VectorXd q_int;
};

/// Fixed-step open-loop simulation. Sample 0 is the initial state; n_steps
/// samples are produced in total, with inputs echoed into the result.
ZoneTraceSet simulate(const BuildingModel& model,
                      const std::vector<ZoneInputTrace>& inputs,
                      std::span<const ZoneState> initial_states, double t_s,
                      Eigen::Index n_steps, std::int64_t start_time_s = 0);

}  // namespace aggtherm
