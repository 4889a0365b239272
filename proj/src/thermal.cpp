#include "aggtherm/thermal.hpp"

#include <cmath>
#include <limits>

namespace aggtherm {

namespace {
bool finite(double v) { return std::isfinite(v); }
}  // namespace

void validate(const ZoneParams& p) {
  require(p.r_za > 0 && p.c_z > 0 && p.r_zw > 0 && p.c_w > 0 && p.r_wa > 0,
          "zone resistances and capacitances must be strictly positive");
  require(p.a_z >= 0 && p.a_w >= 0, "solar apertures must be non-negative");
  require(finite(p.r_za) && finite(p.c_z) && finite(p.r_zw) && finite(p.c_w) &&
              finite(p.r_wa) && finite(p.a_z) && finite(p.a_w),
          "zone parameters must be finite");
}

void validate(const BuildingModel& model) {
  require(!model.zones.empty(), "building needs at least one zone");
  for (const auto& z : model.zones) validate(z);
  if (model.interaction_resistance) {
    const auto& r = *model.interaction_resistance;
    const Eigen::Index n = model.n_zones();
    require(r.rows() == n && r.cols() == n,
            "interaction matrix must be N_z x N_z");
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        require(r(i, j) == r(j, i), "interaction matrix must be symmetric");
        require(r(i, j) > 0, "interaction resistances must be strictly positive");
      }
    }
  }
}

BuildingModel make_building_model(std::vector<ZoneParams> zones,
                                  std::optional<Eigen::MatrixXd> interaction) {
  BuildingModel model{std::move(zones), std::move(interaction)};
  validate(model);
  return model;
}

ZoneDerivative zone_derivative(const ZoneState& x, const ZoneInputs& u,
                               const ZoneParams& p) {
  require(finite(x.t_z) && finite(x.t_w), "zone state must be finite");
  require(finite(u.t_a) && finite(u.eta_solar) && finite(u.q_ac) && finite(u.q_int),
          "zone inputs must be finite");
  const double d_t_z = (u.t_a - x.t_z) / (p.r_za * p.c_z) +
                       (u.q_int - u.q_ac) / p.c_z +
                       (x.t_w - x.t_z) / (p.r_zw * p.c_z) +
                       (p.a_z / p.c_z) * u.eta_solar;
  const double d_t_w = (x.t_z - x.t_w) / (p.r_zw * p.c_w) +
                       (u.t_a - x.t_w) / (p.r_wa * p.c_w) +
                       (p.a_w / p.c_w) * u.eta_solar;
  return {d_t_z, d_t_w};
}

void building_derivative(std::span<const ZoneState> states,
                         std::span<const ZoneInputs> inputs,
                         const BuildingModel& model,
                         std::vector<ZoneDerivative>& out) {
  const auto n = static_cast<std::size_t>(model.n_zones());
  require(states.size() == n && inputs.size() == n,
          "state/input count must match the zone count");
  out.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = zone_derivative(states[j], inputs[j], model.zones[j]);

  if (model.interaction_resistance) {
    const auto& r = *model.interaction_resistance;
    for (std::size_t j = 0; j < n; ++j) {
      double coupling = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == j) continue;
        const double r_ij = r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (!std::isfinite(r_ij)) continue;  // absent coupling
        coupling += (states[i].t_z - states[j].t_z) / (r_ij * model.zones[j].c_z);
      }
      out[j].d_t_z += coupling;
    }
  }
}

std::vector<ZoneDerivative> building_derivative(std::span<const ZoneState> states,
                                                std::span<const ZoneInputs> inputs,
                                                const BuildingModel& model) {
  std::vector<ZoneDerivative> out;
  building_derivative(states, inputs, model, out);
  return out;
}

std::vector<ZoneState> step_forward_euler(std::span<const ZoneState> states,
                                          std::span<const ZoneInputs> inputs,
                                          const BuildingModel& model, double t_s) {
  require(t_s > 0, "step size must be positive");
  const auto d = building_derivative(states, inputs, model);
  std::vector<ZoneState> next(states.size());
  for (std::size_t j = 0; j < states.size(); ++j) {
    next[j].t_z = states[j].t_z + t_s * d[j].d_t_z;
    next[j].t_w = states[j].t_w + t_s * d[j].d_t_w;
  }
  return next;
}

ZoneTraceSet simulate(const BuildingModel& model,
                      const std::vector<ZoneInputTrace>& inputs,
                      std::span<const ZoneState> initial_states, double t_s,
                      Eigen::Index n_steps, std::int64_t start_time_s) {
  validate(model);
  require(t_s > 0, "sampling interval must be positive");
  require(n_steps >= 1, "simulation needs at least one sample");
  const auto n = static_cast<std::size_t>(model.n_zones());
  require(inputs.size() == n && initial_states.size() == n,
          "input traces and initial states must match the zone count");
  for (const auto& u : inputs) {
    require(u.t_a.size() >= n_steps && u.eta_solar.size() >= n_steps &&
                u.q_ac.size() >= n_steps && u.q_int.size() >= n_steps,
            "input traces shorter than the simulation horizon");
    require(u.t_a.size() == u.eta_solar.size() && u.t_a.size() == u.q_ac.size() &&
                u.t_a.size() == u.q_int.size(),
            "input traces of one zone differ in length");
  }

  ZoneTraceSet out;
  out.start_time_s = start_time_s;
  out.t_s_hours = t_s;
  out.zones.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto& z = out.zones[j];
    z.id = "z" + std::to_string(j + 1);
    z.t_z.resize(n_steps);
    z.t_a = inputs[j].t_a.head(n_steps);
    z.eta_solar = inputs[j].eta_solar.head(n_steps);
    z.q_ac = inputs[j].q_ac.head(n_steps);
    z.t_w.emplace(n_steps);
    z.q_int.emplace(inputs[j].q_int.head(n_steps));
  }

  std::vector<ZoneState> state(initial_states.begin(), initial_states.end());
  std::vector<ZoneInputs> u_k(n);
  std::vector<ZoneDerivative> deriv;
  for (Eigen::Index k = 0; k < n_steps; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      out.zones[j].t_z[k] = state[j].t_z;
      (*out.zones[j].t_w)[k] = state[j].t_w;
      u_k[j] = {inputs[j].t_a[k], inputs[j].eta_solar[k], inputs[j].q_ac[k],
                inputs[j].q_int[k]};
    }
    if (k + 1 == n_steps) break;
    building_derivative(state, u_k, model, deriv);
    for (std::size_t j = 0; j < n; ++j) {
      state[j].t_z += t_s * deriv[j].d_t_z;
      state[j].t_w += t_s * deriv[j].d_t_w;
    }
  }
  return out;
}

}  // namespace aggtherm
