#include "aggtherm/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace aggtherm {

namespace {

// Engine-independent mapping to doubles so traces are reproducible bit for
// bit on any conforming standard library.
double uniform_pm1(std::mt19937_64& rng) {
  return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
}

double wrap24(double hour) {
  double h = std::fmod(hour, 24.0);
  if (h < 0) h += 24.0;
  return h;
}

bool in_window(double hour, double start, double end) {
  if (start <= end) return hour >= start && hour < end;
  return hour >= start || hour < end;  // window wraps past midnight
}

}  // namespace

void validate(const ScenarioSpec& spec) {
  validate(spec.building);
  require(spec.horizon_days > 0, "horizon must be positive");
  require(spec.t_s_hours > 0, "sampling interval must be positive");
  require(spec.solar.sunrise_hour >= 0 && spec.solar.sunset_hour <= 24 &&
              spec.solar.sunrise_hour < spec.solar.sunset_hour,
          "solar window must satisfy 0 <= sunrise < sunset <= 24");
  require(spec.solar.peak_kw_m2 >= 0, "solar peak must be non-negative");
  require(!spec.solar.daily_scale.empty(), "solar daily_scale must not be empty");
  for (double s : spec.solar.daily_scale)
    require(s >= 0, "solar daily scales must be non-negative");
  require(spec.occupancy.base_kw >= 0, "internal loads must be non-negative");
  double prev_hour = -1.0;
  for (const auto& step : spec.occupancy.schedule) {
    require(step.hour >= 0 && step.hour < 24,
            "occupancy switch times must lie in [0, 24)");
    require(step.hour > prev_hour, "occupancy switch times must be increasing");
    require(step.level_kw >= 0, "internal loads must be non-negative");
    prev_hour = step.hour;
  }
  if (const auto* ol = std::get_if<OpenLoopHvacSpec>(&spec.hvac)) {
    require(ol->capacity_kw >= 0, "cooling capacity must be non-negative");
    require(ol->start_hour <= ol->split_hour && ol->split_hour <= ol->end_hour,
            "open-loop cooling schedule must be ordered");
    require(ol->afternoon_fraction >= 0, "afternoon fraction must be non-negative");
  } else {
    const auto& db = std::get<DeadbandSpec>(spec.hvac);
    require(db.halfwidth_c > 0, "deadband halfwidth must be positive");
    require(db.capacity_kw >= 0, "cooling capacity must be non-negative");
    require(db.night_start_hour >= 0 && db.night_start_hour <= 24 &&
                db.night_end_hour >= 0 && db.night_end_hour <= 24,
            "night window hours must lie in [0, 24]");
  }
  require(spec.asynchronicity >= 0, "asynchronicity must be non-negative");
  require(spec.shift_span_hours >= 0 && spec.amplitude_span >= 0,
          "asynchronicity spans must be non-negative");
}

BuildingModel default_virtual_building(std::uint64_t seed, int n_zones,
                                       double spread, double aperture_spread) {
  require(n_zones >= 1, "need at least one zone");
  require(spread >= 0 && spread < 1, "spread must lie in [0, 1)");
  if (aperture_spread < 0) aperture_spread = spread;
  require(aperture_spread < 1, "aperture spread must lie in [0, 1)");
  // Nominal zone chosen so that a homogeneous building aggregates to
  // tau_za 0.7899 h, tau_zw 0.5869 h, tau_wa 19.3798 h, tau_wz 2.8441 h,
  // c_z 0.7147 kWh/degC, a_z 0.57, a_w 4.5537 degC*m^2/kWh.
  const ZoneParams nominal{
      0.7899 / 0.7147,             // r_za
      0.7147,                      // c_z
      0.5869 / 0.7147,             // r_zw
      2.8441 / (0.5869 / 0.7147),  // c_w
      19.3798 / (2.8441 / (0.5869 / 0.7147)),  // r_wa
      0.57 * 0.7147,               // a_z
      4.5537 * (2.8441 / (0.5869 / 0.7147)),   // a_w
  };
  std::mt19937_64 rng(seed);
  std::vector<ZoneParams> zones;
  zones.reserve(static_cast<std::size_t>(n_zones));
  for (int j = 0; j < n_zones; ++j) {
    auto perturb = [&](double v) { return v * (1.0 + spread * uniform_pm1(rng)); };
    auto perturb_aperture = [&](double v) {
      return v * (1.0 + aperture_spread * uniform_pm1(rng));
    };
    zones.push_back({perturb(nominal.r_za), perturb(nominal.c_z),
                     perturb(nominal.r_zw), perturb(nominal.c_w),
                     perturb(nominal.r_wa), perturb_aperture(nominal.a_z),
                     perturb_aperture(nominal.a_w)});
  }
  return make_building_model(std::move(zones));
}

BuildingModel sized_virtual_building(std::uint64_t seed, int n_zones,
                                     double size_spread,
                                     double construction_spread) {
  require(n_zones >= 1, "need at least one zone");
  require(size_spread >= 0 && size_spread < 1, "size spread must lie in [0, 1)");
  require(construction_spread >= 0 && construction_spread < 1,
          "construction spread must lie in [0, 1)");
  const ZoneParams nominal{
      0.7899 / 0.7147,
      0.7147,
      0.5869 / 0.7147,
      2.8441 / (0.5869 / 0.7147),
      19.3798 / (2.8441 / (0.5869 / 0.7147)),
      0.57 * 0.7147,
      4.5537 * (2.8441 / (0.5869 / 0.7147)),
  };
  std::mt19937_64 rng(seed);
  std::vector<ZoneParams> zones;
  zones.reserve(static_cast<std::size_t>(n_zones));
  for (int j = 0; j < n_zones; ++j) {
    const double size = 1.0 + size_spread * uniform_pm1(rng);
    auto jitter = [&] { return 1.0 + construction_spread * uniform_pm1(rng); };
    zones.push_back({nominal.r_za / size * jitter(), nominal.c_z * size,
                     nominal.r_zw / size * jitter(), nominal.c_w * size,
                     nominal.r_wa / size * jitter(), nominal.a_z * size * jitter(),
                     nominal.a_w * size * jitter()});
  }
  return make_building_model(std::move(zones));
}

double deadband_controller(double t_z, DeadbandState& state,
                           const DeadbandSpec& spec, double hour_of_day) {
  if (in_window(hour_of_day, spec.night_start_hour, spec.night_end_hour)) {
    state.cooling_on = false;
    return 0.0;
  }
  if (t_z >= spec.setpoint_c + spec.halfwidth_c) state.cooling_on = true;
  else if (t_z <= spec.setpoint_c - spec.halfwidth_c) state.cooling_on = false;
  return state.cooling_on ? spec.capacity_kw : 0.0;
}

ScenarioData generate(const ScenarioSpec& spec) {
  validate(spec);
  const Eigen::Index nz = spec.building.n_zones();
  const Eigen::Index n =
      static_cast<Eigen::Index>(std::llround(spec.horizon_days * 24.0 / spec.t_s_hours)) + 1;
  require(n >= 2, "horizon shorter than one step");

  // Per-zone asynchronicity draws, fixed order: occupancy shift, occupancy
  // scale, hvac capacity scale.
  std::mt19937_64 rng(spec.seed);
  std::vector<double> occ_shift(static_cast<std::size_t>(nz)),
      occ_scale(static_cast<std::size_t>(nz)),
      hvac_scale(static_cast<std::size_t>(nz));
  for (Eigen::Index j = 0; j < nz; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    occ_shift[idx] = spec.asynchronicity * spec.shift_span_hours * uniform_pm1(rng);
    occ_scale[idx] = 1.0 + spec.asynchronicity * spec.amplitude_span * uniform_pm1(rng);
    hvac_scale[idx] = 1.0 + spec.asynchronicity * spec.amplitude_span * uniform_pm1(rng);
  }

  const double start_hod =
      wrap24(static_cast<double>(spec.start_time_s % 86400) / 3600.0);
  const bool deadband = std::holds_alternative<DeadbandSpec>(spec.hvac);

  auto ambient = [&](double hod) {
    return spec.weather.mean_c +
           spec.weather.amplitude_c *
               std::cos(2.0 * std::numbers::pi * (hod - spec.weather.peak_hour) / 24.0);
  };
  auto solar = [&](double elapsed_hours) {
    const double hod = wrap24(start_hod + elapsed_hours);
    if (hod < spec.solar.sunrise_hour || hod > spec.solar.sunset_hour) return 0.0;
    const auto day = static_cast<std::size_t>((start_hod + elapsed_hours) / 24.0);
    const double scale = spec.solar.daily_scale[day % spec.solar.daily_scale.size()];
    const double phase = (hod - spec.solar.sunrise_hour) /
                         (spec.solar.sunset_hour - spec.solar.sunrise_hour);
    return spec.solar.peak_kw_m2 * scale * std::sin(std::numbers::pi * phase);
  };
  auto internal_load = [&](double hod, Eigen::Index j) {
    const double h = wrap24(hod - occ_shift[static_cast<std::size_t>(j)]);
    double level = spec.occupancy.base_kw;
    for (const auto& step : spec.occupancy.schedule) {
      if (h < step.hour) break;
      level = step.level_kw;
    }
    if (level == spec.occupancy.base_kw) return level;  // base load is shared
    return level * occ_scale[static_cast<std::size_t>(j)];
  };
  auto open_loop_cooling = [&](double hod, Eigen::Index j) {
    const auto& ol = std::get<OpenLoopHvacSpec>(spec.hvac);
    double frac = 0.0;
    if (in_window(hod, ol.start_hour, ol.split_hour)) frac = 1.0;
    else if (in_window(hod, ol.split_hour, ol.end_hour)) frac = ol.afternoon_fraction;
    return ol.capacity_kw * hvac_scale[static_cast<std::size_t>(j)] * frac;
  };

  ZoneTraceSet traces;
  traces.start_time_s = spec.start_time_s;
  traces.t_s_hours = spec.t_s_hours;
  traces.zones.resize(static_cast<std::size_t>(nz));
  for (Eigen::Index j = 0; j < nz; ++j) {
    auto& z = traces.zones[static_cast<std::size_t>(j)];
    z.id = "z" + std::to_string(j + 1);
    z.t_z.resize(n);
    z.t_a.resize(n);
    z.eta_solar.resize(n);
    z.q_ac.resize(n);
    z.t_w.emplace(n);
    z.q_int.emplace(n);
  }

  const double t0 = deadband ? std::get<DeadbandSpec>(spec.hvac).setpoint_c
                             : ambient(start_hod);
  std::vector<ZoneState> state(static_cast<std::size_t>(nz), ZoneState{t0, t0});
  std::vector<DeadbandState> ctrl(static_cast<std::size_t>(nz));
  std::vector<ZoneInputs> u(static_cast<std::size_t>(nz));
  std::vector<ZoneDerivative> deriv;

  for (Eigen::Index k = 0; k < n; ++k) {
    const double elapsed = static_cast<double>(k) * spec.t_s_hours;
    const double hod = wrap24(start_hod + elapsed);
    const double t_a = ambient(hod);
    const double eta = solar(elapsed);
    for (Eigen::Index j = 0; j < nz; ++j) {
      const auto idx = static_cast<std::size_t>(j);
      double q_ac;
      if (deadband) {
        q_ac = deadband_controller(state[idx].t_z, ctrl[idx],
                                   std::get<DeadbandSpec>(spec.hvac), hod);
      } else {
        q_ac = open_loop_cooling(hod, j);
      }
      u[idx] = {t_a, eta, q_ac, internal_load(hod, j)};
      auto& z = traces.zones[idx];
      z.t_z[k] = state[idx].t_z;
      (*z.t_w)[k] = state[idx].t_w;
      z.t_a[k] = u[idx].t_a;
      z.eta_solar[k] = u[idx].eta_solar;
      z.q_ac[k] = u[idx].q_ac;
      (*z.q_int)[k] = u[idx].q_int;
    }
    if (k + 1 == n) break;
    building_derivative(state, u, spec.building, deriv);
    for (Eigen::Index j = 0; j < nz; ++j) {
      const auto idx = static_cast<std::size_t>(j);
      state[idx].t_z += spec.t_s_hours * deriv[idx].d_t_z;
      state[idx].t_w += spec.t_s_hours * deriv[idx].d_t_w;
    }
  }

  const AggregateData averages = average_signals(traces);
  const DeviationTraces tildes = deviation_signals(traces, averages);
  const AggregationErrors errors =
      aggregation_errors(spec.building, traces, tildes);

  ScenarioData out;
  out.zones = std::move(traces);
  out.truth.theta = aggregate_params(spec.building);
  out.truth.w_tilde_z = errors.w_tilde_z;
  out.truth.w_tilde_w = errors.w_tilde_w;
  out.truth.q_bar_agg = errors.q_bar_agg;
  out.truth.q_bar_int = *averages.q_bar_int;
  return out;
}

}  // namespace aggtherm
