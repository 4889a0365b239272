#pragma once

#include <cstdint>
#include <variant>

#include "aggtherm/aggregation.hpp"
#include "aggtherm/thermal.hpp"

namespace aggtherm {

/// Diurnal sinusoid for the ambient temperature, shared by all zones.
struct WeatherSpec {
  double mean_c = 25.0;
  double amplitude_c = 6.0;
  double peak_hour = 15.0;
};

/// Half-sine daytime irradiance profile. daily_scale cycles day by day, so a
/// sunny/cloudy alternation decorrelates irradiance from the repeating
/// occupancy schedule.
struct SolarSpec {
  double peak_kw_m2 = 0.6;
  double sunrise_hour = 6.5;
  double sunset_hour = 19.0;
  std::vector<double> daily_scale = {1.0, 0.45};
};

/// Piecewise-constant occupant-style internal load. The daily schedule is a
/// list of switch times with the level that starts there; base_kw applies
/// before the first switch. The default mimics office occupancy with a
/// midday dip.
struct OccupancyStep {
  double hour;
  double level_kw;
};

struct OccupancySpec {
  double base_kw = 0.05;
  std::vector<OccupancyStep> schedule = {
      {8.0, 0.35}, {12.0, 0.12}, {14.0, 0.35}, {18.0, 0.05}};
};

/// Scheduled cooling: full capacity in the morning block, reduced in the
/// afternoon block, off at night.
struct OpenLoopHvacSpec {
  double capacity_kw = 1.2;
  double start_hour = 8.0;
  double split_hour = 13.0;
  double end_hour = 19.0;
  double afternoon_fraction = 0.6;
};

/// Hysteresis cooling: on at setpoint + halfwidth, off at setpoint -
/// halfwidth, forced off inside the nightly shutoff window.
struct DeadbandSpec {
  double setpoint_c = 24.0;
  double halfwidth_c = 0.5;
  double capacity_kw = 8.0;
  double night_start_hour = 22.0;
  double night_end_hour = 6.0;
};

struct ScenarioSpec {
  BuildingModel building;
  double horizon_days = 2.0;
  double t_s_hours = 1.0 / 12;
  std::int64_t start_time_s = 0;
  WeatherSpec weather;
  SolarSpec solar;
  OccupancySpec occupancy;
  std::variant<OpenLoopHvacSpec, DeadbandSpec> hvac = OpenLoopHvacSpec{};
  // Single dial for input asynchronicity: per-zone time shifts of the
  // occupancy schedule up to asynchronicity * shift_span_hours, and per-zone
  // amplitude scaling of the occupancy level and cooling capacity up to
  // asynchronicity * amplitude_span. Irradiance is shared by all zones, the
  // way one sun hits one building; per-zone solar gains differ through the
  // aperture parameters.
  double asynchronicity = 0.0;
  double shift_span_hours = 2.0;
  double amplitude_span = 0.4;
  std::uint64_t seed = 1;
};

void validate(const ScenarioSpec& spec);

struct GroundTruth {
  AggregateParams theta;
  SignalTrace w_tilde_z;
  SignalTrace w_tilde_w;
  SignalTrace q_bar_agg;
  SignalTrace q_bar_int;
};

struct ScenarioData {
  ZoneTraceSet zones;
  GroundTruth truth;
};

/// Five (by default) 2R2C zones drawn once around a nominal zone whose
/// aggregate parameters land at realistic magnitudes; spread is the relative
/// half-width of the per-parameter perturbation. The solar apertures get
/// their own (usually smaller) spread: aperture heterogeneity puts a
/// sun-shaped component into the aggregation error that no estimator can
/// separate from the aggregate solar gain.
BuildingModel default_virtual_building(std::uint64_t seed, int n_zones = 5,
                                       double spread = 0.4,
                                       double aperture_spread = -1);

/// Zones sharing one construction but differing in size: capacitances and
/// apertures scale with a per-zone size factor (+-size_spread), resistances
/// scale inversely, and every parameter carries an extra +-construction_spread
/// jitter. Size heterogeneity leaves the aggregation error shaped like the
/// internal loads rather than like the sun, which keeps the solar gains
/// identifiable.
BuildingModel sized_virtual_building(std::uint64_t seed, int n_zones = 5,
                                     double size_spread = 0.4,
                                     double construction_spread = 0.1);

/// Deterministic given the spec (including its seed). The returned bundle
/// contains everything an identification experiment can be scored against.
ScenarioData generate(const ScenarioSpec& spec);

struct DeadbandState {
  bool cooling_on = false;
};

/// One controller evaluation; updates the hysteresis state and returns the
/// commanded cooling rate (kW).
double deadband_controller(double t_z, DeadbandState& state,
                           const DeadbandSpec& spec, double hour_of_day);

}  // namespace aggtherm
