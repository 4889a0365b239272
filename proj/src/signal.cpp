#include "aggtherm/signal.hpp"

#include <cmath>

namespace aggtherm {

bool same_grid(const SignalTrace& a, const SignalTrace& b) {
  return a.start_time_s == b.start_time_s && a.t_s_hours == b.t_s_hours &&
         a.values.size() == b.values.size();
}

bool ZoneTraceSet::has_walls() const {
  if (zones.empty()) return false;
  for (const auto& z : zones)
    if (!z.t_w.has_value()) return false;
  return true;
}

bool ZoneTraceSet::has_q_int() const {
  if (zones.empty()) return false;
  for (const auto& z : zones)
    if (!z.q_int.has_value()) return false;
  return true;
}

void validate(const ZoneTraceSet& traces) {
  require(!traces.zones.empty(), "trace set has no zones");
  require(traces.t_s_hours > 0, "trace set sampling interval must be positive");
  const Eigen::Index n = traces.zones.front().t_z.size();
  require(n >= 1, "trace set must hold at least one sample");
  const bool walls = traces.zones.front().t_w.has_value();
  const bool metered = traces.zones.front().q_int.has_value();
  for (const auto& z : traces.zones) {
    require(z.t_z.size() == n && z.t_a.size() == n && z.eta_solar.size() == n &&
                z.q_ac.size() == n,
            "zone '" + z.id + "' has a trace of mismatched length");
    require(z.t_w.has_value() == walls,
            "wall temperature present for some zones but not all");
    require(z.q_int.has_value() == metered,
            "internal load present for some zones but not all");
    if (z.t_w) require(z.t_w->size() == n, "zone '" + z.id + "' t_w length mismatch");
    if (z.q_int) require(z.q_int->size() == n, "zone '" + z.id + "' q_int length mismatch");
    require(z.t_z.allFinite() && z.t_a.allFinite() && z.eta_solar.allFinite() &&
                z.q_ac.allFinite() && (!z.t_w || z.t_w->allFinite()) &&
                (!z.q_int || z.q_int->allFinite()),
            "zone '" + z.id + "' contains non-finite samples");
  }
}

}  // namespace aggtherm
