#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aggtherm/error.hpp"

namespace aggtherm {

/// Uniformly sampled time series. Sample k sits at start_time_s + k*t_s_hours*3600.
struct SignalTrace {
  std::int64_t start_time_s = 0;
  double t_s_hours = 1.0 / 12;
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
};

bool same_grid(const SignalTrace& a, const SignalTrace& b);

/// Signals of one zone on the shared grid of a ZoneTraceSet.
/// t_w is only available from simulation; q_int only when metered.
struct ZoneSignals {
  std::string id;
  Eigen::VectorXd t_z;
  Eigen::VectorXd t_a;
  Eigen::VectorXd eta_solar;
  Eigen::VectorXd q_ac;
  std::optional<Eigen::VectorXd> t_w;
  std::optional<Eigen::VectorXd> q_int;
};

struct ZoneTraceSet {
  std::int64_t start_time_s = 0;
  double t_s_hours = 1.0 / 12;
  std::vector<ZoneSignals> zones;

  Eigen::Index n_zones() const { return static_cast<Eigen::Index>(zones.size()); }
  Eigen::Index n_samples() const {
    return zones.empty() ? 0 : zones.front().t_z.size();
  }
  bool has_walls() const;
  bool has_q_int() const;
};

/// Rejects ragged trace sets: every zone must carry every signal at the common
/// length, and the optional signals must be present for all zones or for none.
void validate(const ZoneTraceSet& traces);

}  // namespace aggtherm
