#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>

#include "aggtherm/aggregation.hpp"
#include "aggtherm/signal.hpp"

namespace aggtherm {

enum class SignalKind { t_a = 0, t_z, t_w, eta_solar, q_ac, q_int };
inline constexpr int kSignalKindCount = 6;

/// Mean over zones of the deviation values at each sample. For deviations
/// produced by deviation_signals this is zero by construction.
Eigen::VectorXd sample_mean(const Eigen::MatrixXd& tilde);

/// Per-sample variance over zones, sum_j tilde_j^2 / (N_z - 1).
/// Undefined (nullopt) for fewer than two zones.
std::optional<Eigen::VectorXd> sample_variance(const Eigen::MatrixXd& tilde);

/// Trailing moving average over the last `window` samples (clipped at the
/// start of the trace).
Eigen::VectorXd sliding_mean(const Eigen::VectorXd& values, Eigen::Index window);

/// Sum of the two windowed variance traces after normalizing each by a peak
/// value (its own maximum by default). A surrogate for how asynchronous the
/// zones are, and hence for how far the aggregate load drifts from the
/// average internal load.
Eigen::VectorXd asynchronicity_index(const Eigen::VectorXd& windowed_var_t_z,
                                     const Eigen::VectorXd& windowed_var_q_ac,
                                     double peak_t_z = -1, double peak_q_ac = -1);

/// Sample variances of the measurable deviation signals, zone temperature and
/// cooling rate by default; other kinds can be requested when the data carries
/// them. Also emits 1 h (configurable) windowed traces and the combined index.
struct VarianceReport {
  std::int64_t start_time_s = 0;
  double t_s_hours = 0;
  double window_hours = 1.0;
  std::array<std::optional<Eigen::VectorXd>, kSignalKindCount> variance;
  std::array<std::optional<Eigen::VectorXd>, kSignalKindCount> windowed;
  Eigen::VectorXd index;

  bool available(SignalKind k) const {
    return variance[static_cast<int>(k)].has_value();
  }
};

VarianceReport variance_report(const ZoneTraceSet& traces,
                               double window_hours = 1.0,
                               std::array<bool, kSignalKindCount> kinds = {
                                   false, true, false, false, true, false});

/// Spearman rank correlation with average ranks on ties.
double spearman_rank_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace aggtherm
