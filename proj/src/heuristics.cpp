#include "aggtherm/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace aggtherm {

Eigen::VectorXd sample_mean(const Eigen::MatrixXd& tilde) {
  require(tilde.rows() >= 1, "sample mean needs at least one zone");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(tilde.cols());
  for (Eigen::Index j = 0; j < tilde.rows(); ++j) sum += tilde.row(j).transpose();
  return sum / static_cast<double>(tilde.rows());
}

std::optional<Eigen::VectorXd> sample_variance(const Eigen::MatrixXd& tilde) {
  if (tilde.rows() < 2) return std::nullopt;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(tilde.cols());
  for (Eigen::Index j = 0; j < tilde.rows(); ++j)
    sum += tilde.row(j).cwiseProduct(tilde.row(j)).transpose();
  return Eigen::VectorXd(sum / static_cast<double>(tilde.rows() - 1));
}

Eigen::VectorXd sliding_mean(const Eigen::VectorXd& values, Eigen::Index window) {
  require(window >= 1, "window must hold at least one sample");
  const Eigen::Index n = values.size();
  Eigen::VectorXd out(n);
  double acc = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    acc += values[k];
    if (k >= window) acc -= values[k - window];
    const Eigen::Index len = std::min(window, k + 1);
    out[k] = acc / static_cast<double>(len);
  }
  return out;
}

Eigen::VectorXd asynchronicity_index(const Eigen::VectorXd& windowed_var_t_z,
                                     const Eigen::VectorXd& windowed_var_q_ac,
                                     double peak_t_z, double peak_q_ac) {
  require(windowed_var_t_z.size() == windowed_var_q_ac.size(),
          "variance traces must share one grid");
  if (peak_t_z < 0) peak_t_z = windowed_var_t_z.size() ? windowed_var_t_z.maxCoeff() : 0;
  if (peak_q_ac < 0) peak_q_ac = windowed_var_q_ac.size() ? windowed_var_q_ac.maxCoeff() : 0;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(windowed_var_t_z.size());
  if (peak_t_z > 0) out += windowed_var_t_z / peak_t_z;
  if (peak_q_ac > 0) out += windowed_var_q_ac / peak_q_ac;
  return out;
}

VarianceReport variance_report(const ZoneTraceSet& traces, double window_hours,
                               std::array<bool, kSignalKindCount> kinds) {
  validate(traces);
  require(traces.n_zones() >= 2, "variance report needs at least two zones");
  require(window_hours > 0, "window must be positive");

  const AggregateData averages = average_signals(traces);
  const DeviationTraces tildes = deviation_signals(traces, averages);

  VarianceReport report;
  report.start_time_s = traces.start_time_s;
  report.t_s_hours = traces.t_s_hours;
  report.window_hours = window_hours;
  const Eigen::Index window = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::lround(window_hours / traces.t_s_hours)));

  auto emit = [&](SignalKind kind, const Eigen::MatrixXd* tilde) {
    if (!kinds[static_cast<int>(kind)] || tilde == nullptr) return;
    auto var = sample_variance(*tilde);
    report.variance[static_cast<int>(kind)] = *var;
    report.windowed[static_cast<int>(kind)] = sliding_mean(*var, window);
  };
  emit(SignalKind::t_a, &tildes.t_a);
  emit(SignalKind::t_z, &tildes.t_z);
  emit(SignalKind::t_w, tildes.t_w ? &*tildes.t_w : nullptr);
  emit(SignalKind::eta_solar, &tildes.eta_solar);
  emit(SignalKind::q_ac, &tildes.q_ac);
  emit(SignalKind::q_int, tildes.q_int ? &*tildes.q_int : nullptr);

  const auto& wt = report.windowed[static_cast<int>(SignalKind::t_z)];
  const auto& wq = report.windowed[static_cast<int>(SignalKind::q_ac)];
  if (wt && wq) report.index = asynchronicity_index(*wt, *wq);
  return report;
}

namespace {

Eigen::VectorXd ranks_with_ties(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
  Eigen::VectorXd rank(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && v[order[static_cast<std::size_t>(j + 1)]] ==
                            v[order[static_cast<std::size_t>(i)]])
      ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k)
      rank[order[static_cast<std::size_t>(k)]] = avg;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman_rank_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  require(x.size() == y.size() && x.size() >= 2,
          "rank correlation needs two equally sized samples");
  const Eigen::VectorXd rx = ranks_with_ties(x);
  const Eigen::VectorXd ry = ranks_with_ties(y);
  const Eigen::VectorXd cx = rx.array() - rx.mean();
  const Eigen::VectorXd cy = ry.array() - ry.mean();
  const double denom = std::sqrt(cx.squaredNorm() * cy.squaredNorm());
  if (denom == 0) return 0;
  return cx.dot(cy) / denom;
}

}  // namespace aggtherm
