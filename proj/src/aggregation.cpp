#include "aggtherm/aggregation.hpp"

#include <cmath>

namespace aggtherm {

Eigen::Matrix<double, 7, 1> AggregateParams::as_vector() const {
  Eigen::Matrix<double, 7, 1> v;
  v << tau_za, tau_zw, tau_wa, tau_wz, c_z, a_z, a_w;
  return v;
}

AggregateParams AggregateParams::from_vector(const Eigen::Matrix<double, 7, 1>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

bool AggregateParams::all_positive() const {
  return tau_za > 0 && tau_zw > 0 && tau_wa > 0 && tau_wz > 0 && c_z > 0 &&
         a_z > 0 && a_w > 0;
}

namespace {

SignalTrace make_trace(const ZoneTraceSet& src, Eigen::VectorXd values) {
  return SignalTrace{src.start_time_s, src.t_s_hours, std::move(values)};
}

// Fixed zone-index summation order for reproducibility.
Eigen::VectorXd zone_mean(const ZoneTraceSet& traces,
                          const Eigen::VectorXd ZoneSignals::*member) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(traces.n_samples());
  for (const auto& z : traces.zones) sum += z.*member;
  return sum / static_cast<double>(traces.n_zones());
}

Eigen::VectorXd zone_mean_opt(const ZoneTraceSet& traces,
                              const std::optional<Eigen::VectorXd> ZoneSignals::*member) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(traces.n_samples());
  for (const auto& z : traces.zones) sum += *(z.*member);
  return sum / static_cast<double>(traces.n_zones());
}

}  // namespace

AggregateData average_signals(const ZoneTraceSet& traces) {
  validate(traces);
  AggregateData out;
  out.t_bar_z = make_trace(traces, zone_mean(traces, &ZoneSignals::t_z));
  out.t_bar_a = make_trace(traces, zone_mean(traces, &ZoneSignals::t_a));
  out.eta_bar_solar = make_trace(traces, zone_mean(traces, &ZoneSignals::eta_solar));
  out.q_bar_ac = make_trace(traces, zone_mean(traces, &ZoneSignals::q_ac));
  if (traces.has_walls())
    out.t_bar_w = make_trace(traces, zone_mean_opt(traces, &ZoneSignals::t_w));
  if (traces.has_q_int())
    out.q_bar_int = make_trace(traces, zone_mean_opt(traces, &ZoneSignals::q_int));
  return out;
}

DeviationTraces deviation_signals(const ZoneTraceSet& traces,
                                  const AggregateData& averages) {
  validate(traces);
  const Eigen::Index nz = traces.n_zones();
  const Eigen::Index n = traces.n_samples();
  require(averages.n_samples() == n, "averages and traces must share the grid");

  DeviationTraces out;
  out.t_z.resize(nz, n);
  out.t_a.resize(nz, n);
  out.eta_solar.resize(nz, n);
  out.q_ac.resize(nz, n);
  if (traces.has_walls()) {
    require(averages.t_bar_w.has_value(), "averages lack the wall temperature");
    out.t_w.emplace(nz, n);
  }
  if (traces.has_q_int()) {
    require(averages.q_bar_int.has_value(), "averages lack the internal load");
    out.q_int.emplace(nz, n);
  }
  for (Eigen::Index j = 0; j < nz; ++j) {
    const auto& z = traces.zones[static_cast<std::size_t>(j)];
    out.t_z.row(j) = (z.t_z - averages.t_bar_z.values).transpose();
    out.t_a.row(j) = (z.t_a - averages.t_bar_a.values).transpose();
    out.eta_solar.row(j) = (z.eta_solar - averages.eta_bar_solar.values).transpose();
    out.q_ac.row(j) = (z.q_ac - averages.q_bar_ac.values).transpose();
    if (out.t_w) out.t_w->row(j) = (*z.t_w - averages.t_bar_w->values).transpose();
    if (out.q_int)
      out.q_int->row(j) = (*z.q_int - averages.q_bar_int->values).transpose();
  }
  return out;
}

AggregateParams aggregate_params(const BuildingModel& model) {
  validate(model);
  const double nz = static_cast<double>(model.n_zones());
  double inv_tau_za = 0, inv_tau_zw = 0, inv_tau_wa = 0, inv_tau_wz = 0;
  double inv_c_z = 0, a_z = 0, a_w = 0;
  for (const auto& p : model.zones) {
    inv_tau_za += 1.0 / (p.r_za * p.c_z);
    inv_tau_zw += 1.0 / (p.r_zw * p.c_z);
    inv_tau_wa += 1.0 / (p.r_wa * p.c_w);
    inv_tau_wz += 1.0 / (p.r_zw * p.c_w);
    inv_c_z += 1.0 / p.c_z;
    a_z += p.a_z / p.c_z;
    a_w += p.a_w / p.c_w;
  }
  return {nz / inv_tau_za, nz / inv_tau_zw, nz / inv_tau_wa, nz / inv_tau_wz,
          nz / inv_c_z,    a_z / nz,        a_w / nz};
}

AggregationErrors aggregation_errors(const BuildingModel& model,
                                     const ZoneTraceSet& traces,
                                     const DeviationTraces& tildes) {
  validate(model);
  validate(traces);
  require(model.n_zones() == traces.n_zones(),
          "model and traces must agree on the zone count");
  require(traces.has_walls() && traces.has_q_int(),
          "aggregation errors need wall temperatures and metered internal loads");
  require(tildes.t_w.has_value() && tildes.q_int.has_value(),
          "deviation traces lack wall or internal-load rows");

  const Eigen::Index nz = traces.n_zones();
  const Eigen::Index n = traces.n_samples();
  require(tildes.t_z.rows() == nz && tildes.t_z.cols() == n,
          "deviation traces do not match the trace grid");

  Eigen::VectorXd wz = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ww = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < nz; ++j) {
    const auto& p = model.zones[static_cast<std::size_t>(j)];
    wz += ((tildes.t_a.row(j) - tildes.t_z.row(j)) / (p.r_za * p.c_z) +
           (tildes.t_w->row(j) - tildes.t_z.row(j)) / (p.r_zw * p.c_z) +
           (tildes.q_int->row(j) - tildes.q_ac.row(j) +
            p.a_z * tildes.eta_solar.row(j)) /
               p.c_z)
              .transpose();
    ww += ((tildes.t_a.row(j) - tildes.t_w->row(j)) / (p.r_wa * p.c_w) +
           (tildes.t_z.row(j) - tildes.t_w->row(j)) / (p.r_zw * p.c_w) +
           (p.a_w / p.c_w) * tildes.eta_solar.row(j))
              .transpose();
  }
  wz /= static_cast<double>(nz);
  ww /= static_cast<double>(nz);

  // Inter-zone couplings leave the aggregate structure intact but shift the
  // zone-side aggregation error; with equal zone capacitances the double sum
  // cancels pair by pair.
  if (model.interaction_resistance) {
    const auto& r = *model.interaction_resistance;
    Eigen::VectorXd coupling = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < nz; ++i) {
      for (Eigen::Index j = 0; j < nz; ++j) {
        if (i == j) continue;
        const double r_ij = r(i, j);
        if (!std::isfinite(r_ij)) continue;
        const double c_j = model.zones[static_cast<std::size_t>(j)].c_z;
        coupling += ((tildes.t_z.row(i) - tildes.t_z.row(j)) / (r_ij * c_j)).transpose();
      }
    }
    wz += coupling / static_cast<double>(nz);
  }

  const AggregateParams agg = aggregate_params(model);
  const Eigen::VectorXd q_bar_int = [&] {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    for (const auto& z : traces.zones) sum += *z.q_int;
    return Eigen::VectorXd(sum / static_cast<double>(nz));
  }();

  AggregationErrors out;
  out.w_tilde_z = make_trace(traces, wz);
  out.w_tilde_w = make_trace(traces, ww);
  out.q_bar_agg = make_trace(traces, q_bar_int + agg.c_z * wz);
  return out;
}

AverageDerivatives reconstruct_average_dynamics(const AggregateParams& params,
                                                const AggregateData& averages,
                                                const AggregationErrors& errors) {
  require(params.all_positive(), "aggregate parameters must be positive");
  require(averages.t_bar_w.has_value() && averages.q_bar_int.has_value(),
          "reconstruction needs averaged wall temperature and internal load");
  const Eigen::Index n = averages.n_samples();
  require(errors.w_tilde_z.size() == n && errors.w_tilde_w.size() == n,
          "aggregation-error traces must share the data grid");

  const auto& tz = averages.t_bar_z.values;
  const auto& tw = averages.t_bar_w->values;
  const auto& ta = averages.t_bar_a.values;
  const auto& eta = averages.eta_bar_solar.values;
  const auto& qac = averages.q_bar_ac.values;
  const auto& qint = averages.q_bar_int->values;

  AverageDerivatives out;
  out.d_t_bar_z = (ta - tz) / params.tau_za + (tw - tz) / params.tau_zw +
                  (qint - qac) / params.c_z + params.a_z * eta +
                  errors.w_tilde_z.values;
  out.d_t_bar_w = (ta - tw) / params.tau_wa + (tz - tw) / params.tau_wz +
                  params.a_w * eta + errors.w_tilde_w.values;
  return out;
}

TimeVaryingParams time_varying_params(const ZoneTraceSet& traces,
                                      const BuildingModel& model,
                                      double epsilon) {
  validate(model);
  validate(traces);
  require(model.n_zones() == traces.n_zones(),
          "model and traces must agree on the zone count");
  require(traces.has_walls() && traces.has_q_int(),
          "time-varying diagnostic needs wall temperatures and internal loads");

  const Eigen::Index nz = traces.n_zones();
  const Eigen::Index n = traces.n_samples();
  const double nzd = static_cast<double>(nz);

  TimeVaryingParams out;
  auto init = [&](Eigen::VectorXd& v, Eigen::Array<bool, Eigen::Dynamic, 1>& m) {
    v = Eigen::VectorXd::Zero(n);
    m = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, false);
  };
  init(out.tau_za, out.tau_za_defined);
  init(out.tau_zw, out.tau_zw_defined);
  init(out.tau_wa, out.tau_wa_defined);
  init(out.tau_wz, out.tau_wz_defined);
  init(out.c_z_ac, out.c_z_ac_defined);
  init(out.c_z_int, out.c_z_int_defined);
  init(out.a_z, out.a_z_defined);
  init(out.a_w, out.a_w_defined);

  // tau_pm(t) = N_z (Tbar_m - Tbar_p) / sum_j (T_m^j - T_p^j)/(R_pm^j C_p^j),
  // undefined when either the ratio's denominator or the average temperature
  // gap vanishes (the construction is singular when the averages cross).
  auto ratio = [&](double num, double den, double num_guard, Eigen::VectorXd& v,
                   Eigen::Array<bool, Eigen::Dynamic, 1>& m, Eigen::Index k) {
    if (std::abs(den) < epsilon || std::abs(num_guard) < epsilon) return;
    v[k] = num / den;
    m[k] = true;
  };

  for (Eigen::Index k = 0; k < n; ++k) {
    double tbar_z = 0, tbar_w = 0, tbar_a = 0, eta_bar = 0, q_bar_ac = 0,
           q_bar_int = 0;
    double s_za = 0, s_zw = 0, s_wa = 0, s_wz = 0, s_ac = 0, s_int = 0,
           s_az = 0, s_aw = 0;
    for (Eigen::Index j = 0; j < nz; ++j) {
      const auto& z = traces.zones[static_cast<std::size_t>(j)];
      const auto& p = model.zones[static_cast<std::size_t>(j)];
      const double t_z = z.t_z[k], t_w = (*z.t_w)[k], t_a = z.t_a[k];
      const double eta = z.eta_solar[k], q_ac = z.q_ac[k], q_int = (*z.q_int)[k];
      tbar_z += t_z;
      tbar_w += t_w;
      tbar_a += t_a;
      eta_bar += eta;
      q_bar_ac += q_ac;
      q_bar_int += q_int;
      s_za += (t_a - t_z) / (p.r_za * p.c_z);
      s_zw += (t_w - t_z) / (p.r_zw * p.c_z);
      s_wa += (t_a - t_w) / (p.r_wa * p.c_w);
      s_wz += (t_z - t_w) / (p.r_zw * p.c_w);
      s_ac += q_ac / p.c_z;
      s_int += q_int / p.c_z;
      s_az += (p.a_z / p.c_z) * eta;
      s_aw += (p.a_w / p.c_w) * eta;
    }
    tbar_z /= nzd;
    tbar_w /= nzd;
    tbar_a /= nzd;
    eta_bar /= nzd;
    q_bar_ac /= nzd;
    q_bar_int /= nzd;

    ratio(nzd * (tbar_a - tbar_z), s_za, tbar_a - tbar_z, out.tau_za,
          out.tau_za_defined, k);
    ratio(nzd * (tbar_w - tbar_z), s_zw, tbar_w - tbar_z, out.tau_zw,
          out.tau_zw_defined, k);
    ratio(nzd * (tbar_a - tbar_w), s_wa, tbar_a - tbar_w, out.tau_wa,
          out.tau_wa_defined, k);
    ratio(nzd * (tbar_z - tbar_w), s_wz, tbar_z - tbar_w, out.tau_wz,
          out.tau_wz_defined, k);
    ratio(nzd * q_bar_ac, s_ac, q_bar_ac, out.c_z_ac, out.c_z_ac_defined, k);
    ratio(nzd * q_bar_int, s_int, q_bar_int, out.c_z_int, out.c_z_int_defined, k);
    ratio(s_az, nzd * eta_bar, eta_bar, out.a_z, out.a_z_defined, k);
    ratio(s_aw, nzd * eta_bar, eta_bar, out.a_w, out.a_w_defined, k);
  }
  return out;
}

}  // namespace aggtherm
