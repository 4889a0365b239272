#include "aggtherm/cli.hpp"

#include <fstream>
#include <iostream>

#include "aggtherm/csv_io.hpp"
#include "aggtherm/heuristics.hpp"

namespace aggtherm::cli {

namespace {

const std::vector<std::string> kThetaNames = {"tau_za", "tau_zw", "tau_wa",
                                              "tau_wz", "c_z",    "a_z",
                                              "a_w"};
const std::vector<std::string> kThetaUnits = {"h",       "h",   "h", "h",
                                              "kWh/C",   "C.m2/kWh",
                                              "C.m2/kWh"};

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write '" + path.string() + "'");
  out << content;
}

void echo_config(const Config& config, const std::filesystem::path& out_dir) {
  write_text(out_dir / "config_echo.txt", config.echo());
}

std::filesystem::path prepare_out_dir(const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  return out_dir;
}

ZoneTraceSet load_input(const Config& config) {
  return ingest_zone_csv(config.get_required("data.input"));
}

std::vector<ParamRow> theta_rows(const AggregateParams& estimate,
                                 const std::optional<AggregateParams>& truth) {
  const auto est = estimate.as_vector();
  std::vector<ParamRow> rows;
  for (int i = 0; i < 7; ++i) {
    ParamRow row{kThetaNames[static_cast<std::size_t>(i)], est[i], std::nullopt,
                 kThetaUnits[static_cast<std::size_t>(i)]};
    if (truth) row.true_value = truth->as_vector()[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

AggregateParams params_from_map(const std::map<std::string, double>& values,
                                const std::string& source) {
  Eigen::Matrix<double, 7, 1> v;
  for (int i = 0; i < 7; ++i) {
    const auto& name = kThetaNames[static_cast<std::size_t>(i)];
    const auto it = values.find(name);
    require(it != values.end(), source + ": missing parameter '" + name + "'");
    v[i] = it->second;
  }
  return AggregateParams::from_vector(v);
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace

ScenarioSpec scenario_from_config(const Config& c,
                                  std::optional<std::uint64_t> seed_override) {
  ScenarioSpec spec;
  spec.seed = seed_override.value_or(
      static_cast<std::uint64_t>(c.get_int("scenario.seed", 1)));
  const std::string recipe = c.get_string("scenario.building", "sized");
  const int n_zones = static_cast<int>(c.get_int("scenario.zones", 5));
  if (recipe == "sized") {
    spec.building = sized_virtual_building(
        spec.seed, n_zones, c.get_double("scenario.size_spread", 0.4),
        c.get_double("scenario.construction_spread", 0.1));
  } else if (recipe == "independent") {
    spec.building = default_virtual_building(
        spec.seed, n_zones, c.get_double("scenario.param_spread", 0.4),
        c.get_double("scenario.aperture_spread", -1.0));
  } else {
    throw Error("scenario.building must be sized or independent, got '" + recipe +
                "'");
  }
  if (c.has("scenario.interaction_r")) {
    const double r = c.get_double("scenario.interaction_r", 0.0);
    require(r > 0, "scenario.interaction_r must be positive");
    const Eigen::Index nz = spec.building.n_zones();
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(nz, nz, r);
    spec.building = make_building_model(spec.building.zones, m);
  }
  spec.horizon_days = c.get_double("scenario.days", 2.0);
  const auto steps_per_hour = c.get_int("scenario.steps_per_hour", 12);
  require(steps_per_hour >= 1, "scenario.steps_per_hour must be at least 1");
  spec.t_s_hours = 1.0 / static_cast<double>(steps_per_hour);
  spec.start_time_s =
      parse_iso8601(c.get_string("scenario.start_time", "2018-09-21T00:00:00"));
  spec.weather.mean_c = c.get_double("scenario.weather.mean", 25.0);
  spec.weather.amplitude_c = c.get_double("scenario.weather.amplitude", 6.0);
  spec.weather.peak_hour = c.get_double("scenario.weather.peak_hour", 15.0);
  spec.solar.peak_kw_m2 = c.get_double("scenario.solar.peak", 0.6);
  spec.solar.sunrise_hour = c.get_double("scenario.solar.sunrise", 6.5);
  spec.solar.sunset_hour = c.get_double("scenario.solar.sunset", 19.0);
  if (c.has("scenario.solar.daily_scale")) {
    spec.solar.daily_scale.clear();
    const std::string text = c.get_required("scenario.solar.daily_scale");
    std::size_t pos = 0;
    while (pos < text.size()) {
      const auto comma = text.find(',', pos);
      const std::string item =
          text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        spec.solar.daily_scale.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw Error("scenario.solar.daily_scale: cannot parse '" + item + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  spec.occupancy.base_kw = c.get_double("scenario.occupancy.base", 0.05);
  if (c.has("scenario.occupancy.schedule")) {
    // "hour:level,hour:level,..." switch points over the day
    spec.occupancy.schedule.clear();
    const std::string text = c.get_required("scenario.occupancy.schedule");
    std::size_t pos = 0;
    while (pos < text.size()) {
      const auto comma = text.find(',', pos);
      const std::string item =
          text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      const auto colon = item.find(':');
      require(colon != std::string::npos,
              "scenario.occupancy.schedule entries must look like hour:level");
      try {
        spec.occupancy.schedule.push_back(
            {std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
      } catch (const std::exception&) {
        throw Error("scenario.occupancy.schedule: cannot parse '" + item + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  const std::string mode = c.get_string("scenario.hvac.mode", "open_loop");
  if (mode == "open_loop") {
    OpenLoopHvacSpec ol;
    ol.capacity_kw = c.get_double("scenario.hvac.capacity", 1.2);
    ol.start_hour = c.get_double("scenario.hvac.start", 8.0);
    ol.split_hour = c.get_double("scenario.hvac.split", 13.0);
    ol.end_hour = c.get_double("scenario.hvac.end", 19.0);
    ol.afternoon_fraction = c.get_double("scenario.hvac.afternoon_fraction", 0.6);
    spec.hvac = ol;
  } else if (mode == "deadband") {
    DeadbandSpec db;
    db.setpoint_c = c.get_double("scenario.hvac.setpoint", 24.0);
    db.halfwidth_c = c.get_double("scenario.hvac.deadband", 0.5);
    db.capacity_kw = c.get_double("scenario.hvac.capacity", 8.0);
    db.night_start_hour = c.get_double("scenario.hvac.night_start", 22.0);
    db.night_end_hour = c.get_double("scenario.hvac.night_end", 6.0);
    spec.hvac = db;
  } else {
    throw Error("scenario.hvac.mode must be open_loop or deadband, got '" + mode +
                "'");
  }
  spec.asynchronicity = c.get_double("scenario.asynchronicity", 0.5);
  spec.shift_span_hours = c.get_double("scenario.shift_span_hours", 2.0);
  spec.amplitude_span = c.get_double("scenario.amplitude_span", 0.4);
  return spec;
}

IdentConfig ident_from_config(const Config& c) {
  IdentConfig cfg;
  cfg.lambda = c.get_double("ident.lambda", cfg.lambda);
  cfg.r_inv = c.get_double("ident.r_inv", cfg.r_inv);
  cfg.alpha = c.get_double("ident.alpha", cfg.alpha);
  cfg.q_agg_scale = c.get_double("ident.q_scale", cfg.q_agg_scale);
  cfg.kkt_tol = c.get_double("ident.kkt_tol", cfg.kkt_tol);
  cfg.constraint_tol = c.get_double("ident.constraint_tol", cfg.constraint_tol);
  cfg.max_outer = static_cast<int>(c.get_int("ident.max_outer", cfg.max_outer));
  cfg.max_inner = static_cast<int>(c.get_int("ident.max_inner", cfg.max_inner));
  cfg.multistart = static_cast<int>(c.get_int("ident.multistart", cfg.multistart));
  cfg.multistart_seed = static_cast<std::uint64_t>(
      c.get_int("ident.multistart_seed", static_cast<std::int64_t>(cfg.multistart_seed)));
  cfg.multistart_spread =
      c.get_double("ident.multistart_spread", cfg.multistart_spread);

  auto prior = cfg.theta_prior.as_vector();
  for (int i = 0; i < 7; ++i)
    prior[i] = c.get_double("ident.prior." + kThetaNames[static_cast<std::size_t>(i)],
                            prior[i]);
  cfg.theta_prior = AggregateParams::from_vector(prior);

  const double w = c.get_double("ident.prior_weight", 0.1);
  Eigen::Matrix<double, 7, 1> weights = Eigen::Matrix<double, 7, 1>::Constant(w);
  for (int i = 0; i < 7; ++i)
    weights[i] = c.get_double(
        "ident.prior_weight." + kThetaNames[static_cast<std::size_t>(i)], weights[i]);
  cfg.theta_weight = weights.asDiagonal();

  Eigen::Vector3d x0w(c.get_double("ident.x0_weight.t_z", 1.0),
                      c.get_double("ident.x0_weight.t_w", 0.01),
                      c.get_double("ident.x0_weight.q_agg", 0.01));
  cfg.x0_weight = x0w.asDiagonal();

  const double tmin = c.get_double("ident.theta_min", 1e-3);
  const double tmax = c.get_double("ident.theta_max", 1e3);
  cfg.theta_lower.setConstant(tmin);
  cfg.theta_upper.setConstant(tmax);
  return cfg;
}

int run_simulate(const Config& config, const std::filesystem::path& out_dir) {
  return guarded([&] {
    const auto out = prepare_out_dir(out_dir);
    const ScenarioSpec spec = scenario_from_config(config, std::nullopt);
    const ScenarioData data = generate(spec);

    write_zone_csv(out / "zones.csv", data.zones);

    const AggregateData averages = average_signals(data.zones);
    Eigen::MatrixXd truth(data.zones.n_samples(), 9);
    truth.col(0) = averages.t_bar_z.values;
    truth.col(1) = averages.t_bar_w->values;
    truth.col(2) = averages.t_bar_a.values;
    truth.col(3) = averages.eta_bar_solar.values;
    truth.col(4) = averages.q_bar_ac.values;
    truth.col(5) = data.truth.q_bar_int.values;
    truth.col(6) = data.truth.w_tilde_z.values;
    truth.col(7) = data.truth.w_tilde_w.values;
    truth.col(8) = data.truth.q_bar_agg.values;
    write_timeseries_csv(out / "truth_aggregate.csv", data.zones.start_time_s,
                         data.zones.t_s_hours,
                         {"T_bar_z", "T_bar_w", "T_bar_a", "eta_bar_solar",
                          "q_bar_ac", "q_bar_int", "w_tilde_z", "w_tilde_w",
                          "q_bar_agg"},
                         truth);
    write_params_csv(out / "truth_params.csv", theta_rows(data.truth.theta, {}));
    echo_config(config, out);
    return kExitOk;
  });
}

int run_aggregate(const Config& config, const std::filesystem::path& out_dir) {
  return guarded([&] {
    const auto out = prepare_out_dir(out_dir);
    const ZoneTraceSet traces = load_input(config);
    const AggregateData averages = average_signals(traces);

    std::vector<std::string> columns = {"T_bar_z", "T_bar_a", "eta_bar_solar",
                                        "q_bar_ac"};
    Eigen::Index cols = 4 + (averages.q_bar_int ? 1 : 0);
    Eigen::MatrixXd values(averages.n_samples(), cols);
    values.col(0) = averages.t_bar_z.values;
    values.col(1) = averages.t_bar_a.values;
    values.col(2) = averages.eta_bar_solar.values;
    values.col(3) = averages.q_bar_ac.values;
    if (averages.q_bar_int) {
      columns.push_back("q_bar_int");
      values.col(4) = averages.q_bar_int->values;
    }
    write_timeseries_csv(out / "aggregate.csv", averages.start_time_s(),
                         averages.t_s_hours(), columns, values);
    echo_config(config, out);
    return kExitOk;
  });
}

int run_identify(const Config& config, const std::filesystem::path& out_dir) {
  return guarded([&] {
    const auto out = prepare_out_dir(out_dir);
    const ZoneTraceSet traces = load_input(config);
    const AggregateData averages = average_signals(traces);
    const IdentConfig cfg = ident_from_config(config);
    const EstimationResult result = solve_batch(averages, cfg);

    const Eigen::Index n = averages.n_samples();
    Eigen::MatrixXd est(n, 4);
    est.col(0) = averages.t_bar_z.values;
    est.col(1) = result.x_hat.row(1).transpose();
    est.col(2) = result.x_hat.row(2).transpose();
    est.col(3) = result.nu_hat;
    write_timeseries_csv(out / "estimate.csv", averages.start_time_s(),
                         averages.t_s_hours(),
                         {"T_bar_z", "T_bar_w_hat", "q_agg_hat", "nu"}, est);

    std::optional<AggregateParams> truth;
    if (config.has("ident.truth_params"))
      truth = params_from_map(read_params_csv(config.get_required("ident.truth_params")),
                              "ident.truth_params");
    write_params_csv(out / "params.csv", theta_rows(result.theta_hat, truth));

    if (averages.q_bar_int) {
      Eigen::MatrixXd dist(n, 2);
      dist.col(0) = result.x_hat.row(2).transpose();
      dist.col(1) = averages.q_bar_int->values;
      write_timeseries_csv(out / "disturbance.csv", averages.start_time_s(),
                           averages.t_s_hours(), {"q_agg_hat", "q_bar_int"}, dist);
    }

    const double fit_rmse = std::sqrt(result.nu_hat.squaredNorm() /
                                      static_cast<double>(result.nu_hat.size()));
    std::string summary;
    summary += "converged=" + std::string(result.converged ? "true" : "false") + "\n";
    summary += "objective=" + format_double(result.objective_value) + "\n";
    summary += "kkt_residual=" + format_double(result.kkt_residual) + "\n";
    summary += "constraint_inf=" + format_double(result.constraint_inf) + "\n";
    summary += "outer_iterations=" + std::to_string(result.outer_iterations) + "\n";
    summary += "inner_iterations=" + std::to_string(result.inner_iterations) + "\n";
    summary += "fit_rmse_c=" + format_double(fit_rmse) + "\n";
    const auto est_vec = result.theta_hat.as_vector();
    for (int i = 0; i < 7; ++i)
      summary += kThetaNames[static_cast<std::size_t>(i)] + "=" +
                 format_double(est_vec[i]) + "\n";
    write_text(out / "summary.txt", summary);
    echo_config(config, out);
    return result.converged ? kExitOk : kExitNotConverged;
  });
}

int run_predict(const Config& config, const std::filesystem::path& out_dir) {
  return guarded([&] {
    const auto out = prepare_out_dir(out_dir);
    const ZoneTraceSet traces = load_input(config);
    const AggregateData averages = average_signals(traces);
    const AggregateParams theta = params_from_map(
        read_params_csv(config.get_required("predict.params")), "predict.params");

    const Eigen::Index n = averages.n_samples();
    Eigen::VectorXd disturbance;
    const std::string source = config.get_string("predict.disturbance", "q_int");
    if (source == "q_int") {
      require(averages.q_bar_int.has_value(),
              "predict.disturbance=q_int needs a metered q_int column in the data");
      disturbance = averages.q_bar_int->values;
    } else if (source == "file") {
      const TimeSeriesTable table =
          read_timeseries_csv(config.get_required("predict.disturbance_file"));
      const std::string column =
          config.get_string("predict.disturbance_column", "q_bar_agg");
      const std::int64_t step_s = std::llround(averages.t_s_hours() * 3600.0);
      require(std::llround(table.t_s_hours * 3600.0) == step_s,
              "disturbance file sampling interval differs from the data");
      const std::int64_t offset_s = averages.start_time_s() - table.start_time_s;
      require(offset_s >= 0 && offset_s % step_s == 0,
              "disturbance file does not cover the data window");
      const Eigen::Index offset = offset_s / step_s;
      require(table.n_samples() >= offset + n,
              "disturbance file shorter than the data window");
      disturbance = table.column(column).segment(offset, n);
    } else {
      throw Error("predict.disturbance must be q_int or file, got '" + source + "'");
    }

    const double t_w0 = config.has("predict.t_w0")
                            ? config.get_double("predict.t_w0", 0.0)
                            : averages.t_bar_z.values[0];
    const Eigen::Vector3d x0(averages.t_bar_z.values[0], t_w0, disturbance[0]);
    const PredictionResult pred =
        predict_out_of_sample(theta, averages, disturbance, x0);

    Eigen::MatrixXd table(n, 3);
    table.col(0) = averages.t_bar_z.values;
    table.col(1) = pred.t_bar_z_pred;
    table.col(2) = pred.t_bar_z_pred - averages.t_bar_z.values;
    write_timeseries_csv(out / "prediction.csv", averages.start_time_s(),
                         averages.t_s_hours(),
                         {"T_bar_z_measured", "T_bar_z_predicted", "error"}, table);
    write_text(out / "summary.txt", "RMSE_C=" + format_double(pred.rmse) + "\n");
    echo_config(config, out);
    return kExitOk;
  });
}

int run_variance_report(const Config& config, const std::filesystem::path& out_dir) {
  return guarded([&] {
    const auto out = prepare_out_dir(out_dir);
    const ZoneTraceSet traces = load_input(config);
    const double window = config.get_double("variance.window_hours", 1.0);
    const VarianceReport report = variance_report(traces, window);

    const auto& var_tz = *report.variance[static_cast<int>(SignalKind::t_z)];
    const auto& var_qac = *report.variance[static_cast<int>(SignalKind::q_ac)];
    const auto& win_tz = *report.windowed[static_cast<int>(SignalKind::t_z)];
    const auto& win_qac = *report.windowed[static_cast<int>(SignalKind::q_ac)];
    Eigen::MatrixXd values(var_tz.size(), 5);
    values.col(0) = var_tz;
    values.col(1) = var_qac;
    values.col(2) = win_tz;
    values.col(3) = win_qac;
    values.col(4) = report.index;
    write_timeseries_csv(out / "variance.csv", report.start_time_s,
                         report.t_s_hours,
                         {"var_T_z", "var_q_ac", "var_T_z_windowed",
                          "var_q_ac_windowed", "asynchronicity_index"},
                         values);
    std::string summary;
    summary += "window_hours=" + format_double(report.window_hours) + "\n";
    summary += "index_mean=" + format_double(report.index.mean()) + "\n";
    summary += "index_max=" + format_double(report.index.maxCoeff()) + "\n";
    write_text(out / "summary.txt", summary);
    echo_config(config, out);
    return kExitOk;
  });
}

}  // namespace aggtherm::cli
