// End-to-end acceptance suite: prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Scenario seeds and estimator settings
// are frozen here so every run checks the same numbers.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "aggtherm/cli.hpp"
#include "aggtherm/csv_io.hpp"
#include "aggtherm/estimation.hpp"
#include "aggtherm/heuristics.hpp"
#include "aggtherm/scenarios.hpp"
#include "oracles.hpp"

using namespace aggtherm;
namespace fs = std::filesystem;

namespace {

struct Clock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s  %2d  %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// The frozen open-loop scenario behind criteria 2, 3, and the ingredients of
// 4 and 6: five zones of one construction in different sizes, a two-day
// sunny/cloudy window, and occupancy shifted per zone.
ScenarioSpec table_analogue_spec() {
  ScenarioSpec spec;
  spec.building = sized_virtual_building(1, 5, 0.4, 0.1);
  spec.horizon_days = 2.0;
  spec.t_s_hours = 1.0 / 12;
  spec.start_time_s = parse_iso8601("2018-09-21T00:00:00");
  spec.asynchronicity = 0.5;
  spec.seed = 1;
  return spec;
}

IdentConfig acceptance_ident_config() {
  IdentConfig cfg;
  cfg.lambda = 0.5;
  cfg.r_inv = 1600.0;
  cfg.theta_weight = 0.01 * Eigen::Matrix<double, 7, 7>::Identity();
  cfg.max_inner = 4000;
  cfg.max_outer = 40;
  return cfg;
}

AggregateData slice(const AggregateData& data, Eigen::Index start, Eigen::Index len) {
  auto cut = [&](const SignalTrace& t) {
    SignalTrace out;
    out.t_s_hours = t.t_s_hours;
    out.start_time_s = t.start_time_s +
                       start * static_cast<std::int64_t>(std::llround(t.t_s_hours * 3600));
    out.values = t.values.segment(start, len);
    return out;
  };
  AggregateData out;
  out.t_bar_z = cut(data.t_bar_z);
  out.t_bar_a = cut(data.t_bar_a);
  out.eta_bar_solar = cut(data.eta_bar_solar);
  out.q_bar_ac = cut(data.q_bar_ac);
  if (data.t_bar_w) out.t_bar_w = cut(*data.t_bar_w);
  if (data.q_bar_int) out.q_bar_int = cut(*data.q_bar_int);
  return out;
}

double max_dynamics_residual(const EstimationResult& result,
                             const AggregateData& data) {
  const auto d = discretize(build_augmented_model(result.theta_hat),
                            data.t_s_hours());
  double worst = 0;
  for (Eigen::Index k = 0; k + 1 < data.n_samples(); ++k) {
    const Eigen::Vector3d u(data.t_bar_a.values[k], data.eta_bar_solar.values[k],
                            data.q_bar_ac.values[k]);
    const Eigen::Vector3d next = d.step(result.x_hat.col(k), u, result.xi_hat[k]);
    worst = std::max(worst, (result.x_hat.col(k + 1) - next).cwiseAbs().maxCoeff());
  }
  return worst;
}

double zero_mean_worst(const ZoneTraceSet& traces) {
  const auto avg = average_signals(traces);
  const auto tilde = deviation_signals(traces, avg);
  double worst = sample_mean(tilde.t_z).cwiseAbs().maxCoeff();
  worst = std::max(worst, sample_mean(tilde.t_a).cwiseAbs().maxCoeff());
  worst = std::max(worst, sample_mean(tilde.eta_solar).cwiseAbs().maxCoeff());
  worst = std::max(worst, sample_mean(tilde.q_ac).cwiseAbs().maxCoeff());
  if (tilde.t_w) worst = std::max(worst, sample_mean(*tilde.t_w).cwiseAbs().maxCoeff());
  if (tilde.q_int)
    worst = std::max(worst, sample_mean(*tilde.q_int).cwiseAbs().maxCoeff());
  return worst;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

int main() {
  const Clock total;

  // ---- shared artifacts -------------------------------------------------
  const ScenarioSpec open_loop = table_analogue_spec();
  const ScenarioData open_data = generate(open_loop);
  const AggregateData open_avg = average_signals(open_data.zones);
  const AggregateParams open_truth = aggregate_params(open_loop.building);

  std::vector<const ZoneTraceSet*> generated_sets{&open_data.zones};

  // ---- 1: exact aggregation identity ------------------------------------
  {
    const Clock clock;
    ScenarioSpec spec;
    spec.building = default_virtual_building(42, 5, 0.4);
    spec.horizon_days = 1.0;
    spec.t_s_hours = 1.0 / 12;
    spec.asynchronicity = 0.9;
    spec.seed = 42;
    const auto data = generate(spec);
    const auto avg = average_signals(data.zones);
    const auto tilde = deviation_signals(data.zones, avg);
    const auto errors = aggregation_errors(spec.building, data.zones, tilde);
    const auto recon =
        reconstruct_average_dynamics(aggregate_params(spec.building), avg, errors);

    double worst = 0;
    const Eigen::Index nz = data.zones.n_zones();
    for (Eigen::Index k = 0; k < data.zones.n_samples(); ++k) {
      double dz = 0, dw = 0;
      for (Eigen::Index j = 0; j < nz; ++j) {
        const auto& z = data.zones.zones[static_cast<std::size_t>(j)];
        const auto d = zone_derivative(
            {z.t_z[k], (*z.t_w)[k]},
            {z.t_a[k], z.eta_solar[k], z.q_ac[k], (*z.q_int)[k]},
            spec.building.zones[static_cast<std::size_t>(j)]);
        dz += d.d_t_z;
        dw += d.d_t_w;
      }
      dz /= static_cast<double>(nz);
      dw /= static_cast<double>(nz);
      worst = std::max(worst,
                       std::abs(recon.d_t_bar_z[k] - dz) / std::max(std::abs(dz), 0.1));
      worst = std::max(worst,
                       std::abs(recon.d_t_bar_w[k] - dw) / std::max(std::abs(dw), 0.1));
    }
    const double elapsed = clock.seconds();
    report(1, "exact aggregation identity",
           worst <= 1e-10 && elapsed < 1.0,
           fmt("max rel err %.2e, %.2f s", worst, elapsed));
  }

  // ---- 2: open-loop parameter recovery -----------------------------------
  EstimationResult open_result;
  {
    const Clock clock;
    open_result = solve_batch(open_avg, acceptance_ident_config());
    const double elapsed = clock.seconds();

    const auto est = open_result.theta_hat.as_vector();
    const auto want = open_truth.as_vector();
    // order: tau_za, tau_zw, tau_wa, tau_wz, c_z, a_z, a_w
    const double tight = 0.10, loose = 0.50;
    const double tol[7] = {tight, tight, loose, tight, tight, loose, loose};
    bool pass = elapsed < 300.0;
    std::string detail;
    const char* names[7] = {"tau_za", "tau_zw", "tau_wa", "tau_wz",
                            "c_z",    "a_z",    "a_w"};
    double worst_margin = 0;
    for (int i = 0; i < 7; ++i) {
      const double rel = std::abs(est[i] - want[i]) / want[i];
      if (rel > tol[i]) {
        pass = false;
        detail += fmt("%s %.1f%%>%.0f%% ", names[i], 100 * rel, 100 * tol[i]);
      }
      worst_margin = std::max(worst_margin, rel / tol[i]);
    }
    report(2, "open-loop parameter recovery", pass,
           detail.empty()
               ? fmt("worst band usage %.0f%%, %.0f s", 100 * worst_margin, elapsed)
               : detail + fmt("%.0f s", elapsed));
  }

  // ---- 3: disturbance recovery -------------------------------------------
  {
    const Eigen::VectorXd q_hat = open_result.x_hat.row(2).transpose();
    const Eigen::VectorXd& q_agg = open_data.truth.q_bar_agg.values;
    const Eigen::VectorXd& q_int = open_data.truth.q_bar_int.values;
    const double peak = q_agg.cwiseAbs().maxCoeff();
    const double rmse = std::sqrt((q_hat - q_agg).squaredNorm() /
                                  static_cast<double>(q_agg.size()));

    // hourly windows where the aggregation error is materially nonzero: the
    // estimate must track q_bar_agg better than q_bar_int does there
    const Eigen::Index w = 12;
    int active = 0, won = 0;
    for (Eigen::Index k0 = 0; k0 + w <= q_agg.size(); k0 += w) {
      const double gap = std::sqrt((q_agg.segment(k0, w) - q_int.segment(k0, w))
                                       .squaredNorm() /
                                   static_cast<double>(w));
      if (gap <= 0.03 * peak) continue;
      ++active;
      const double err = std::sqrt((q_hat.segment(k0, w) - q_agg.segment(k0, w))
                                       .squaredNorm() /
                                   static_cast<double>(w));
      if (err < gap) ++won;
    }
    const bool pass = rmse <= 0.10 * peak && active >= 1 && won == active;
    report(3, "disturbance recovery", pass,
           fmt("rmse %.1f%% of peak, %d/%d active windows won", 100 * rmse / peak,
               won, active));
  }

  // ---- 5: gradient correctness (before 4 to reuse nothing) --------------
  {
    const Clock clock;
    ScenarioSpec spec;
    spec.building = default_virtual_building(5, 3, 0.3);
    spec.horizon_days = 40.0 / (24.0 * 12.0);  // 41 samples
    spec.asynchronicity = 0.6;
    spec.seed = 5;
    const auto data = average_signals(generate(spec).zones);
    IdentConfig cfg;
    const BatchProblem problem(data, cfg);

    oracles::TestRng rng(5);
    Eigen::VectorXd mu(problem.n_constraints());
    for (Eigen::Index i = 0; i < mu.size(); ++i) mu[i] = rng.uniform(-1, 1);
    const double rho = 37.5;

    double worst = 0;
    for (int point = 0; point < 20; ++point) {
      Eigen::VectorXd v(problem.n_vars());
      for (int i = 0; i < 7; ++i) v[i] = rng.uniform(0.2, 5.0);
      for (Eigen::Index k = 0; k < problem.n_samples(); ++k) {
        v[problem.state_index(k, 0)] = rng.uniform(15, 35);
        v[problem.state_index(k, 1)] = rng.uniform(15, 35);
        v[problem.state_index(k, 2)] = rng.uniform(0, 2);
      }
      for (Eigen::Index k = 0; k + 1 < problem.n_samples(); ++k) {
        v[problem.xi_plus_index(k)] = rng.uniform(0, 0.5);
        v[problem.xi_minus_index(k)] = rng.uniform(0, 0.5);
      }

      auto augmented = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd c;
        problem.constraints(x, c);
        return problem.objective(x) + mu.dot(c) + 0.5 * rho * c.squaredNorm();
      };
      Eigen::VectorXd g, jtv, c;
      problem.objective_gradient(v, g);
      problem.constraints(v, c);
      problem.constraint_jtv(v, (mu + rho * c).eval(), jtv);
      g += jtv;

      const Eigen::VectorXd fd = oracles::central_fd_gradient(augmented, v, 1e-6);
      worst = std::max(worst, (g - fd).cwiseAbs().maxCoeff() /
                                  std::max(1.0, g.cwiseAbs().maxCoeff()));
    }
    report(5, "gradient correctness", worst <= 1e-5,
           fmt("max rel err %.2e over 20 points, %.1f s", worst, clock.seconds()));
  }

  // ---- 6 (part 1): feasibility at the open-loop solution ----------------
  double open_residual = max_dynamics_residual(open_result, open_avg);
  double open_min_q = open_result.x_hat.row(2).minCoeff();

  // ---- 7: heuristic association ------------------------------------------
  std::vector<ScenarioData> heuristic_data;
  heuristic_data.reserve(5);
  {
    const Clock clock;
    const double knobs[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<Eigen::VectorXd> win_tz, win_qac, win_err;
    for (double knob : knobs) {
      ScenarioSpec spec = table_analogue_spec();
      spec.asynchronicity = knob;
      ScenarioData data = generate(spec);
      const auto avg = average_signals(data.zones);
      const auto result = solve_batch(avg, acceptance_ident_config());
      const auto rep = variance_report(data.zones, 1.0);
      win_tz.push_back(*rep.windowed[static_cast<int>(SignalKind::t_z)]);
      win_qac.push_back(*rep.windowed[static_cast<int>(SignalKind::q_ac)]);
      const Eigen::VectorXd abs_err =
          (result.x_hat.row(2).transpose() - data.truth.q_bar_int.values)
              .cwiseAbs();
      win_err.push_back(sliding_mean(abs_err, 12));
      heuristic_data.push_back(std::move(data));
    }
    double peak_tz = 0, peak_qac = 0;
    for (std::size_t i = 0; i < win_tz.size(); ++i) {
      peak_tz = std::max(peak_tz, win_tz[i].maxCoeff());
      peak_qac = std::max(peak_qac, win_qac[i].maxCoeff());
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < win_tz.size(); ++i) {
      const Eigen::VectorXd index =
          asynchronicity_index(win_tz[i], win_qac[i], peak_tz, peak_qac);
      for (Eigen::Index k = 0; k < index.size(); ++k) {
        xs.push_back(index[k]);
        ys.push_back(win_err[static_cast<std::size_t>(i)][k]);
      }
    }
    const Eigen::VectorXd x =
        Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    const Eigen::VectorXd y =
        Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    const double spearman = spearman_rank_correlation(x, y);
    const double elapsed = clock.seconds();
    report(7, "heuristic association", spearman > 0.5 && elapsed < 900.0,
           fmt("spearman %.3f over %zu windows, 5 scenarios, %.0f s", spearman,
               xs.size(), elapsed));
  }
  for (const auto& data : heuristic_data) generated_sets.push_back(&data.zones);

  // ---- 8: out-of-sample prediction ---------------------------------------
  ScenarioData closed_data;
  EstimationResult closed_result;
  AggregateData closed_avg;
  {
    const Clock clock;
    ScenarioSpec spec;
    spec.building = sized_virtual_building(8, 5, 0.4, 0.1);
    spec.horizon_days = 12.0;
    spec.t_s_hours = 1.0 / 6;
    spec.start_time_s = parse_iso8601("2018-09-21T00:00:00");
    spec.asynchronicity = 0.4;
    spec.seed = 8;
    spec.weather.mean_c = 22.0;
    spec.weather.amplitude_c = 5.0;
    spec.solar.peak_kw_m2 = 0.25;
    DeadbandSpec db;
    db.setpoint_c = 24.0;
    db.halfwidth_c = 0.5;
    db.capacity_kw = 7.0;
    spec.hvac = db;

    closed_data = generate(spec);
    closed_avg = average_signals(closed_data.zones);
    const Eigen::Index n = closed_avg.n_samples();
    const Eigen::Index n_train = 8 * 24 * 6;
    const Eigen::Index n_test = n - n_train;
    const AggregateData train = slice(closed_avg, 0, n_train);
    const AggregateData test = slice(closed_avg, n_train, n_test);

    closed_result = solve_batch(train, acceptance_ident_config());

    const auto d = discretize(build_augmented_model(closed_result.theta_hat),
                              spec.t_s_hours);
    const Eigen::Vector3d u_last(train.t_bar_a.values[n_train - 1],
                                 train.eta_bar_solar.values[n_train - 1],
                                 train.q_bar_ac.values[n_train - 1]);
    const Eigen::Vector3d x0 =
        d.step(closed_result.x_hat.col(n_train - 1), u_last,
               closed_result.xi_hat[n_train - 2]);

    const Eigen::VectorXd q_agg_test =
        closed_data.truth.q_bar_agg.values.segment(n_train, n_test);
    const Eigen::VectorXd q_int_test =
        closed_data.truth.q_bar_int.values.segment(n_train, n_test);
    const auto with_agg =
        predict_out_of_sample(closed_result.theta_hat, test, q_agg_test, x0);
    const auto with_int =
        predict_out_of_sample(closed_result.theta_hat, test, q_int_test, x0);

    const bool pass = with_agg.rmse_defined && with_agg.rmse <= 0.5 &&
                      with_int.rmse > with_agg.rmse;
    report(8, "out-of-sample prediction", pass,
           fmt("rmse %.3f C with true load, %.3f C with average load, %.0f s",
               with_agg.rmse, with_int.rmse, clock.seconds()));
    generated_sets.push_back(&closed_data.zones);
  }

  // ---- 4: zero-mean identity over every generated dataset ----------------
  {
    double worst = 0;
    for (const auto* traces : generated_sets)
      worst = std::max(worst, zero_mean_worst(*traces));
    report(4, "zero-mean deviation identity", worst <= 1e-12,
           fmt("max |mean| %.2e over %zu datasets", worst, generated_sets.size()));
  }

  // ---- 6: constraint satisfaction ----------------------------------------
  {
    const double closed_residual = max_dynamics_residual(closed_result,
        slice(closed_avg, 0, 8 * 24 * 6));
    const double closed_min_q = closed_result.x_hat.row(2).minCoeff();
    const double residual = std::max(open_residual, closed_residual);
    const double min_q = std::min(open_min_q, closed_min_q);
    report(6, "constraint satisfaction", residual <= 1e-8 && min_q >= -1e-8,
           fmt("max dynamics residual %.2e, min load state %.2e", residual, min_q));
  }

  // ---- 9: interaction cancellation ----------------------------------------
  {
    ZoneParams a{1.0, 0.5, 0.8, 3.5, 5.0, 0.4, 15.0};
    ZoneParams b{1.6, 0.5, 0.7, 2.9, 6.5, 0.3, 11.0};  // equal c_z only
    Eigen::MatrixXd r(2, 2);
    r << 0, 3.0, 3.0, 0;
    const auto coupled = make_building_model({a, b}, r);
    const auto standalone = make_building_model({a, b});
    oracles::TestRng rng(9);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const std::vector<ZoneState> x{{rng.uniform(15, 35), rng.uniform(15, 35)},
                                     {rng.uniform(15, 35), rng.uniform(15, 35)}};
      const std::vector<ZoneInputs> u{
          {rng.uniform(0, 35), rng.uniform(0, 1), rng.uniform(0, 3),
           rng.uniform(0, 1)},
          {rng.uniform(0, 35), rng.uniform(0, 1), rng.uniform(0, 3),
           rng.uniform(0, 1)}};
      const auto dc = building_derivative(x, u, coupled);
      const auto ds = building_derivative(x, u, standalone);
      const double avg_with = 0.5 * (dc[0].d_t_z + dc[1].d_t_z);
      const double avg_without = 0.5 * (ds[0].d_t_z + ds[1].d_t_z);
      worst = std::max(worst, std::abs(avg_with - avg_without));
    }
    report(9, "interaction cancellation", worst <= 1e-12,
           fmt("max average-dynamics difference %.2e", worst));
  }

  // ---- 10: determinism and round trips ------------------------------------
  {
    const fs::path base =
        fs::temp_directory_path() /
        ("aggtherm_acceptance_" +
         std::to_string(
             std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(base);
    bool pass = true;
    std::string detail;
    try {
      Config sim;
      sim.set("scenario.days", "0.5");
      sim.set("scenario.seed", "10");
      sim.set("scenario.size_spread", "0");
      sim.set("scenario.construction_spread", "0");
      sim.set("scenario.asynchronicity", "0");
      sim.set("scenario.occupancy.base", "0.3");
      sim.set("scenario.occupancy.schedule", "");
      pass &= cli::run_simulate(sim, base / "a") == cli::kExitOk;
      pass &= cli::run_simulate(sim, base / "b") == cli::kExitOk;
      pass &= read_file(base / "a" / "zones.csv") == read_file(base / "b" / "zones.csv");
      pass &= read_file(base / "a" / "truth_aggregate.csv") ==
              read_file(base / "b" / "truth_aggregate.csv");

      Config ident;
      ident.set("data.input", (base / "a" / "zones.csv").string());
      const auto truth = read_params_csv(base / "a" / "truth_params.csv");
      for (const auto& [name, value] : truth)
        ident.set("ident.prior." + name, format_double(value));
      ident.set("ident.prior_weight", "100");
      pass &= cli::run_identify(ident, base / "ia") == cli::kExitOk;
      pass &= cli::run_identify(ident, base / "ib") == cli::kExitOk;
      pass &= read_file(base / "ia" / "estimate.csv") ==
              read_file(base / "ib" / "estimate.csv");
      pass &= read_file(base / "ia" / "params.csv") ==
              read_file(base / "ib" / "params.csv");
      if (!pass) detail = "byte-identical output check failed";

      // lossless export -> ingest round trip of the zone data
      const auto original = ingest_zone_csv(base / "a" / "zones.csv");
      write_zone_csv(base / "roundtrip.csv", original);
      const auto back = ingest_zone_csv(base / "roundtrip.csv");
      for (Eigen::Index j = 0; j < original.n_zones(); ++j) {
        const auto& za = original.zones[static_cast<std::size_t>(j)];
        const auto& zb = back.zones[static_cast<std::size_t>(j)];
        if (za.t_z != zb.t_z || za.t_a != zb.t_a || za.eta_solar != zb.eta_solar ||
            za.q_ac != zb.q_ac || *za.q_int != *zb.q_int) {
          pass = false;
          detail = "csv round trip deviated";
        }
      }
    } catch (const std::exception& e) {
      pass = false;
      detail = e.what();
    }
    fs::remove_all(base);
    report(10, "determinism and round trips", pass,
           pass ? "bit-identical reruns, lossless csv round trip" : detail);
  }

  std::printf("%s: %d criterion(s) failed, total %.0f s\n",
              failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", failures,
              total.seconds());
  return failures == 0 ? 0 : 1;
}
