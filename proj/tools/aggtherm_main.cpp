#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "aggtherm/cli.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "Flat key=value config file");
  sub->add_option("--out", args.out_dir, "Output directory");
  sub->add_option("--seed", [&args](const CLI::results_t& res) {
    args.seed = std::stoull(res[0]);
    return true;
  }, "Scenario seed override");
}

aggtherm::Config load_config(const CommonArgs& args) {
  aggtherm::Config cfg;
  if (!args.config_path.empty())
    cfg = aggtherm::Config::from_file(args.config_path);
  if (args.seed) cfg.set("scenario.seed", std::to_string(*args.seed));
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-zone thermal model aggregation and identification"};
  app.require_subcommand(1);

  CommonArgs sim, agg, ident, pred, var;
  auto* sub_sim = app.add_subcommand("simulate", "Generate a synthetic building dataset");
  add_common(sub_sim, sim);
  auto* sub_agg = app.add_subcommand("aggregate", "Average zone data into aggregate signals");
  add_common(sub_agg, agg);
  auto* sub_ident = app.add_subcommand(
      "identify", "Estimate aggregate parameters and the internal heat load");
  add_common(sub_ident, ident);
  auto* sub_pred = app.add_subcommand("predict", "Out-of-sample temperature prediction");
  add_common(sub_pred, pred);
  auto* sub_var = app.add_subcommand("variance-report",
                                     "Zone-deviation variance diagnostics");
  add_common(sub_var, var);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sub_sim->parsed()) return aggtherm::cli::run_simulate(load_config(sim), sim.out_dir);
    if (sub_agg->parsed()) return aggtherm::cli::run_aggregate(load_config(agg), agg.out_dir);
    if (sub_ident->parsed())
      return aggtherm::cli::run_identify(load_config(ident), ident.out_dir);
    if (sub_pred->parsed()) return aggtherm::cli::run_predict(load_config(pred), pred.out_dir);
    if (sub_var->parsed())
      return aggtherm::cli::run_variance_report(load_config(var), var.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return aggtherm::cli::kExitError;
  }
  return aggtherm::cli::kExitError;
}
