#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "aggtherm/config.hpp"
#include "aggtherm/estimation.hpp"
#include "aggtherm/scenarios.hpp"

namespace aggtherm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 2;          // bad input, I/O, config
inline constexpr int kExitNotConverged = 3;   // identify finished without converging

/// Builders from the flat config; every default can be overridden.
ScenarioSpec scenario_from_config(const Config& config,
                                  std::optional<std::uint64_t> seed_override);
IdentConfig ident_from_config(const Config& config);

/// Subcommand entry points; each writes its outputs plus a config echo into
/// out_dir and returns a process exit code.
int run_simulate(const Config& config, const std::filesystem::path& out_dir);
int run_aggregate(const Config& config, const std::filesystem::path& out_dir);
int run_identify(const Config& config, const std::filesystem::path& out_dir);
int run_predict(const Config& config, const std::filesystem::path& out_dir);
int run_variance_report(const Config& config, const std::filesystem::path& out_dir);

}  // namespace aggtherm::cli
