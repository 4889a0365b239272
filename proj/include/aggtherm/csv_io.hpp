#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aggtherm/signal.hpp"

namespace aggtherm {

/// "YYYY-MM-DDTHH:MM:SS" (optionally with a trailing 'Z' or a space
/// separator) to seconds since the Unix epoch, and back.
std::int64_t parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t epoch_seconds);

/// Long-format zone data, one row per (timestamp, zone):
///   timestamp,zone_id,T_z,T_a,eta_solar,q_ac[,q_int]
/// Every timestamp block must contain exactly the zones of the first block;
/// timestamps must increase with a constant step. Errors carry the offending
/// line and column.
ZoneTraceSet ingest_zone_csv(const std::filesystem::path& path);
void write_zone_csv(const std::filesystem::path& path, const ZoneTraceSet& traces);

/// Generic wide-format table with a leading timestamp column; every emitted
/// results CSV is readable through this.
struct TimeSeriesTable {
  std::int64_t start_time_s = 0;
  double t_s_hours = 0;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // n_samples x n_columns

  Eigen::Index n_samples() const { return values.rows(); }
  const Eigen::VectorXd column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

TimeSeriesTable read_timeseries_csv(const std::filesystem::path& path);
void write_timeseries_csv(const std::filesystem::path& path,
                          std::int64_t start_time_s, double t_s_hours,
                          const std::vector<std::string>& columns,
                          const Eigen::MatrixXd& values);

/// Parameter summary rows, mirroring a (parameter, estimate[, true value],
/// unit) table layout.
struct ParamRow {
  std::string name;
  double estimate = 0;
  std::optional<double> true_value;
  std::string unit;
};

void write_params_csv(const std::filesystem::path& path,
                      const std::vector<ParamRow>& rows);
std::map<std::string, double> read_params_csv(const std::filesystem::path& path);

/// Shortest representation that parses back to the identical double.
std::string format_double(double value);

}  // namespace aggtherm
