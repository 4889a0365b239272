#include "aggtherm/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace aggtherm {

namespace {

// Civil-calendar conversions on the proleptic Gregorian calendar.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += (m <= 2);
}

int parse_fixed_int(const std::string& s, std::size_t pos, std::size_t len) {
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    const char c = i < s.size() ? s[i] : '\0';
    require(c >= '0' && c <= '9', "bad timestamp '" + s + "'");
    value = value * 10 + (c - '0');
  }
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double_field(const std::string& field, int line, const std::string& column) {
  const auto where = "line " + std::to_string(line) + ", column " + column;
  require(!field.empty(), where + ": empty value");
  double value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  require(ec == std::errc() && ptr == last, where + ": cannot parse '" + field + "'");
  require(std::isfinite(value), where + ": non-finite value");
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write '" + path.string() + "'");
  out << content;
  require(out.good(), "write to '" + path.string() + "' failed");
}

double step_to_hours(std::int64_t step_s) {
  return static_cast<double>(step_s) / 3600.0;
}

std::int64_t hours_to_step(double t_s_hours) {
  const double seconds = t_s_hours * 3600.0;
  const std::int64_t step = std::llround(seconds);
  require(step > 0 && std::abs(seconds - static_cast<double>(step)) < 1e-6,
          "sampling interval must be a whole number of seconds");
  return step;
}

}  // namespace

std::int64_t parse_iso8601(const std::string& text) {
  std::string s = text;
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
  require(s.size() == 19, "bad timestamp '" + text + "'");
  require(s[4] == '-' && s[7] == '-' && (s[10] == 'T' || s[10] == ' ') &&
              s[13] == ':' && s[16] == ':',
          "bad timestamp '" + text + "'");
  const int year = parse_fixed_int(s, 0, 4);
  const int month = parse_fixed_int(s, 5, 2);
  const int day = parse_fixed_int(s, 8, 2);
  const int hh = parse_fixed_int(s, 11, 2);
  const int mm = parse_fixed_int(s, 14, 2);
  const int ss = parse_fixed_int(s, 17, 2);
  require(month >= 1 && month <= 12 && day >= 1 && day <= 31 && hh < 24 &&
              mm < 60 && ss < 60,
          "bad timestamp '" + text + "'");
  return days_from_civil(year, static_cast<unsigned>(month),
                         static_cast<unsigned>(day)) *
             86400 +
         hh * 3600 + mm * 60 + ss;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  std::int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02d:%02d:%02d",
                static_cast<long long>(y), m, d, static_cast<int>(rem / 3600),
                static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60));
  return buf;
}

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  require(ec == std::errc(), "double formatting failed");
  return std::string(buf, ptr);
}

ZoneTraceSet ingest_zone_csv(const std::filesystem::path& path) {
  const auto lines = split_lines(read_file(path));
  require(!lines.empty(), "'" + path.string() + "' is empty");

  const auto header = split_csv_line(lines[0]);
  const std::vector<std::string> required = {"timestamp", "zone_id", "T_z",
                                             "T_a",       "eta_solar", "q_ac"};
  require(header.size() == required.size() || header.size() == required.size() + 1,
          "line 1: header must be timestamp,zone_id,T_z,T_a,eta_solar,q_ac[,q_int]");
  for (std::size_t i = 0; i < required.size(); ++i)
    require(header[i] == required[i],
            "line 1: expected column '" + required[i] + "', found '" + header[i] + "'");
  const bool metered = header.size() == required.size() + 1;
  if (metered)
    require(header.back() == "q_int",
            "line 1: optional seventh column must be 'q_int', found '" +
                header.back() + "'");

  struct Row {
    std::string zone;
    double t_z, t_a, eta, q_ac, q_int;
    int line;
  };

  std::vector<std::string> zone_order;
  std::map<std::string, std::size_t> zone_index;
  std::vector<std::int64_t> timestamps;
  std::vector<std::vector<Row>> blocks;

  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty() || lines[li] == "\r") continue;
    const int line_no = static_cast<int>(li + 1);
    const auto fields = split_csv_line(lines[li]);
    require(fields.size() == header.size(),
            "line " + std::to_string(line_no) + ": expected " +
                std::to_string(header.size()) + " fields, found " +
                std::to_string(fields.size()));
    Row row;
    row.line = line_no;
    std::int64_t ts;
    try {
      ts = parse_iso8601(fields[0]);
    } catch (const Error& e) {
      throw Error("line " + std::to_string(line_no) + ", column timestamp: " +
                  e.what());
    }
    row.zone = fields[1];
    require(!row.zone.empty(),
            "line " + std::to_string(line_no) + ", column zone_id: empty value");
    row.t_z = parse_double_field(fields[2], line_no, "T_z");
    row.t_a = parse_double_field(fields[3], line_no, "T_a");
    row.eta = parse_double_field(fields[4], line_no, "eta_solar");
    row.q_ac = parse_double_field(fields[5], line_no, "q_ac");
    row.q_int = metered ? parse_double_field(fields[6], line_no, "q_int") : 0.0;

    if (timestamps.empty() || ts != timestamps.back()) {
      require(timestamps.empty() || ts > timestamps.back(),
              "line " + std::to_string(line_no) +
                  ": timestamps must be strictly increasing");
      timestamps.push_back(ts);
      blocks.emplace_back();
    }
    blocks.back().push_back(std::move(row));
  }
  require(!blocks.empty(), "'" + path.string() + "' holds no data rows");

  for (const auto& row : blocks.front()) {
    require(!zone_index.contains(row.zone),
            "line " + std::to_string(row.line) + ": duplicate zone '" + row.zone +
                "' within one timestamp");
    zone_index[row.zone] = zone_order.size();
    zone_order.push_back(row.zone);
  }
  const std::size_t nz = zone_order.size();

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::vector<bool> seen(nz, false);
    for (const auto& row : blocks[b]) {
      const auto it = zone_index.find(row.zone);
      require(it != zone_index.end(), "line " + std::to_string(row.line) +
                                          ": unknown zone id '" + row.zone + "'");
      require(!seen[it->second], "line " + std::to_string(row.line) +
                                     ": duplicate zone '" + row.zone +
                                     "' within one timestamp");
      seen[it->second] = true;
    }
    for (std::size_t j = 0; j < nz; ++j)
      require(seen[j], "zone '" + zone_order[j] + "' missing at timestamp " +
                           format_iso8601(timestamps[b]));
  }

  std::int64_t step_s = 300;  // irrelevant single-sample fallback
  if (timestamps.size() > 1) {
    step_s = timestamps[1] - timestamps[0];
    for (std::size_t b = 2; b < timestamps.size(); ++b)
      require(timestamps[b] - timestamps[b - 1] == step_s,
              "non-uniform sampling at timestamp " + format_iso8601(timestamps[b]));
  }

  ZoneTraceSet out;
  out.start_time_s = timestamps.front();
  out.t_s_hours = step_to_hours(step_s);
  const auto n = static_cast<Eigen::Index>(blocks.size());
  out.zones.resize(nz);
  for (std::size_t j = 0; j < nz; ++j) {
    auto& z = out.zones[j];
    z.id = zone_order[j];
    z.t_z.resize(n);
    z.t_a.resize(n);
    z.eta_solar.resize(n);
    z.q_ac.resize(n);
    if (metered) z.q_int.emplace(n);
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (const auto& row : blocks[b]) {
      auto& z = out.zones[zone_index[row.zone]];
      const auto k = static_cast<Eigen::Index>(b);
      z.t_z[k] = row.t_z;
      z.t_a[k] = row.t_a;
      z.eta_solar[k] = row.eta;
      z.q_ac[k] = row.q_ac;
      if (metered) (*z.q_int)[k] = row.q_int;
    }
  }
  validate(out);
  return out;
}

void write_zone_csv(const std::filesystem::path& path, const ZoneTraceSet& traces) {
  validate(traces);
  const bool metered = traces.has_q_int();
  const std::int64_t step_s = hours_to_step(traces.t_s_hours);
  std::string out = "timestamp,zone_id,T_z,T_a,eta_solar,q_ac";
  if (metered) out += ",q_int";
  out += '\n';
  for (Eigen::Index k = 0; k < traces.n_samples(); ++k) {
    const std::string stamp = format_iso8601(traces.start_time_s + k * step_s);
    for (const auto& z : traces.zones) {
      out += stamp;
      out += ',';
      out += z.id;
      out += ',';
      out += format_double(z.t_z[k]);
      out += ',';
      out += format_double(z.t_a[k]);
      out += ',';
      out += format_double(z.eta_solar[k]);
      out += ',';
      out += format_double(z.q_ac[k]);
      if (metered) {
        out += ',';
        out += format_double((*z.q_int)[k]);
      }
      out += '\n';
    }
  }
  write_file(path, out);
}

const Eigen::VectorXd TimeSeriesTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return values.col(static_cast<Eigen::Index>(i));
  throw Error("table has no column '" + name + "'");
}

bool TimeSeriesTable::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

TimeSeriesTable read_timeseries_csv(const std::filesystem::path& path) {
  const auto lines = split_lines(read_file(path));
  require(!lines.empty(), "'" + path.string() + "' is empty");
  const auto header = split_csv_line(lines[0]);
  require(header.size() >= 2 && header[0] == "timestamp",
          "line 1: expected a leading 'timestamp' column");

  TimeSeriesTable table;
  table.columns.assign(header.begin() + 1, header.end());
  std::vector<std::int64_t> timestamps;
  std::vector<double> data;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty() || lines[li] == "\r") continue;
    const int line_no = static_cast<int>(li + 1);
    const auto fields = split_csv_line(lines[li]);
    require(fields.size() == header.size(),
            "line " + std::to_string(line_no) + ": expected " +
                std::to_string(header.size()) + " fields, found " +
                std::to_string(fields.size()));
    timestamps.push_back(parse_iso8601(fields[0]));
    for (std::size_t i = 1; i < fields.size(); ++i)
      data.push_back(parse_double_field(fields[i], line_no, header[i]));
  }
  require(!timestamps.empty(), "'" + path.string() + "' holds no data rows");
  std::int64_t step_s = 300;
  if (timestamps.size() > 1) {
    step_s = timestamps[1] - timestamps[0];
    require(step_s > 0, "timestamps must be strictly increasing");
    for (std::size_t i = 2; i < timestamps.size(); ++i)
      require(timestamps[i] - timestamps[i - 1] == step_s,
              "non-uniform sampling at timestamp " + format_iso8601(timestamps[i]));
  }
  table.start_time_s = timestamps.front();
  table.t_s_hours = step_to_hours(step_s);
  const auto n = static_cast<Eigen::Index>(timestamps.size());
  const auto c = static_cast<Eigen::Index>(table.columns.size());
  table.values.resize(n, c);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = 0; j < c; ++j)
      table.values(k, j) = data[static_cast<std::size_t>(k * c + j)];
  return table;
}

void write_timeseries_csv(const std::filesystem::path& path,
                          std::int64_t start_time_s, double t_s_hours,
                          const std::vector<std::string>& columns,
                          const Eigen::MatrixXd& values) {
  require(static_cast<Eigen::Index>(columns.size()) == values.cols(),
          "column names must match the value matrix");
  const std::int64_t step_s = hours_to_step(t_s_hours);
  std::string out = "timestamp";
  for (const auto& c : columns) {
    out += ',';
    out += c;
  }
  out += '\n';
  for (Eigen::Index k = 0; k < values.rows(); ++k) {
    out += format_iso8601(start_time_s + k * step_s);
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      out += ',';
      out += format_double(values(k, j));
    }
    out += '\n';
  }
  write_file(path, out);
}

void write_params_csv(const std::filesystem::path& path,
                      const std::vector<ParamRow>& rows) {
  const bool with_truth =
      std::any_of(rows.begin(), rows.end(),
                  [](const ParamRow& r) { return r.true_value.has_value(); });
  std::string out =
      with_truth ? "parameter,estimate,true_value,unit\n" : "parameter,estimate,unit\n";
  for (const auto& r : rows) {
    out += r.name;
    out += ',';
    out += format_double(r.estimate);
    if (with_truth) {
      out += ',';
      if (r.true_value) out += format_double(*r.true_value);
    }
    out += ',';
    out += r.unit;
    out += '\n';
  }
  write_file(path, out);
}

std::map<std::string, double> read_params_csv(const std::filesystem::path& path) {
  const auto lines = split_lines(read_file(path));
  require(!lines.empty(), "'" + path.string() + "' is empty");
  const auto header = split_csv_line(lines[0]);
  std::size_t est_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == "estimate") est_col = i;
  require(header.size() >= 2 && header[0] == "parameter" && est_col < header.size(),
          "line 1: expected 'parameter' and 'estimate' columns");
  std::map<std::string, double> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty() || lines[li] == "\r") continue;
    const int line_no = static_cast<int>(li + 1);
    const auto fields = split_csv_line(lines[li]);
    require(fields.size() == header.size(),
            "line " + std::to_string(line_no) + ": wrong field count");
    out[fields[0]] = parse_double_field(fields[est_col], line_no, "estimate");
  }
  return out;
}

}  // namespace aggtherm
