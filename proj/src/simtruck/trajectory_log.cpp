#include "ecodrive/simtruck/trajectory_log.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "ecodrive/error.hpp"

namespace ecodrive::simtruck {

namespace {

std::string opt3(const std::optional<double>& v) { return v ? fmt::format("{:.3f}", *v) : std::string(); }

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view s, std::size_t line_no, std::string_view column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw LoadError(fmt::format("log line {}: bad {} '{}'", line_no, column, s));
  }
  return v;
}

std::optional<double> to_opt_double(std::string_view s, std::size_t line_no, std::string_view column) {
  if (s.empty()) return std::nullopt;
  return to_double(s, line_no, column);
}

}  // namespace

std::string to_csv(const TrajectoryLog& log) {
  const auto& h = log.header;
  std::string out = fmt::format(
      "# scenario={}\n# driver={}\n# config_digest={}\n# seed={}\n# dt_s={:g}\n# channel={}\n"
      "# code_version={}\n# diagnostic={}\n{}\n",
      h.scenario, h.driver, h.config_digest, h.seed, h.dt_s, h.channel, h.code_version, h.diagnostic,
      kLogColumns);
  for (const auto& r : log.rows) {
    out += fmt::format("{:.3f},{:.7f},{:.7f},{:.3f},{:.3f},{},{},{:.3f},{:.3f},{},{:.4f}\n", r.t_s,
                       r.position.lat, r.position.lon, r.speed_mps, r.accel_mps2, opt3(r.d_sig_m),
                       r.phase ? spatnet::to_string(*r.phase) : std::string_view(), r.band.v_lower_mps,
                       r.band.v_upper_mps, advisor::to_string(r.band.gating), r.fuel_rate_gps);
  }
  return out;
}

void write_csv_file(const TrajectoryLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError(fmt::format("cannot write log '{}'", path.string()));
  out << to_csv(log);
  if (!out) throw LoadError(fmt::format("error writing log '{}'", path.string()));
}

TrajectoryLog parse_csv(std::string_view text) {
  TrajectoryLog log;
  bool columns_seen = false;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (columns_seen) throw LoadError(fmt::format("log line {}: header after rows", line_no));
      line.remove_prefix(1);
      while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = line.substr(0, eq);
      const std::string value(line.substr(eq + 1));
      auto& h = log.header;
      if (key == "scenario") h.scenario = value;
      else if (key == "driver") h.driver = value;
      else if (key == "config_digest") h.config_digest = value;
      else if (key == "seed") h.seed = std::stoull(value);
      else if (key == "dt_s") h.dt_s = to_double(value, line_no, key);
      else if (key == "channel") h.channel = value;
      else if (key == "code_version") h.code_version = value;
      else if (key == "diagnostic") h.diagnostic = value;
      continue;
    }
    if (!columns_seen) {
      if (line != kLogColumns) throw LoadError(fmt::format("log line {}: unexpected columns", line_no));
      columns_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 11) throw LoadError(fmt::format("log line {}: expected 11 fields, got {}", line_no, f.size()));
    LogRow r;
    r.t_s = to_double(f[0], line_no, "t_s");
    r.position = {to_double(f[1], line_no, "lat"), to_double(f[2], line_no, "lon")};
    r.speed_mps = to_double(f[3], line_no, "speed_mps");
    r.accel_mps2 = to_double(f[4], line_no, "accel_mps2");
    r.d_sig_m = to_opt_double(f[5], line_no, "d_sig_m");
    try {
      if (!f[6].empty()) r.phase = spatnet::phase_from_string(f[6]);
      r.band.gating = advisor::gating_from_string(f[9]);
    } catch (const InvalidInput& e) {
      throw LoadError(fmt::format("log line {}: {}", line_no, e.what()));
    }
    r.band.v_lower_mps = to_double(f[7], line_no, "v_lower_mps");
    r.band.v_upper_mps = to_double(f[8], line_no, "v_upper_mps");
    r.fuel_rate_gps = to_double(f[10], line_no, "fuel_rate_gps");
    if (!log.rows.empty() && !(r.t_s > log.rows.back().t_s)) {
      throw LoadError(fmt::format("log line {}: time not increasing", line_no));
    }
    log.rows.push_back(r);
  }
  if (!columns_seen) throw LoadError("log has no column line");
  return log;
}

TrajectoryLog read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(fmt::format("cannot read log '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

advisor::AdvisoryRecord to_advisory_record(const LogRow& row) {
  advisor::AdvisoryRecord rec;
  rec.t_ms = std::llround(row.t_s * 1000.0);
  rec.d_sig_m = row.d_sig_m;
  rec.phase = row.phase;
  rec.band = row.band;
  rec.ego_speed_mps = row.speed_mps;
  return rec;
}

}  // namespace ecodrive::simtruck
