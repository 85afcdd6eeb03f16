#include "ecodrive/cli/compare.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

namespace ecodrive::cli {

std::vector<energy::FuelSample> fuel_samples(const simtruck::TrajectoryLog& log) {
  std::vector<energy::FuelSample> out;
  out.reserve(log.rows.size());
  for (const auto& r : log.rows) out.push_back({r.t_s, r.speed_mps, r.fuel_rate_gps});
  return out;
}

energy::FuelSummary trip_fuel(const simtruck::TrajectoryLog& log) { return energy::trip_fuel(fuel_samples(log)); }

namespace {

RunSummary summarize(const simtruck::TrajectoryLog& log) {
  RunSummary s;
  s.driver = log.header.driver;
  s.fuel = trip_fuel(log);
  for (const auto& r : log.rows) {
    if (!r.d_sig_m || *r.d_sig_m > kNearSignalM) continue;
    s.min_speed_near_signal_mps = std::min(s.min_speed_near_signal_mps.value_or(r.speed_mps), r.speed_mps);
  }
  return s;
}

nlohmann::json to_json_value(const RunSummary& s) {
  nlohmann::json j = {{"driver", s.driver},
                      {"total_g", s.fuel.total_g},
                      {"idle_g", s.fuel.idle_g},
                      {"moving_g", s.fuel.moving_g},
                      {"stops_count", s.fuel.stops_count},
                      {"duration_s", s.fuel.duration_s},
                      {"distance_m", s.fuel.distance_m}};
  j["min_speed_near_signal_mps"] =
      s.min_speed_near_signal_mps ? nlohmann::json(*s.min_speed_near_signal_mps) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

ComparisonReport compare_logs(const simtruck::TrajectoryLog& baseline, const simtruck::TrajectoryLog& eco,
                              std::pair<double, double> window) {
  if (baseline.rows.empty() || eco.rows.empty()) throw InvalidInput("cannot compare an empty log");
  if (baseline.header.config_digest != eco.header.config_digest) {
    throw ComparisonRefused(fmt::format("config digests differ: {} vs {}", baseline.header.config_digest,
                                        eco.header.config_digest));
  }
  ComparisonReport r;
  r.config_digest = baseline.header.config_digest;
  r.baseline = summarize(baseline);
  r.eco = summarize(eco);
  r.window = window;
  const double b = r.baseline.fuel.total_g;
  r.savings_percent = b > 0.0 ? (b - r.eco.fuel.total_g) / b * 100.0 : 0.0;
  r.stops_delta = r.eco.fuel.stops_count - r.baseline.fuel.stops_count;

  r.flags.eco_saves_fuel = r.eco.fuel.total_g < b;
  r.flags.savings_in_window = r.savings_percent >= window.first && r.savings_percent <= window.second;
  r.flags.baseline_full_stop = r.baseline.fuel.stops_count > 0;
  r.flags.eco_no_full_stop = r.eco.fuel.stops_count == 0;
  return r;
}

std::string to_json(const ComparisonReport& r) {
  nlohmann::json j = {{"config_digest", r.config_digest},
                      {"baseline", to_json_value(r.baseline)},
                      {"eco", to_json_value(r.eco)},
                      {"savings_percent", r.savings_percent},
                      {"stops_delta", r.stops_delta},
                      {"window_percent", {r.window.first, r.window.second}},
                      {"flags",
                       {{"eco_saves_fuel", r.flags.eco_saves_fuel},
                        {"savings_in_window", r.flags.savings_in_window},
                        {"baseline_full_stop", r.flags.baseline_full_stop},
                        {"eco_no_full_stop", r.flags.eco_no_full_stop}}}};
  return j.dump(2);
}

std::string csv_header() {
  return "config_digest,baseline_total_g,baseline_idle_g,baseline_stops,eco_total_g,eco_idle_g,eco_stops,"
         "savings_percent,stops_delta,baseline_min_speed_mps,eco_min_speed_mps,all_flags";
}

std::string to_csv_row(const ComparisonReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{:.3f}", *v) : std::string(); };
  return fmt::format("{},{:.3f},{:.3f},{},{:.3f},{:.3f},{},{:.3f},{},{},{},{}", r.config_digest,
                     r.baseline.fuel.total_g, r.baseline.fuel.idle_g, r.baseline.fuel.stops_count,
                     r.eco.fuel.total_g, r.eco.fuel.idle_g, r.eco.fuel.stops_count, r.savings_percent,
                     r.stops_delta, opt(r.baseline.min_speed_near_signal_mps),
                     opt(r.eco.min_speed_near_signal_mps), r.flags.all() ? "pass" : "fail");
}

}  // namespace ecodrive::cli
