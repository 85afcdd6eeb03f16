#pragma once

#include <string>
#include <utility>

#include "ecodrive/energy/energy.hpp"
#include "ecodrive/error.hpp"
#include "ecodrive/simtruck/trajectory_log.hpp"

namespace ecodrive::cli {

/// Two logs that were not produced from the same map, plans and start state.
class ComparisonRefused : public Error {
 public:
  using Error::Error;
};

/// Rows with d_sig at or below this count as "through the intersection".
inline constexpr double kNearSignalM = 50.0;

struct RunSummary {
  std::string driver;
  energy::FuelSummary fuel;
  /// Lowest speed on rows within kNearSignalM of a signal; unset when the
  /// run never came that close.
  std::optional<double> min_speed_near_signal_mps;
};

struct ComparisonFlags {
  bool eco_saves_fuel = false;
  bool savings_in_window = false;
  bool baseline_full_stop = false;
  bool eco_no_full_stop = false;

  bool all() const { return eco_saves_fuel && savings_in_window && baseline_full_stop && eco_no_full_stop; }
};

struct ComparisonReport {
  std::string config_digest;
  RunSummary baseline;
  RunSummary eco;
  double savings_percent = 0.0;  // (baseline - eco) / baseline * 100
  int stops_delta = 0;           // eco - baseline
  std::pair<double, double> window{2.0, 25.0};
  ComparisonFlags flags;
};

std::vector<energy::FuelSample> fuel_samples(const simtruck::TrajectoryLog& log);
energy::FuelSummary trip_fuel(const simtruck::TrajectoryLog& log);

/// Throws ComparisonRefused on a digest mismatch, InvalidInput on empty logs.
ComparisonReport compare_logs(const simtruck::TrajectoryLog& baseline, const simtruck::TrajectoryLog& eco,
                              std::pair<double, double> window = {2.0, 25.0});

std::string to_json(const ComparisonReport& r);
std::string csv_header();
std::string to_csv_row(const ComparisonReport& r);

}  // namespace ecodrive::cli
