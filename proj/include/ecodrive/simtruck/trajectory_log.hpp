#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecodrive/advisor/advisory_loop.hpp"
#include "ecodrive/geomap/geo.hpp"
#include "ecodrive/spatnet/spat.hpp"

namespace ecodrive::simtruck {

struct LogHeader {
  std::string scenario;
  std::string driver;
  std::string config_digest;
  std::uint64_t seed = 0;
  double dt_s = 0.1;
  std::string channel;
  std::string code_version;
  /// Why the run ended early, empty otherwise.
  std::string diagnostic;

  friend bool operator==(const LogHeader&, const LogHeader&) = default;
};

struct LogRow {
  double t_s = 0.0;
  geomap::GeoPoint position;
  double speed_mps = 0.0;
  double accel_mps2 = 0.0;
  std::optional<double> d_sig_m;
  std::optional<spatnet::PhaseColor> phase;
  advisor::SpeedBand band;
  double fuel_rate_gps = 0.0;

  // In-memory only; not written to CSV.
  double odometer_m = 0.0;
  std::optional<geomap::SignalRef> signal;
  std::optional<double> t_used_s;
  double v_lim_mps = 0.0;
  /// Ground truth at t_s for the next signal on the truck's chain.
  std::optional<geomap::SignalRef> true_signal;
  std::optional<double> true_d_sig_m;
  std::optional<spatnet::ExactControllerState> true_state;
};

struct TrajectoryLog {
  LogHeader header;
  std::vector<LogRow> rows;
};

inline constexpr std::string_view kLogColumns =
    "t_s,lat,lon,speed_mps,accel_mps2,d_sig_m,phase,v_lower_mps,v_upper_mps,gating,fuel_rate_gps";

/// `# key=value` header lines, the column line, then one line per row.
std::string to_csv(const TrajectoryLog& log);
void write_csv_file(const TrajectoryLog& log, const std::filesystem::path& path);

/// Inverse of to_csv for the written columns. Throws LoadError.
TrajectoryLog parse_csv(std::string_view text);
TrajectoryLog read_csv_file(const std::filesystem::path& path);

/// A row as an advisory wire record (t_used_s is not logged, so it is absent).
advisor::AdvisoryRecord to_advisory_record(const LogRow& row);

}  // namespace ecodrive::simtruck
