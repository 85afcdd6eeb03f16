#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecodrive/advisor/advisor.hpp"
#include "ecodrive/energy/energy.hpp"
#include "ecodrive/geomap/map_graph.hpp"
#include "ecodrive/simtruck/drivers.hpp"
#include "ecodrive/simtruck/truck.hpp"
#include "ecodrive/spatnet/channel.hpp"
#include "ecodrive/spatnet/spat.hpp"

namespace ecodrive::simtruck {

/// One lead-vehicle keyframe. From t_s on the lead drives at speed_mps.
/// gap_m places it that far ahead of the truck; unset keeps its current
/// position; negative removes it.
struct LeadKeyframe {
  double t_s = 0.0;
  std::optional<double> gap_m;
  double speed_mps = 0.0;
};

struct TruckStart {
  std::string segment_id;
  double offset_m = 0.0;
  double speed_mps = 0.0;
};

enum class Transport { Loopback, Tcp };

struct ScenarioConfig {
  std::string name;
  std::filesystem::path map_path;
  std::shared_ptr<const geomap::MapGraph> map;
  std::vector<spatnet::SignalController> signals;
  TruckStart start;
  TruckParams truck;
  DriverModel driver;
  std::vector<LeadKeyframe> lead;
  spatnet::ChannelModel channel;
  advisor::AdvisorConfig advisor;
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  double dt_s = 0.1;
  /// The run ends once the odometer reaches this (the fuel window).
  std::optional<double> stop_at_odometer_m;
  Transport transport = Transport::Loopback;
  /// Std. deviation of the lateral GNSS error added to localization.
  double gnss_noise_m = 0.0;
  energy::EnergyParams energy;

  /// Checks ranges and cross references. Throws LoadError.
  void validate() const;
  std::int64_t dt_ms() const;
};

/// Parses a scenario document (JSON). The map path is resolved against
/// base_dir and loaded.
ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// 16 hex digits identifying the map, signal plans and truck start state.
/// Runs that may be compared share it.
std::string config_digest(const ScenarioConfig& config);

std::string describe_channel(const spatnet::ChannelModel& c);

}  // namespace ecodrive::simtruck
