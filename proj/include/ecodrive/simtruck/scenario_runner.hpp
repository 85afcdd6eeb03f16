#pragma once

#include <memory>
#include <optional>
#include <random>

#include "ecodrive/advisor/advisory_loop.hpp"
#include "ecodrive/simtruck/drivers.hpp"
#include "ecodrive/simtruck/scenario_config.hpp"
#include "ecodrive/simtruck/trajectory_log.hpp"
#include "ecodrive/spatnet/broker.hpp"
#include "ecodrive/spatnet/channel.hpp"

namespace ecodrive::simtruck {

/// Fixed-step scenario on one simulated millisecond clock. Each step: SPaT
/// broadcast on whole seconds, channel delivery, localization and lead
/// observation, one advisory tick, the driver command, the truck update and
/// one log row.
class ScenarioRunner {
 public:
  explicit ScenarioRunner(ScenarioConfig config);
  ~ScenarioRunner();
  ScenarioRunner(const ScenarioRunner&) = delete;
  ScenarioRunner& operator=(const ScenarioRunner&) = delete;

  bool done() const { return done_; }

  /// Advances one dt and returns the row logged for the state at the start
  /// of the step.
  const LogRow& step();

  /// Replaces the driver model with a direct acceleration command (live
  /// mode). nullopt hands control back to the model.
  void set_manual_accel(std::optional<double> accel_mps2) { manual_accel_ = accel_mps2; }

  /// Ends the run early; the reason is recorded in the log header.
  void stop(std::string reason);

  const advisor::AdvisoryRecord& last_advisory() const { return last_advisory_; }
  const TruckState& state() const { return state_; }
  const ScenarioConfig& config() const { return config_; }
  std::int64_t now_ms() const { return now_ms_; }
  const TrajectoryLog& log() const { return log_; }

  /// Runs to completion (if not already done) and hands over the log.
  TrajectoryLog finish();

 private:
  struct Lead {
    double position_m = 0.0;  // odometer coordinate of its rear bumper
    double speed_mps = 0.0;
  };

  void broadcast();
  void update_lead();
  std::optional<LeadVehicle> observe_lead() const;
  geomap::GeoPoint noisy_position();

  ScenarioConfig config_;
  std::int64_t dt_ms_;
  std::int64_t end_ms_;
  std::int64_t now_ms_ = 0;
  bool done_ = false;

  LaneCursor cursor_;
  TruckState state_;
  advisor::AdvisoryLoop loop_;
  advisor::AdvisoryRecord last_advisory_;
  BaselineDriver baseline_;
  EcoDriver eco_;
  std::optional<double> manual_accel_;

  spatnet::ChannelEmulator channel_;
  std::unique_ptr<spatnet::Broker> broker_;
  std::unique_ptr<spatnet::SpatSubscriber> subscriber_;

  std::mt19937_64 gnss_rng_;
  std::normal_distribution<double> gnss_noise_;

  std::size_t next_keyframe_ = 0;
  std::optional<Lead> lead_;

  TrajectoryLog log_;
};

/// Runs a scenario to completion.
TrajectoryLog run_scenario(const ScenarioConfig& config);

/// Lead vehicles are ignored beyond this gap.
inline constexpr double kLeadDetectionRangeM = 100.0;

}  // namespace ecodrive::simtruck
