#pragma once

#include <optional>
#include <string_view>

#include "ecodrive/advisor/advisor.hpp"
#include "ecodrive/simtruck/truck.hpp"
#include "ecodrive/spatnet/spat.hpp"

namespace ecodrive::simtruck {

enum class DriverKind { Baseline, Eco };

std::string_view to_string(DriverKind k);
DriverKind driver_kind_from_string(std::string_view s);

struct DriverModel {
  DriverKind kind = DriverKind::Baseline;
  double reaction_time_s = 1.0;
  double amber_sight_distance_m = 150.0;
  double comfortable_decel_mps2 = 1.5;
  double band_tracking_gain = 0.5;  // 1/s
  double cruise_gain = 0.3;         // 1/s, approach to the desired speed
  /// Cruise target; the segment speed limit when unset.
  std::optional<double> desired_speed_mps;
  /// Eco driver aims this far inside the band: above a positive lower
  /// bound, below the upper bound.
  double band_lower_margin_mps = 0.5;
  double band_upper_margin_mps = 0.1;
  double stop_margin_m = 1.0;      // stop this far before the line
  double time_headway_s = 2.0;
  double standstill_gap_m = 5.0;

  void validate() const;
};

/// What the driver can see of the next signal head (ground truth).
struct VisibleSignal {
  spatnet::PhaseColor phase = spatnet::PhaseColor::Green;
  double d_sig_m = 0.0;
};

struct LeadVehicle {
  double gap_m = 0.0;
  double speed_mps = 0.0;
};

struct DriveContext {
  TruckState state;
  double desired_speed_mps = 0.0;
  std::optional<VisibleSignal> signal;
  std::optional<LeadVehicle> lead;
};

struct DriveCommand {
  double accel_mps2 = 0.0;
  BrakeMode mode = BrakeMode::Normal;
};

/// A driver without advisory: cruises toward the desired speed and, once an
/// AMBER or RED head is within sight distance, brakes after a reaction delay
/// at the constant rate that stops the truck at the line. An amber that
/// cannot be stopped for within the braking limit is driven through.
class BaselineDriver {
 public:
  BaselineDriver(DriverModel model, TruckParams truck);
  DriveCommand command(const DriveContext& ctx);

 private:
  double cruise(const DriveContext& ctx) const;

  DriverModel model_;
  TruckParams truck_;
  std::optional<double> triggered_at_s_;
  bool go_through_ = false;
};

/// Follows the DVI band: no action while inside it, proportional correction
/// toward the nearest bound otherwise. Falls back to baseline behaviour when
/// the band is withheld (TTC) or there is no signal.
class EcoDriver {
 public:
  EcoDriver(DriverModel model, TruckParams truck);
  DriveCommand command(const DriveContext& ctx, const advisor::SpeedBand& band);

 private:
  DriverModel model_;
  TruckParams truck_;
  BaselineDriver fallback_;
};

/// Car-following limit toward a lead vehicle (gap-keeping plus closing-speed braking).
DriveCommand follow_lead(const DriverModel& model, const TruckParams& truck, double speed_mps,
                         const LeadVehicle& lead);

}  // namespace ecodrive::simtruck
