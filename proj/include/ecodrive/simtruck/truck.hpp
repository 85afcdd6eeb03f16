#pragma once

#include <optional>

#include "ecodrive/geomap/map_graph.hpp"

namespace ecodrive::simtruck {

struct TruckParams {
  double max_accel_mps2 = 1.0;
  double max_decel_mps2 = 2.5;
  double emergency_decel_mps2 = 4.0;
  double max_speed_mps = 31.9;  // 115 km/h
  double length_m = 20.0;

  void validate() const;
};

struct TruckState {
  geomap::GeoPoint position;
  double heading_deg = 0.0;
  double speed_mps = 0.0;
  double accel_mps2 = 0.0;
  double odometer_m = 0.0;
  double t_s = 0.0;
};

enum class BrakeMode { Normal, Emergency };

/// Position of the truck along a lane chain. Advancing past a segment end
/// continues on the successor segment; the chain end is a hard stop.
class LaneCursor {
 public:
  LaneCursor(const geomap::MapGraph& map, std::size_t segment_index, double offset_m);

  /// Moves forward; returns the distance actually travelled.
  double advance(double meters);

  geomap::GeoPoint position() const;
  double heading_deg() const;
  std::size_t segment_index() const { return segment_; }
  double offset_m() const { return offset_; }
  bool at_chain_end() const { return at_end_; }
  const geomap::MapGraph& map() const { return *map_; }

  /// Ground-truth along-road distance to the next signal and its identity.
  std::optional<double> distance_to_next_signal() const;
  std::optional<geomap::SignalRef> next_signal() const;

 private:
  const geomap::MapGraph* map_;
  std::size_t segment_;
  double offset_;
  bool at_end_ = false;
};

/// Point-mass longitudinal update. The command is clamped to the truck's
/// limits, speed to [0, max_speed]; the displacement is trapezoidal. When a
/// cursor is given, position and heading follow the lane chain.
TruckState step_truck(const TruckState& state, double commanded_accel_mps2, const TruckParams& params,
                      double dt_s, LaneCursor* cursor = nullptr, BrakeMode mode = BrakeMode::Normal);

}  // namespace ecodrive::simtruck
