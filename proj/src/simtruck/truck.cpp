#include "ecodrive/simtruck/truck.hpp"

#include <algorithm>
#include <cmath>

#include "ecodrive/error.hpp"

namespace ecodrive::simtruck {

void TruckParams::validate() const {
  for (double v : {max_accel_mps2, max_decel_mps2, emergency_decel_mps2, max_speed_mps, length_m}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("truck parameters must be positive");
  }
  if (emergency_decel_mps2 < max_decel_mps2) {
    throw InvalidInput("emergency deceleration must be at least the normal limit");
  }
}

LaneCursor::LaneCursor(const geomap::MapGraph& map, std::size_t segment_index, double offset_m)
    : map_(&map), segment_(segment_index), offset_(offset_m) {
  const auto& seg = map.segments()[segment_index];
  if (!(offset_m >= 0.0) || offset_m > seg.length_m) {
    throw InvalidInput("start offset outside the segment");
  }
}

double LaneCursor::advance(double meters) {
  double moved = 0.0;
  while (meters > 0.0 && !at_end_) {
    const auto& seg = map_->segments()[segment_];
    const double left = seg.length_m - offset_;
    if (meters < left) {
      offset_ += meters;
      moved += meters;
      break;
    }
    meters -= left;
    moved += left;
    if (auto next = map_->next_segment(segment_)) {
      segment_ = *next;
      offset_ = 0.0;
    } else {
      offset_ = seg.length_m;
      at_end_ = true;
    }
  }
  return moved;
}

geomap::GeoPoint LaneCursor::position() const {
  const auto& seg = map_->segments()[segment_];
  return geomap::interpolate(map_->node(seg.from).position, map_->node(seg.to).position,
                             offset_ / seg.length_m);
}

double LaneCursor::heading_deg() const { return map_->segments()[segment_].heading_deg; }

std::optional<double> LaneCursor::distance_to_next_signal() const {
  return geomap::distance_to_next_signal(*map_, segment_, offset_);
}

std::optional<geomap::SignalRef> LaneCursor::next_signal() const {
  auto n = map_->next_signal(segment_);
  if (!n) return std::nullopt;
  return n->signal;
}

TruckState step_truck(const TruckState& state, double commanded_accel_mps2, const TruckParams& params,
                      double dt_s, LaneCursor* cursor, BrakeMode mode) {
  if (!(dt_s > 0.0)) throw InvalidInput("dt must be > 0");
  const double decel_limit =
      mode == BrakeMode::Emergency ? params.emergency_decel_mps2 : params.max_decel_mps2;
  const double a = std::clamp(commanded_accel_mps2, -decel_limit, params.max_accel_mps2);
  const double v0 = state.speed_mps;
  const double v1 = std::clamp(v0 + a * dt_s, 0.0, params.max_speed_mps);

  TruckState next = state;
  next.speed_mps = v1;
  next.accel_mps2 = (v1 - v0) / dt_s;
  double ds = 0.5 * (v0 + v1) * dt_s;
  if (cursor != nullptr) {
    ds = cursor->advance(ds);
    next.position = cursor->position();
    next.heading_deg = cursor->heading_deg();
  }
  next.odometer_m = state.odometer_m + ds;
  next.t_s = state.t_s + dt_s;
  return next;
}

}  // namespace ecodrive::simtruck
