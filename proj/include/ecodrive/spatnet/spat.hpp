#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ecodrive/geomap/map_graph.hpp"

namespace ecodrive::spatnet {

using geomap::IntersectionId;
using geomap::SignalGroupId;
using geomap::SignalRef;

enum class PhaseColor { Green, Amber, Red };

std::string_view to_string(PhaseColor c);
PhaseColor phase_from_string(std::string_view s);

struct PhaseInterval {
  PhaseColor color = PhaseColor::Green;
  double duration_s = 0.0;

  friend bool operator==(const PhaseInterval&, const PhaseInterval&) = default;
};

/// One fixed-time cycle. Validated on construction: at least one GREEN and
/// one RED interval, every duration positive.
class PhasePlan {
 public:
  PhasePlan(std::vector<PhaseInterval> intervals, double cycle_offset_s = 0.0);

  std::span<const PhaseInterval> intervals() const { return intervals_; }
  double cycle_offset_s() const { return cycle_offset_s_; }
  double cycle_length_s() const { return cycle_length_s_; }

  /// Index of the interval active at scenario time t and the exact (not
  /// quantized) time left in it.
  std::pair<std::size_t, double> locate(double t_s) const;

  /// Total duration of consecutive RED intervals directly after interval i.
  double red_following(std::size_t i) const;

  friend bool operator==(const PhasePlan&, const PhasePlan&) = default;

 private:
  std::vector<PhaseInterval> intervals_;
  double cycle_offset_s_ = 0.0;
  double cycle_length_s_ = 0.0;
};

struct ControllerState {
  PhaseColor phase = PhaseColor::Green;
  std::int64_t time_remaining_s = 0;  // floor-quantized
};

/// Phase at ((t + offset) mod cycle) and its residual floored to whole seconds.
ControllerState controller_state(const PhasePlan& plan, double t_s);

struct ExactControllerState {
  PhaseColor phase = PhaseColor::Green;
  double time_remaining_s = 0.0;
  std::size_t interval_index = 0;
};
ExactControllerState controller_state_exact(const PhasePlan& plan, double t_s);

struct SpatMessage {
  IntersectionId intersection_id = 0;
  SignalGroupId signal_group_id = 0;
  PhaseColor phase = PhaseColor::Green;
  std::int64_t time_remaining_s = 0;
  std::int64_t timestamp_ms = 0;

  SignalRef ref() const { return {intersection_id, signal_group_id}; }
  friend bool operator==(const SpatMessage&, const SpatMessage&) = default;
};

struct SignalController {
  SignalRef ref;
  PhasePlan plan;
};

/// One message per controller, ordered by (intersection, signal group).
std::vector<SpatMessage> broadcast_tick(std::span<const SignalController> controllers,
                                        std::int64_t t_ms);

const SignalController* find_controller(std::span<const SignalController> controllers,
                                        const SignalRef& ref);

/// Newline-free wire encoding of one message (a compact JSON object with
/// exactly the five normative fields).
std::string encode(const SpatMessage& m);
SpatMessage decode(std::string_view line);

}  // namespace ecodrive::spatnet
