#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ecodrive/error.hpp"
#include "ecodrive/spatnet/spat.hpp"

namespace ecodrive::spatnet {

namespace {

// Residuals within this of a whole second are treated as that second, so
// floating error in (t + offset) never floors 30.0 down to 29.
constexpr double kQuantizeSlackS = 1e-9;

}  // namespace

std::string_view to_string(PhaseColor c) {
  switch (c) {
    case PhaseColor::Green: return "GREEN";
    case PhaseColor::Amber: return "AMBER";
    case PhaseColor::Red: return "RED";
  }
  return "?";
}

PhaseColor phase_from_string(std::string_view s) {
  if (s == "GREEN") return PhaseColor::Green;
  if (s == "AMBER") return PhaseColor::Amber;
  if (s == "RED") return PhaseColor::Red;
  throw InvalidInput(fmt::format("unknown phase color '{}'", s));
}

PhasePlan::PhasePlan(std::vector<PhaseInterval> intervals, double cycle_offset_s)
    : intervals_(std::move(intervals)), cycle_offset_s_(cycle_offset_s) {
  bool green = false;
  bool red = false;
  for (const auto& iv : intervals_) {
    if (!(iv.duration_s > 0.0) || !std::isfinite(iv.duration_s)) {
      throw InvalidInput("phase plan durations must be positive");
    }
    green |= iv.color == PhaseColor::Green;
    red |= iv.color == PhaseColor::Red;
    cycle_length_s_ += iv.duration_s;
  }
  if (!green || !red) {
    throw InvalidInput("phase plan needs at least one GREEN and one RED interval");
  }
  if (!(cycle_offset_s_ >= 0.0) || !std::isfinite(cycle_offset_s_)) {
    throw InvalidInput("cycle offset must be >= 0");
  }
}

std::pair<std::size_t, double> PhasePlan::locate(double t_s) const {
  if (!(t_s >= 0.0)) throw InvalidInput("controller time must be >= 0");
  double pos = std::fmod(t_s + cycle_offset_s_, cycle_length_s_);
  double start = 0.0;
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const double end = start + intervals_[i].duration_s;
    if (pos < end) return {i, end - pos};
    start = end;
  }
  // pos rounded up to the cycle length: that is the start of the next cycle.
  return {0, intervals_.front().duration_s};
}

double PhasePlan::red_following(std::size_t i) const {
  double total = 0.0;
  for (std::size_t k = 1; k < intervals_.size(); ++k) {
    const auto& iv = intervals_[(i + k) % intervals_.size()];
    if (iv.color != PhaseColor::Red) break;
    total += iv.duration_s;
  }
  return total;
}

ExactControllerState controller_state_exact(const PhasePlan& plan, double t_s) {
  auto [idx, remaining] = plan.locate(t_s);
  return {plan.intervals()[idx].color, remaining, idx};
}

ControllerState controller_state(const PhasePlan& plan, double t_s) {
  auto exact = controller_state_exact(plan, t_s);
  return {exact.phase,
          static_cast<std::int64_t>(std::floor(exact.time_remaining_s + kQuantizeSlackS))};
}

std::vector<SpatMessage> broadcast_tick(std::span<const SignalController> controllers,
                                        std::int64_t t_ms) {
  std::vector<SpatMessage> out;
  out.reserve(controllers.size());
  for (const auto& c : controllers) {
    auto st = controller_state(c.plan, static_cast<double>(t_ms) / 1000.0);
    out.push_back({c.ref.intersection_id, c.ref.signal_group_id, st.phase, st.time_remaining_s, t_ms});
  }
  std::sort(out.begin(), out.end(), [](const SpatMessage& a, const SpatMessage& b) {
    return a.ref() < b.ref();
  });
  return out;
}

const SignalController* find_controller(std::span<const SignalController> controllers,
                                        const SignalRef& ref) {
  auto it = std::find_if(controllers.begin(), controllers.end(),
                         [&](const SignalController& c) { return c.ref == ref; });
  return it == controllers.end() ? nullptr : &*it;
}

}  // namespace ecodrive::spatnet
