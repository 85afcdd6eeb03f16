#include "ecodrive/simtruck/drivers.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ecodrive/error.hpp"

namespace ecodrive::simtruck {

namespace {

constexpr double kStoppedMps = 0.1;
constexpr double kCreepAccelMps2 = 0.3;
constexpr double kCreepDistanceM = 3.0;
constexpr double kHoldDistanceM = 0.3;
constexpr double kGapGain = 0.25;
constexpr double kSpeedGain = 0.6;

double stop_at_line(const DriverModel& m, const TruckParams& t, double v, double d_sig) {
  const double rem = d_sig - m.stop_margin_m;
  if (rem <= kHoldDistanceM) return -t.max_decel_mps2;
  if (v < kStoppedMps) return rem > kCreepDistanceM ? kCreepAccelMps2 : -t.max_decel_mps2;
  return std::max(-v * v / (2.0 * rem), -t.max_decel_mps2);
}

}  // namespace

std::string_view to_string(DriverKind k) { return k == DriverKind::Eco ? "ECO" : "BASELINE"; }

DriverKind driver_kind_from_string(std::string_view s) {
  if (s == "ECO") return DriverKind::Eco;
  if (s == "BASELINE") return DriverKind::Baseline;
  throw InvalidInput(fmt::format("unknown driver kind '{}'", s));
}

void DriverModel::validate() const {
  for (double v : {reaction_time_s, amber_sight_distance_m, comfortable_decel_mps2, band_tracking_gain,
                   cruise_gain, time_headway_s, standstill_gap_m}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("driver parameters must be positive");
  }
  for (double v : {band_lower_margin_mps, band_upper_margin_mps, stop_margin_m}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("driver margins must be >= 0");
  }
  if (desired_speed_mps && !(*desired_speed_mps > 0.0)) {
    throw InvalidInput("desired speed must be positive");
  }
}

DriveCommand follow_lead(const DriverModel& m, const TruckParams& t, double v, const LeadVehicle& lead) {
  const double desired_gap = m.standstill_gap_m + m.time_headway_s * v;
  double a = kGapGain * (lead.gap_m - desired_gap) + kSpeedGain * (lead.speed_mps - v);
  const double closing = v - lead.speed_mps;
  if (closing > 0.0) {
    const double room = std::max(lead.gap_m - 0.5 * m.standstill_gap_m, 0.5);
    a = std::min(a, -closing * closing / (2.0 * room));
  }
  return {a, a < -t.max_decel_mps2 ? BrakeMode::Emergency : BrakeMode::Normal};
}

BaselineDriver::BaselineDriver(DriverModel model, TruckParams truck)
    : model_(std::move(model)), truck_(truck) {
  model_.validate();
  truck_.validate();
}

double BaselineDriver::cruise(const DriveContext& ctx) const {
  const double err = ctx.desired_speed_mps - ctx.state.speed_mps;
  return std::clamp(model_.cruise_gain * err, -model_.comfortable_decel_mps2, truck_.max_accel_mps2);
}

DriveCommand BaselineDriver::command(const DriveContext& ctx) {
  DriveCommand cmd{cruise(ctx), BrakeMode::Normal};
  const double v = ctx.state.speed_mps;

  const bool visible = ctx.signal && ctx.signal->d_sig_m <= model_.amber_sight_distance_m;
  if (!visible || ctx.signal->phase == spatnet::PhaseColor::Green) {
    triggered_at_s_.reset();
    go_through_ = false;
  } else {
    const double d = ctx.signal->d_sig_m;
    if (!triggered_at_s_) {
      triggered_at_s_ = ctx.state.t_s;
      const double rem = std::max(d - model_.stop_margin_m, 0.01);
      go_through_ = ctx.signal->phase == spatnet::PhaseColor::Amber &&
                    v * v / (2.0 * rem) > truck_.max_decel_mps2;
    }
    const bool reacted = ctx.state.t_s - *triggered_at_s_ >= model_.reaction_time_s - 1e-9;
    if (!go_through_ && reacted) cmd.accel_mps2 = stop_at_line(model_, truck_, v, d);
  }

  if (ctx.lead) {
    auto f = follow_lead(model_, truck_, v, *ctx.lead);
    if (f.accel_mps2 < cmd.accel_mps2) cmd = f;
  }
  return cmd;
}

EcoDriver::EcoDriver(DriverModel model, TruckParams truck)
    : model_(model), truck_(truck), fallback_(model, truck) {}

DriveCommand EcoDriver::command(const DriveContext& ctx, const advisor::SpeedBand& band) {
  const DriveCommand fallback = fallback_.command(ctx);
  if (band.gating == advisor::Gating::SuppressedTtc || band.gating == advisor::Gating::NoSignal) {
    return fallback;
  }

  const double v = ctx.state.speed_mps;
  const double lo = band.v_lower_mps > 0.0 ? band.v_lower_mps + model_.band_lower_margin_mps : 0.0;
  const double hi = std::max(0.0, band.v_upper_mps - model_.band_upper_margin_mps);
  const double target = lo <= hi ? std::clamp(v, lo, hi) : 0.5 * (band.v_lower_mps + band.v_upper_mps);

  DriveCommand cmd{std::clamp(model_.band_tracking_gain * (target - v), -model_.comfortable_decel_mps2,
                              truck_.max_accel_mps2),
                   BrakeMode::Normal};
  if (ctx.lead) {
    auto f = follow_lead(model_, truck_, v, *ctx.lead);
    if (f.accel_mps2 < cmd.accel_mps2) cmd = f;
  }
  return cmd;
}

}  // namespace ecodrive::simtruck
