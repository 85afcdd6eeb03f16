#include "ecodrive/simtruck/scenario_runner.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "ecodrive/energy/energy.hpp"
#include "ecodrive/error.hpp"

#ifndef ECODRIVE_VERSION
#define ECODRIVE_VERSION "dev"
#endif

namespace ecodrive::simtruck {

namespace {

constexpr std::uint64_t kGnssSeedMix = 0x9E3779B97F4A7C15ULL;
constexpr auto kTcpTimeout = std::chrono::seconds(5);

}  // namespace

ScenarioRunner::ScenarioRunner(ScenarioConfig config)
    : config_((config.validate(), std::move(config))),
      dt_ms_(config_.dt_ms()),
      end_ms_(std::llround(config_.duration_s * 1000.0)),
      cursor_(*config_.map, config_.map->segment_index(config_.start.segment_id), config_.start.offset_m),
      loop_(*config_.map, config_.signals, config_.advisor),
      baseline_(config_.driver, config_.truck),
      eco_(config_.driver, config_.truck),
      channel_(config_.channel, config_.seed),
      gnss_rng_(config_.seed ^ kGnssSeedMix),
      gnss_noise_(0.0, 1.0) {
  loop_.keep_history(false);
  state_.position = cursor_.position();
  state_.heading_deg = cursor_.heading_deg();
  state_.speed_mps = config_.start.speed_mps;

  log_.header = {config_.name,
                 std::string(to_string(config_.driver.kind)),
                 config_digest(config_),
                 config_.seed,
                 config_.dt_s,
                 describe_channel(config_.channel),
                 ECODRIVE_VERSION,
                 {}};

  if (config_.transport == Transport::Tcp) {
    spatnet::BrokerOptions opts;
    opts.binds = {spatnet::Endpoint{"127.0.0.1", 0}};
    broker_ = std::make_unique<spatnet::Broker>(opts);
    subscriber_ = std::make_unique<spatnet::SpatSubscriber>(spatnet::Endpoint{"127.0.0.1", broker_->ports()[0]},
                                                            config_.channel, config_.seed);
    if (!broker_->wait_for_subscribers(1, kTcpTimeout)) throw NetworkError("subscriber did not connect");
  }
}

ScenarioRunner::~ScenarioRunner() {
  subscriber_.reset();
  if (broker_) broker_->stop();
}

void ScenarioRunner::stop(std::string reason) {
  done_ = true;
  if (log_.header.diagnostic.empty()) log_.header.diagnostic = std::move(reason);
}

void ScenarioRunner::broadcast() {
  std::vector<spatnet::Delivery> due;
  if (now_ms_ % 1000 == 0) {
    const auto batch = spatnet::broadcast_tick(config_.signals, now_ms_);
    if (broker_) {
      broker_->publish(batch);
      if (!subscriber_->receive(batch.size())) throw NetworkError("SPaT stream ended");
    } else {
      for (const auto& m : batch) channel_.offer(m);
    }
  }
  due = subscriber_ ? subscriber_->poll(static_cast<double>(now_ms_))
                    : channel_.drain(static_cast<double>(now_ms_));
  for (const auto& d : due) loop_.on_spat(d.message);
}

void ScenarioRunner::update_lead() {
  const double t = static_cast<double>(now_ms_) / 1000.0;
  while (next_keyframe_ < config_.lead.size() && config_.lead[next_keyframe_].t_s <= t + 1e-9) {
    const auto& k = config_.lead[next_keyframe_++];
    if (k.gap_m && *k.gap_m < 0.0) {
      lead_.reset();
      continue;
    }
    if (k.gap_m) {
      lead_ = Lead{state_.odometer_m + *k.gap_m, k.speed_mps};
    } else if (lead_) {
      lead_->speed_mps = k.speed_mps;
    }
  }
}

std::optional<LeadVehicle> ScenarioRunner::observe_lead() const {
  if (!lead_) return std::nullopt;
  const double gap = lead_->position_m - state_.odometer_m;
  if (gap < 0.0 || gap > kLeadDetectionRangeM) return std::nullopt;
  return LeadVehicle{gap, lead_->speed_mps};
}

geomap::GeoPoint ScenarioRunner::noisy_position() {
  if (config_.gnss_noise_m <= 0.0) return state_.position;
  const double n = config_.gnss_noise_m * gnss_noise_(gnss_rng_);
  const double h = state_.heading_deg * geomap::kDegToRad;
  // Lateral offset: right-hand normal of the heading in the east-north frame.
  return geomap::offset_by(state_.position, n * std::cos(h), -n * std::sin(h));
}

const LogRow& ScenarioRunner::step() {
  if (done_) throw InvalidInput("scenario already finished");
  state_.t_s = static_cast<double>(now_ms_) / 1000.0;

  broadcast();
  update_lead();
  const auto lead = observe_lead();

  loop_.on_localization({noisy_position(), state_.heading_deg, state_.speed_mps});
  if (lead) {
    loop_.on_lead(advisor::LeadVehicleObservation{lead->gap_m, lead->speed_mps, state_.speed_mps - lead->speed_mps});
  } else {
    loop_.on_lead(std::nullopt);
  }
  last_advisory_ = loop_.tick(now_ms_);

  // Ground truth seen by the driver and used by oracles.
  LogRow row;
  const auto true_signal = cursor_.next_signal();
  const auto true_d = cursor_.distance_to_next_signal();
  DriveContext ctx;
  ctx.state = state_;
  const double v_lim = config_.map->segments()[cursor_.segment_index()].speed_limit_mps;
  ctx.desired_speed_mps = config_.driver.desired_speed_mps.value_or(v_lim);
  ctx.lead = lead;
  if (true_signal && true_d) {
    if (const auto* ctrl = spatnet::find_controller(config_.signals, *true_signal)) {
      const auto exact = spatnet::controller_state_exact(ctrl->plan, state_.t_s);
      ctx.signal = VisibleSignal{exact.phase, *true_d};
      row.true_state = exact;
    }
    row.true_signal = true_signal;
    row.true_d_sig_m = true_d;
  }

  DriveCommand cmd;
  if (manual_accel_) {
    cmd = {*manual_accel_, BrakeMode::Normal};
  } else if (config_.driver.kind == DriverKind::Eco) {
    cmd = eco_.command(ctx, last_advisory_.band);
  } else {
    cmd = baseline_.command(ctx);
  }

  const TruckState next = step_truck(state_, cmd.accel_mps2, config_.truck, config_.dt_s, &cursor_, cmd.mode);

  row.t_s = state_.t_s;
  row.position = state_.position;
  row.speed_mps = state_.speed_mps;
  row.accel_mps2 = next.accel_mps2;
  row.d_sig_m = last_advisory_.d_sig_m;
  row.phase = last_advisory_.phase;
  row.band = last_advisory_.band;
  row.fuel_rate_gps =
      energy::fuel_rate(energy::tractive_power(state_.speed_mps, next.accel_mps2, 0.0, config_.energy), config_.energy);
  row.odometer_m = state_.odometer_m;
  row.signal = last_advisory_.signal;
  row.t_used_s = last_advisory_.t_used_s;
  row.v_lim_mps = v_lim;
  log_.rows.push_back(row);

  if (lead_) lead_->position_m += lead_->speed_mps * config_.dt_s;
  state_ = next;
  now_ms_ += dt_ms_;

  if (!last_advisory_.on_map) {
    stop(fmt::format("no map match at t={:.1f}s: {}", row.t_s, last_advisory_.diagnostic));
  } else if (now_ms_ >= end_ms_) {
    done_ = true;
  } else if (config_.stop_at_odometer_m && state_.odometer_m >= *config_.stop_at_odometer_m) {
    done_ = true;
  } else if (cursor_.at_chain_end()) {
    stop("reached the end of the lane chain");
  }
  return log_.rows.back();
}

TrajectoryLog ScenarioRunner::finish() {
  while (!done_) step();
  return std::move(log_);
}

TrajectoryLog run_scenario(const ScenarioConfig& config) {
  ScenarioRunner runner(config);
  return runner.finish();
}

}  // namespace ecodrive::simtruck
