#include "ecodrive/advisor/advisory_loop.hpp"

#include <algorithm>

#include "ecodrive/error.hpp"

namespace ecodrive::advisor {

namespace {

double following_red(const spatnet::SignalController* ctrl) {
  if (ctrl == nullptr) return 0.0;
  const auto intervals = ctrl->plan.intervals();
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].color == PhaseColor::Amber) return ctrl->plan.red_following(i);
  }
  return 0.0;
}

}  // namespace

AdvisoryLoop::AdvisoryLoop(const geomap::MapGraph& map, std::vector<spatnet::SignalController> plans,
                           AdvisorConfig config, geomap::MatchOptions match)
    : map_(map), plans_(std::move(plans)), config_(config), match_(match) {}

void AdvisoryLoop::on_spat(const spatnet::SpatMessage& m) {
  std::lock_guard lock(spat_mutex_);
  auto [it, inserted] = newest_.try_emplace(m.ref(), m);
  if (!inserted && m.timestamp_ms >= it->second.timestamp_ms) it->second = m;
}

void AdvisoryLoop::on_lead(std::optional<LeadVehicleObservation> lead) { lead_.write(lead); }

AdvisoryRecord AdvisoryLoop::tick(std::int64_t now_ms) {
  AdvisoryRecord rec;
  rec.t_ms = now_ms;

  auto finish = [&](AdvisoryRecord r) {
    if (keep_history_) history_.push_back(r);
    return r;
  };

  const auto loc = localization_.read();
  if (!loc) {
    rec.band = {0.0, 0.0, Gating::NoSignal};
    rec.input.signal_matched = false;
    rec.on_map = false;
    rec.diagnostic = "no localization";
    return finish(std::move(rec));
  }
  rec.ego_speed_mps = loc->speed_mps;

  AdvisoryInput& in = rec.input;
  in.ego_speed_mps = loc->speed_mps;
  in.lead = lead_.read().value_or(std::nullopt);

  geomap::Location where;
  try {
    where = geomap::locate_on_map(loc->position, loc->heading_deg, map_, match_);
  } catch (const NoMatchError& e) {
    rec.band = {0.0, 0.0, Gating::NoSignal};
    in.signal_matched = false;
    rec.on_map = false;
    rec.diagnostic = e.what();
    return finish(std::move(rec));
  }
  in.v_lim_mps = map_.segments()[where.segment_index].speed_limit_mps;

  std::optional<spatnet::SpatMessage> spat;
  if (where.downstream) {
    const double d_sig = where.projection.remaining_to_n2_m + where.downstream->distance_from_segment_end_m;
    rec.d_sig_m = d_sig;
    rec.signal = where.downstream->signal;
    in.d_sig_m = d_sig;
    std::lock_guard lock(spat_mutex_);
    if (auto it = newest_.find(where.downstream->signal); it != newest_.end()) spat = it->second;
  }

  if (!spat) {
    in.signal_matched = false;
    rec.diagnostic = where.downstream ? "no SPaT received for signal" : "no signal downstream";
  } else {
    const double age_ms = static_cast<double>(std::max<std::int64_t>(0, now_ms - spat->timestamp_ms));
    const double t_used = std::max(0.0, static_cast<double>(spat->time_remaining_s) - age_ms / 1000.0);
    in.phase = spat->phase;
    in.t_current_s = t_used;
    in.spat_age_ms = age_ms;
    in.following_red_s = following_red(spatnet::find_controller(plans_, spat->ref()));
    rec.phase = spat->phase;
    rec.t_used_s = t_used;
    rec.spat_timestamp_ms = spat->timestamp_ms;
  }

  rec.band = advise(in, config_);
  return finish(std::move(rec));
}

}  // namespace ecodrive::advisor
