#include "ecodrive/advisor/advisor.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ecodrive/error.hpp"

namespace ecodrive::advisor {

std::string_view to_string(Gating g) {
  switch (g) {
    case Gating::Active: return "ACTIVE";
    case Gating::CappedByLead: return "CAPPED_BY_LEAD";
    case Gating::SuppressedTtc: return "SUPPRESSED_TTC";
    case Gating::NoSignal: return "NO_SIGNAL";
  }
  return "?";
}

Gating gating_from_string(std::string_view s) {
  if (s == "ACTIVE") return Gating::Active;
  if (s == "CAPPED_BY_LEAD") return Gating::CappedByLead;
  if (s == "SUPPRESSED_TTC") return Gating::SuppressedTtc;
  if (s == "NO_SIGNAL") return Gating::NoSignal;
  throw InvalidInput(fmt::format("unknown gating '{}'", s));
}

double reference_speed(double d_sig_m, double t_current_s) {
  if (!std::isfinite(d_sig_m) || !(d_sig_m >= 0.0)) throw InvalidInput("d_sig must be finite and >= 0");
  if (std::isnan(t_current_s) || t_current_s < 0.0) throw InvalidInput("t_current must be >= 0");
  if (t_current_s < kMinPhaseTimeS) return kUnbounded;
  return d_sig_m / t_current_s;
}

std::optional<double> time_to_collision(const LeadVehicleObservation& obs) {
  if (obs.relative_speed_mps <= 0.0) return std::nullopt;
  return obs.gap_m / obs.relative_speed_mps;
}

namespace {

void check(const AdvisoryInput& in) {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!finite_nonneg(in.d_sig_m) || !finite_nonneg(in.t_current_s) || !finite_nonneg(in.ego_speed_mps) ||
      !finite_nonneg(in.spat_age_ms) || !finite_nonneg(in.following_red_s)) {
    throw InvalidInput("advisory input fields must be finite and >= 0");
  }
  if (!std::isfinite(in.v_lim_mps) || !(in.v_lim_mps > 0.0)) throw InvalidInput("v_lim must be > 0");
  if (in.lead) {
    const auto& l = *in.lead;
    if (!std::isfinite(l.gap_m) || !(l.gap_m > 0.0) || !std::isfinite(l.lead_speed_mps) ||
        l.lead_speed_mps < 0.0 || !std::isfinite(l.relative_speed_mps)) {
      throw InvalidInput("lead observation must have a positive gap and finite speeds");
    }
  }
}

}  // namespace

SpeedBand advise(const AdvisoryInput& in, const AdvisorConfig& config) {
  check(in);
  const double v_lim = in.v_lim_mps;

  if (!in.signal_matched || in.spat_age_ms > config.staleness_s * 1000.0) {
    return {0.0, v_lim, Gating::NoSignal};
  }

  PhaseColor phase = in.phase;
  double t_current = in.t_current_s;
  if (phase == PhaseColor::Amber) {
    phase = PhaseColor::Red;
    t_current += in.following_red_s;
  }

  const double v0 = reference_speed(in.d_sig_m, t_current);
  SpeedBand band;
  if (phase == PhaseColor::Red) {
    band = {0.0, std::min(v0, v_lim), Gating::Active};
  } else if (v0 <= v_lim) {
    band = {v0, v_lim, Gating::Active};
  } else {
    band = {0.0, 0.0, Gating::Active};
  }

  if (in.lead && in.lead->lead_speed_mps < band.v_upper_mps) {
    band.v_upper_mps = in.lead->lead_speed_mps;
    band.v_lower_mps = std::min(band.v_lower_mps, band.v_upper_mps);
    band.gating = Gating::CappedByLead;
  }

  if (in.lead) {
    if (auto ttc = time_to_collision(*in.lead); ttc && *ttc < config.ttc_threshold_s) {
      band.gating = Gating::SuppressedTtc;
    }
  }
  return band;
}

}  // namespace ecodrive::advisor
