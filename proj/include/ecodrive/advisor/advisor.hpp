#pragma once

#include <limits>
#include <optional>
#include <string_view>

#include "ecodrive/spatnet/spat.hpp"

namespace ecodrive::advisor {

using spatnet::PhaseColor;

enum class Gating { Active, CappedByLead, SuppressedTtc, NoSignal };

std::string_view to_string(Gating g);
Gating gating_from_string(std::string_view s);

/// Recommended speed range. Always 0 <= v_lower <= v_upper <= speed limit.
struct SpeedBand {
  double v_lower_mps = 0.0;
  double v_upper_mps = 0.0;
  Gating gating = Gating::Active;

  /// Whether the DVI should draw the band (suppressed bands are withheld).
  bool displayed() const { return gating == Gating::Active || gating == Gating::CappedByLead; }
  friend bool operator==(const SpeedBand&, const SpeedBand&) = default;
};

struct LeadVehicleObservation {
  double gap_m = 0.0;
  double lead_speed_mps = 0.0;
  double relative_speed_mps = 0.0;  // closing positive

  friend bool operator==(const LeadVehicleObservation&, const LeadVehicleObservation&) = default;
};

struct AdvisoryInput {
  double d_sig_m = 0.0;
  PhaseColor phase = PhaseColor::Red;
  double t_current_s = 0.0;  // residual of the reported phase, already aged
  double v_lim_mps = 0.0;
  double ego_speed_mps = 0.0;
  std::optional<LeadVehicleObservation> lead;
  double spat_age_ms = 0.0;
  /// Red time that follows the current AMBER interval in the signal's plan.
  double following_red_s = 0.0;
  /// False when the upstream map match or SPaT lookup failed.
  bool signal_matched = true;

  friend bool operator==(const AdvisoryInput&, const AdvisoryInput&) = default;
};

struct AdvisorConfig {
  double ttc_threshold_s = 4.0;
  double staleness_s = 2.5;
  double rate_hz = 10.0;
};

/// Returned by reference_speed when the phase ends too soon to time against.
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Residual phase times below this are treated as "ending now".
inline constexpr double kMinPhaseTimeS = 0.1;

/// Speed that reaches the stop line exactly when the current phase ends.
double reference_speed(double d_sig_m, double t_current_s);

std::optional<double> time_to_collision(const LeadVehicleObservation& obs);

/// The band algorithm: RED caps the speed so the truck arrives no earlier
/// than the green onset, GREEN sets a floor so it clears before the phase
/// ends (or advises waiting when even the limit is too slow). AMBER is
/// treated as RED lasting until the following green. A slower lead vehicle
/// caps the upper bound; a short time-to-collision suppresses the band.
SpeedBand advise(const AdvisoryInput& input, const AdvisorConfig& config = {});

}  // namespace ecodrive::advisor
