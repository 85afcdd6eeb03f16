#include "ecodrive/energy/energy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ecodrive/error.hpp"

namespace ecodrive::energy {

void EnergyParams::validate() const {
  for (double v : {mass_kg, drag_area_m2, air_density_kgpm3, gravity_mps2, engine_efficiency,
                   diesel_energy_jpg}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("energy parameters must be positive");
  }
  if (!(rolling_coefficient >= 0.0) || !(idle_fuel_gps >= 0.0)) {
    throw InvalidInput("rolling coefficient and idle flow must be >= 0");
  }
  if (engine_efficiency >= 1.0) throw InvalidInput("engine efficiency must be < 1");
}

double tractive_power(double v, double a, double grade_rad, const EnergyParams& p) {
  const double rolling = p.mass_kg * p.gravity_mps2 * p.rolling_coefficient * std::cos(grade_rad);
  const double grade = p.mass_kg * p.gravity_mps2 * std::sin(grade_rad);
  const double drag = 0.5 * p.air_density_kgpm3 * p.drag_area_m2 * v * v;
  return (p.mass_kg * a + rolling + grade + drag) * v;
}

double fuel_rate(double power_w, const EnergyParams& p) {
  if (power_w <= 0.0) return p.idle_fuel_gps;
  return std::max(p.idle_fuel_gps, power_w / (p.engine_efficiency * p.diesel_energy_jpg));
}

double coast_decel(double v, const EnergyParams& p) {
  if (v <= 0.0) return 0.0;
  const double force = p.mass_kg * p.gravity_mps2 * p.rolling_coefficient +
                       0.5 * p.air_density_kgpm3 * p.drag_area_m2 * v * v;
  return force / p.mass_kg;
}

FuelSummary trip_fuel(std::span<const FuelSample> s) {
  FuelSummary out;
  if (s.empty()) throw InvalidInput("empty fuel trace");
  out.duration_s = s.back().t_s - s.front().t_s;

  // Mark samples inside stops first, then integrate.
  std::vector<bool> stopped(s.size(), false);
  for (std::size_t i = 0; i < s.size();) {
    if (s[i].speed_mps >= kStopSpeedMps) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < s.size() && s[j + 1].speed_mps < kStopSpeedMps) ++j;
    if (s[j].t_s - s[i].t_s >= kStopMinDurationS - 1e-9) {
      ++out.stops_count;
      for (std::size_t k = i; k <= j; ++k) stopped[k] = true;
    }
    i = j + 1;
  }

  for (std::size_t i = 1; i < s.size(); ++i) {
    const double dt = s[i].t_s - s[i - 1].t_s;
    if (dt < 0.0) throw InvalidInput("fuel samples must be in time order");
    const double fuel = 0.5 * (s[i].fuel_rate_gps + s[i - 1].fuel_rate_gps) * dt;
    out.total_g += fuel;
    if (stopped[i] && stopped[i - 1]) out.idle_g += fuel;
    out.distance_m += 0.5 * (s[i].speed_mps + s[i - 1].speed_mps) * dt;
  }
  out.moving_g = out.total_g - out.idle_g;
  return out;
}

}  // namespace ecodrive::energy
