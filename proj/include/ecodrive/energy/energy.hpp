#pragma once

#include <span>

namespace ecodrive::energy {

/// Longitudinal road-load and engine model of a loaded tractor-trailer.
struct EnergyParams {
  double mass_kg = 25000.0;
  double rolling_coefficient = 0.007;
  double drag_area_m2 = 7.5;  // Cd * A
  double air_density_kgpm3 = 1.207;
  double gravity_mps2 = 9.81;
  double idle_fuel_gps = 0.9;
  double engine_efficiency = 0.38;
  double diesel_energy_jpg = 42800.0;

  void validate() const;
};

/// Tractive power demand at the wheels, W. Negative when the truck is
/// being slowed by more than its road load.
double tractive_power(double speed_mps, double accel_mps2, double grade_rad, const EnergyParams& p);

/// Fuel rate, g/s: idle flow while not delivering power, energy-based flow
/// above it. Braking does not recover fuel.
double fuel_rate(double power_w, const EnergyParams& p);

/// Deceleration from road load alone when the driver neither pushes nor brakes.
double coast_decel(double speed_mps, const EnergyParams& p);

struct FuelSample {
  double t_s = 0.0;
  double speed_mps = 0.0;
  double fuel_rate_gps = 0.0;
};

struct FuelSummary {
  double total_g = 0.0;
  double idle_g = 0.0;    // accumulated while stopped
  double moving_g = 0.0;  // total - idle
  double distance_m = 0.0;
  double duration_s = 0.0;
  int stops_count = 0;
};

/// A stop: speed below this for at least kStopMinDurationS.
inline constexpr double kStopSpeedMps = 0.1;
inline constexpr double kStopMinDurationS = 1.0;

/// Trapezoidal integration of fuel rate and speed over the samples.
FuelSummary trip_fuel(std::span<const FuelSample> samples);

}  // namespace ecodrive::energy
