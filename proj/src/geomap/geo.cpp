#include "ecodrive/geomap/geo.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ecodrive/error.hpp"

namespace ecodrive::geomap {

void validate(const GeoPoint& p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon)) {
    throw InvalidInput("non-finite coordinate");
  }
  if (p.lat < -90.0 || p.lat > 90.0 || p.lon < -180.0 || p.lon > 180.0) {
    throw InvalidInput(fmt::format("coordinate out of range: ({}, {})", p.lat, p.lon));
  }
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  validate(a);
  validate(b);
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s_phi = std::sin(dphi / 2.0);
  const double s_lambda = std::sin(dlambda / 2.0);
  double h = s_phi * s_phi + std::cos(phi1) * std::cos(phi2) * s_lambda * s_lambda;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b) {
  validate(a);
  validate(b);
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  double deg = std::atan2(y, x) * kRadToDeg;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

EnVector heading_unit(double heading_deg) {
  const double rad = heading_deg * kDegToRad;
  return {std::sin(rad), std::cos(rad)};
}

bool heading_consistent(double truck_heading_deg, const EnVector& direction) {
  if (!std::isfinite(truck_heading_deg) || !std::isfinite(direction.east) ||
      !std::isfinite(direction.north)) {
    throw InvalidInput("non-finite heading or direction");
  }
  const double norm = std::hypot(direction.east, direction.north);
  if (norm == 0.0) {
    throw InvalidInput("zero-length direction vector");
  }
  const EnVector h = heading_unit(truck_heading_deg);
  // Rounding in heading_unit leaves ~1e-16 on the zero axis; perpendicular must stay excluded.
  return (h.east * direction.east + h.north * direction.north) / norm > 1e-12;
}

double heading_difference_deg(double a_deg, double b_deg) {
  double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

GeoPoint offset_by(const GeoPoint& origin, double east_m, double north_m) {
  const double dlat = north_m / kEarthRadiusM * kRadToDeg;
  const double dlon = east_m / (kEarthRadiusM * std::cos(origin.lat * kDegToRad)) * kRadToDeg;
  return {origin.lat + dlat, origin.lon + dlon};
}

GeoPoint interpolate(const GeoPoint& a, const GeoPoint& b, double fraction) {
  return {a.lat + (b.lat - a.lat) * fraction, a.lon + (b.lon - a.lon) * fraction};
}

Projection project_onto_segment(const GeoPoint& truck, const GeoPoint& n1, const GeoPoint& n2) {
  const double d_tn1 = haversine_distance(truck, n1);
  const double d_tn2 = haversine_distance(truck, n2);
  const double d_n1n2 = haversine_distance(n1, n2);
  if (d_n1n2 <= 0.0) {
    throw InvalidInput("segment endpoints coincide");
  }

  const double s = (d_tn1 + d_tn2 + d_n1n2) / 2.0;
  const double area = std::sqrt(std::max(0.0, s * (s - d_tn1) * (s - d_tn2) * (s - d_n1n2)));
  const double height = 2.0 * area / d_n1n2;

  Projection p;
  p.lateral_error_m = height;
  p.distance_to_n1_m = d_tn1;
  p.distance_to_n2_m = d_tn2;
  p.segment_length_m = d_n1n2;
  if (d_tn1 * d_tn1 > d_tn2 * d_tn2 + d_n1n2 * d_n1n2) {
    p.side = SegmentSide::BeyondEnd;
    p.remaining_to_n2_m = 0.0;
  } else if (d_tn2 * d_tn2 > d_tn1 * d_tn1 + d_n1n2 * d_n1n2) {
    p.side = SegmentSide::BeforeStart;
    p.remaining_to_n2_m = d_n1n2;
  } else {
    p.remaining_to_n2_m = std::sqrt(std::max(0.0, d_tn2 * d_tn2 - height * height));
  }
  return p;
}

}  // namespace ecodrive::geomap
