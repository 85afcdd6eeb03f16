#pragma once

namespace ecodrive::geomap {

/// Mean Earth radius used for every great-circle computation in the project.
inline constexpr double kEarthRadiusM = 6371008.8;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// East/north components in a local tangent frame.
struct EnVector {
  double east = 0.0;
  double north = 0.0;
};

/// Throws InvalidInput unless the point is finite and within range.
void validate(const GeoPoint& p);

/// Great-circle distance in meters (Haversine form).
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

/// Initial great-circle bearing from a to b, degrees clockwise from north in [0, 360).
double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b);

/// Unit vector for a compass heading (0 = north, clockwise positive).
EnVector heading_unit(double heading_deg);

/// True iff the truck heading points into the half-plane of `direction`:
/// strictly positive inner product. Perpendicular counts as inconsistent.
bool heading_consistent(double truck_heading_deg, const EnVector& direction);

/// Smallest absolute difference between two headings, degrees in [0, 180].
double heading_difference_deg(double a_deg, double b_deg);

/// Moves `origin` by the given east/north offset (meters) on the local
/// tangent plane. Accurate to millimeters for offsets of a few kilometers.
GeoPoint offset_by(const GeoPoint& origin, double east_m, double north_m);

/// Linear interpolation in latitude/longitude; `fraction` in [0, 1].
GeoPoint interpolate(const GeoPoint& a, const GeoPoint& b, double fraction);

enum class SegmentSide { Interior, BeforeStart, BeyondEnd };

struct Projection {
  double lateral_error_m = 0.0;   // triangle height over the n1-n2 base
  double remaining_to_n2_m = 0.0; // along-segment distance from the foot point to n2
  SegmentSide side = SegmentSide::Interior;
  double distance_to_n1_m = 0.0;
  double distance_to_n2_m = 0.0;
  double segment_length_m = 0.0;

  /// Distance from the truck to the closed segment.
  double distance_to_segment_m() const {
    switch (side) {
      case SegmentSide::BeyondEnd: return distance_to_n2_m;
      case SegmentSide::BeforeStart: return distance_to_n1_m;
      default: return lateral_error_m;
    }
  }
  bool out_of_segment() const { return side != SegmentSide::Interior; }
};

/// Projects the truck onto the n1->n2 segment using only the three pairwise
/// great-circle distances: Heron's area gives the height, Pythagoras the
/// remaining length. Projections falling outside the segment are clamped
/// (remaining 0 beyond n2, full length before n1) and flagged.
Projection project_onto_segment(const GeoPoint& truck, const GeoPoint& n1, const GeoPoint& n2);

}  // namespace ecodrive::geomap
