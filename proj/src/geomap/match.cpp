#include <cmath>
#include <limits>
#include <unordered_set>

#include <fmt/format.h>

#include "ecodrive/error.hpp"
#include "ecodrive/geomap/map_graph.hpp"

namespace ecodrive::geomap {

namespace {

constexpr double kTieToleranceM = 1e-6;
constexpr int kMaxWalkSteps = 64;

struct Candidate {
  std::size_t index = 0;
  Projection proj;
  double distance = std::numeric_limits<double>::infinity();
  double angle = 0.0;
};

Projection project(const MapGraph& map, std::size_t idx, const GeoPoint& truck) {
  const auto& seg = map.segments()[idx];
  return project_onto_segment(truck, map.node(seg.from).position, map.node(seg.to).position);
}

bool consistent(const MapGraph& map, std::size_t idx, double heading_deg) {
  return heading_consistent(heading_deg, heading_unit(map.segments()[idx].heading_deg));
}

}  // namespace

Location locate_on_map(const GeoPoint& truck, double heading_deg, const MapGraph& map,
                       const MatchOptions& options) {
  validate(truck);
  if (!std::isfinite(heading_deg)) throw InvalidInput("non-finite heading");

  const auto segments = map.segments();
  Candidate best;
  bool found = false;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!consistent(map, i, heading_deg)) continue;
    Candidate c{i, project(map, i, truck), 0.0,
                heading_difference_deg(heading_deg, segments[i].heading_deg)};
    c.distance = c.proj.distance_to_segment_m();
    if (c.distance > options.max_match_radius_m) continue;
    if (!found || c.distance < best.distance - kTieToleranceM) {
      best = c;
      found = true;
      continue;
    }
    if (std::abs(c.distance - best.distance) <= kTieToleranceM) {
      if (c.angle < best.angle || (c.angle == best.angle && segments[i].id < segments[best.index].id)) {
        best = c;
      }
    }
  }
  if (!found) {
    throw NoMatchError(fmt::format(
        "no heading-consistent lane within {} m of ({:.7f}, {:.7f}) heading {:.1f}",
        options.max_match_radius_m, truck.lat, truck.lon, heading_deg));
  }

  // A projection past either end moves to the neighbouring segment of the chain.
  std::size_t idx = best.index;
  Projection proj = best.proj;
  std::unordered_set<std::size_t> visited{idx};
  for (int step = 0; step < kMaxWalkSteps && proj.out_of_segment(); ++step) {
    std::optional<std::size_t> neighbour = proj.side == SegmentSide::BeyondEnd
                                               ? map.next_segment(idx)
                                               : map.previous_segment(idx);
    if (!neighbour || !consistent(map, *neighbour, heading_deg) || visited.contains(*neighbour)) {
      break;
    }
    idx = *neighbour;
    visited.insert(idx);
    proj = project(map, idx, truck);
  }

  return Location{idx, proj, map.next_signal(idx)};
}

MatchResult match_to_map(const GeoPoint& truck, double heading_deg, const MapGraph& map,
                         const MatchOptions& options) {
  const auto segments = map.segments();
  auto [idx, proj, downstream] = locate_on_map(truck, heading_deg, map, options);
  if (!downstream) {
    throw NoSignalError(
        fmt::format("no signal downstream of segment '{}'", segments[idx].id));
  }

  MatchResult r;
  r.segment_index = idx;
  r.segment_id = segments[idx].id;
  r.lateral_error_m = proj.lateral_error_m;
  r.along_segment_remaining_m = proj.remaining_to_n2_m;
  r.distance_to_downstream_node_m = proj.distance_to_n2_m;
  r.distance_to_signal_m = proj.remaining_to_n2_m + downstream->distance_from_segment_end_m;
  r.speed_limit_mps = segments[idx].speed_limit_mps;
  r.out_of_segment = proj.out_of_segment();
  r.signal = SignalNode{downstream->node_id, downstream->signal};
  return r;
}

}  // namespace ecodrive::geomap
