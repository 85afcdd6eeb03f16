#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ecodrive/geomap/geo.hpp"

namespace ecodrive::geomap {

using IntersectionId = std::int32_t;
using SignalGroupId = std::int32_t;

struct LaneNode {
  std::string id;
  GeoPoint position;
};

struct LaneSegment {
  std::string id;
  std::string from;
  std::string to;
  double length_m = 0.0;  // derived from node positions at build time
  double speed_limit_mps = 0.0;
  std::string road_name;
  double heading_deg = 0.0;
};

struct SignalRef {
  IntersectionId intersection_id = 0;
  SignalGroupId signal_group_id = 0;

  friend bool operator==(const SignalRef&, const SignalRef&) = default;
  friend auto operator<=>(const SignalRef&, const SignalRef&) = default;
};

struct SignalNode {
  std::string node_id;
  SignalRef ref;
};

/// Raw, unvalidated map content as read from a document.
struct MapDocument {
  struct Segment {
    std::string id;
    std::string from;
    std::string to;
    double speed_limit_mps = 0.0;
    std::string road_name;
    double heading_deg = 0.0;
  };
  std::vector<LaneNode> nodes;
  std::vector<Segment> segments;
  std::vector<SignalNode> signals;
};

/// Immutable, validated lane map. Every lane path that reaches a signal is a
/// simple chain, so "the next signal downstream" is always well defined.
class MapGraph {
 public:
  /// Validates the document and derives segment lengths. Throws LoadError
  /// naming the offending element.
  static MapGraph build(MapDocument doc);

  std::span<const LaneNode> nodes() const { return nodes_; }
  std::span<const LaneSegment> segments() const { return segments_; }
  std::span<const SignalNode> signals() const { return signals_; }

  const LaneNode& node(std::string_view id) const;
  const LaneSegment& segment(std::string_view id) const;
  std::size_t segment_index(std::string_view id) const;
  std::optional<SignalRef> signal_at(std::string_view node_id) const;

  /// Indices of segments leaving / entering a node, ordered by segment id.
  std::span<const std::size_t> outgoing(std::string_view node_id) const;
  std::span<const std::size_t> incoming(std::string_view node_id) const;

  struct Downstream {
    SignalRef signal;
    std::string node_id;
    double distance_from_segment_end_m = 0.0;  // sum of lengths after the given segment
  };
  /// Next signal reached from the end of `segment_index`, if the chain has one.
  std::optional<Downstream> next_signal(std::size_t segment_index) const;

  /// Successor segment on the lane chain (lowest id when a signal node branches).
  std::optional<std::size_t> next_segment(std::size_t segment_index) const;
  std::optional<std::size_t> previous_segment(std::size_t segment_index) const;

 private:
  std::vector<LaneNode> nodes_;
  std::vector<LaneSegment> segments_;
  std::vector<SignalNode> signals_;
  std::unordered_map<std::string, std::size_t> node_index_;
  std::unordered_map<std::string, std::size_t> segment_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> outgoing_;
  std::unordered_map<std::string, std::vector<std::size_t>> incoming_;
  std::unordered_map<std::string, SignalRef> signal_by_node_;
  std::vector<std::optional<Downstream>> next_signal_;
};

/// Parses a map document (JSON text) and validates it.
MapGraph load_map(std::string_view text);
MapGraph load_map_file(const std::filesystem::path& path);

/// Canonical JSON form; lengths are not written since they are derived.
std::string serialize_map(const MapGraph& map);

struct MatchOptions {
  double max_match_radius_m = 25.0;
};

struct MatchResult {
  std::size_t segment_index = 0;
  std::string segment_id;
  double lateral_error_m = 0.0;
  double along_segment_remaining_m = 0.0;
  double distance_to_signal_m = 0.0;
  double distance_to_downstream_node_m = 0.0;
  double speed_limit_mps = 0.0;
  bool out_of_segment = false;
  SignalNode signal;
};

struct Location {
  std::size_t segment_index = 0;
  Projection projection;
  std::optional<MapGraph::Downstream> downstream;
};

/// Nearest heading-consistent lane position, whether or not a signal lies
/// ahead. Throws NoMatchError.
Location locate_on_map(const GeoPoint& truck, double heading_deg, const MapGraph& map,
                       const MatchOptions& options = {});

/// Locates the truck on the nearest heading-consistent lane and returns the
/// along-road distance to the next signal. Throws NoMatchError or
/// NoSignalError.
MatchResult match_to_map(const GeoPoint& truck, double heading_deg, const MapGraph& map,
                         const MatchOptions& options = {});

/// Along-road distance from a point `offset_m` into a segment to the next
/// signal, without any projection. Used for ground truth.
std::optional<double> distance_to_next_signal(const MapGraph& map, std::size_t segment_index,
                                              double offset_m);

}  // namespace ecodrive::geomap
