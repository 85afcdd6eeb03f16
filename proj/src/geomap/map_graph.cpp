#include "ecodrive/geomap/map_graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "ecodrive/error.hpp"

namespace ecodrive::geomap {

namespace {

// Stored headings may differ from the computed great-circle bearing by
// survey rounding; anything beyond this is a data error.
constexpr double kHeadingToleranceDeg = 10.0;

const std::vector<std::size_t> kNoSegments;

}  // namespace

MapGraph MapGraph::build(MapDocument doc) {
  MapGraph g;

  for (auto& n : doc.nodes) {
    if (n.id.empty()) throw LoadError("node with empty id");
    try {
      validate(n.position);
    } catch (const InvalidInput& e) {
      throw LoadError(fmt::format("node '{}': {}", n.id, e.what()));
    }
    if (!g.node_index_.emplace(n.id, g.nodes_.size()).second) {
      throw LoadError(fmt::format("duplicate node id '{}'", n.id));
    }
    g.nodes_.push_back(std::move(n));
  }

  for (auto& s : doc.segments) {
    if (s.id.empty()) throw LoadError("segment with empty id");
    if (g.segment_index_.contains(s.id)) {
      throw LoadError(fmt::format("duplicate segment id '{}'", s.id));
    }
    if (!g.node_index_.contains(s.from)) {
      throw LoadError(fmt::format("segment '{}' references missing node '{}'", s.id, s.from));
    }
    if (!g.node_index_.contains(s.to)) {
      throw LoadError(fmt::format("segment '{}' references missing node '{}'", s.id, s.to));
    }
    if (!(s.speed_limit_mps > 0.0) || !std::isfinite(s.speed_limit_mps)) {
      throw LoadError(fmt::format("segment '{}' has non-positive speed limit", s.id));
    }
    if (!(s.heading_deg >= 0.0 && s.heading_deg < 360.0)) {
      throw LoadError(fmt::format("segment '{}' heading_deg outside [0, 360)", s.id));
    }
    const GeoPoint a = g.node(s.from).position;
    const GeoPoint b = g.node(s.to).position;
    const double length = haversine_distance(a, b);
    if (!(length > 0.0)) {
      throw LoadError(fmt::format("segment '{}' has zero length", s.id));
    }
    const double bearing = initial_bearing_deg(a, b);
    if (heading_difference_deg(bearing, s.heading_deg) > kHeadingToleranceDeg) {
      throw LoadError(fmt::format("segment '{}' heading_deg {} disagrees with node bearing {:.1f}",
                                  s.id, s.heading_deg, bearing));
    }
    g.segment_index_.emplace(s.id, g.segments_.size());
    g.segments_.push_back(LaneSegment{std::move(s.id), std::move(s.from), std::move(s.to), length,
                                      s.speed_limit_mps, std::move(s.road_name), s.heading_deg});
  }

  std::set<SignalRef> seen_refs;
  for (auto& sig : doc.signals) {
    if (!g.node_index_.contains(sig.node_id)) {
      throw LoadError(fmt::format("signal {}/{} references missing node '{}'",
                                  sig.ref.intersection_id, sig.ref.signal_group_id, sig.node_id));
    }
    if (!seen_refs.insert(sig.ref).second) {
      throw LoadError(fmt::format("duplicate signal (intersection {}, group {})",
                                  sig.ref.intersection_id, sig.ref.signal_group_id));
    }
    if (!g.signal_by_node_.emplace(sig.node_id, sig.ref).second) {
      throw LoadError(fmt::format("node '{}' carries more than one signal", sig.node_id));
    }
    g.signals_.push_back(std::move(sig));
  }

  for (std::size_t i = 0; i < g.segments_.size(); ++i) {
    g.outgoing_[g.segments_[i].from].push_back(i);
    g.incoming_[g.segments_[i].to].push_back(i);
  }
  auto by_id = [&g](std::size_t a, std::size_t b) { return g.segments_[a].id < g.segments_[b].id; };
  for (auto& [_, v] : g.outgoing_) std::sort(v.begin(), v.end(), by_id);
  for (auto& [_, v] : g.incoming_) std::sort(v.begin(), v.end(), by_id);

  auto reaches_signal = [&g](const std::string& start) {
    std::vector<std::string> stack{start};
    std::unordered_set<std::string> visited;
    while (!stack.empty()) {
      std::string n = std::move(stack.back());
      stack.pop_back();
      if (!visited.insert(n).second) continue;
      if (g.signal_by_node_.contains(n)) return true;
      for (std::size_t s : g.outgoing(n)) stack.push_back(g.segments_[s].to);
    }
    return false;
  };

  g.next_signal_.resize(g.segments_.size());
  for (std::size_t i = 0; i < g.segments_.size(); ++i) {
    std::unordered_set<std::size_t> visited{i};
    std::size_t cur = i;
    double dist = 0.0;
    while (true) {
      const std::string& end = g.segments_[cur].to;
      if (auto sig = g.signal_by_node_.find(end); sig != g.signal_by_node_.end()) {
        g.next_signal_[i] = Downstream{sig->second, end, dist};
        break;
      }
      auto outs = g.outgoing(end);
      if (outs.empty()) break;
      if (outs.size() > 1) {
        if (reaches_signal(end)) {
          throw LoadError(fmt::format(
              "lane chain from segment '{}' branches at node '{}' before reaching a signal",
              g.segments_[i].id, end));
        }
        break;
      }
      cur = outs.front();
      if (!visited.insert(cur).second) break;  // signal-free loop
      dist += g.segments_[cur].length_m;
    }
  }
  return g;
}

const LaneNode& MapGraph::node(std::string_view id) const {
  auto it = node_index_.find(std::string(id));
  if (it == node_index_.end()) throw InvalidInput(fmt::format("unknown node '{}'", id));
  return nodes_[it->second];
}

const LaneSegment& MapGraph::segment(std::string_view id) const {
  return segments_[segment_index(id)];
}

std::size_t MapGraph::segment_index(std::string_view id) const {
  auto it = segment_index_.find(std::string(id));
  if (it == segment_index_.end()) throw InvalidInput(fmt::format("unknown segment '{}'", id));
  return it->second;
}

std::optional<SignalRef> MapGraph::signal_at(std::string_view node_id) const {
  auto it = signal_by_node_.find(std::string(node_id));
  if (it == signal_by_node_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::size_t> MapGraph::outgoing(std::string_view node_id) const {
  auto it = outgoing_.find(std::string(node_id));
  return it == outgoing_.end() ? std::span<const std::size_t>(kNoSegments) : it->second;
}

std::span<const std::size_t> MapGraph::incoming(std::string_view node_id) const {
  auto it = incoming_.find(std::string(node_id));
  return it == incoming_.end() ? std::span<const std::size_t>(kNoSegments) : it->second;
}

std::optional<MapGraph::Downstream> MapGraph::next_signal(std::size_t segment_index) const {
  return next_signal_.at(segment_index);
}

std::optional<std::size_t> MapGraph::next_segment(std::size_t segment_index) const {
  auto outs = outgoing(segments_.at(segment_index).to);
  if (outs.empty()) return std::nullopt;
  return outs.front();
}

std::optional<std::size_t> MapGraph::previous_segment(std::size_t segment_index) const {
  auto ins = incoming(segments_.at(segment_index).from);
  if (ins.size() != 1) return std::nullopt;
  return ins.front();
}

std::optional<double> distance_to_next_signal(const MapGraph& map, std::size_t segment_index,
                                              double offset_m) {
  const auto& seg = map.segments()[segment_index];
  auto next = map.next_signal(segment_index);
  if (!next) return std::nullopt;
  return std::max(0.0, seg.length_m - offset_m) + next->distance_from_segment_end_m;
}

}  // namespace ecodrive::geomap
