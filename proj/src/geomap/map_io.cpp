#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ecodrive/error.hpp"
#include "ecodrive/geomap/map_graph.hpp"

namespace ecodrive::geomap {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw LoadError(fmt::format("{}: missing field '{}'", where, key));
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw LoadError(fmt::format("{}: field '{}' has the wrong type", where, key));
  }
}

const json& array_field(const json& root, const char* key) {
  auto it = root.find(key);
  if (it == root.end() || !it->is_array()) {
    throw LoadError(fmt::format("map document: top-level '{}' must be an array", key));
  }
  return *it;
}

}  // namespace

MapGraph load_map(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(fmt::format("map document is not valid JSON: {}", e.what()));
  }
  if (!root.is_object()) throw LoadError("map document: root must be an object");

  MapDocument doc;
  std::size_t i = 0;
  for (const auto& n : array_field(root, "nodes")) {
    const std::string where = fmt::format("nodes[{}]", i++);
    if (!n.is_object()) throw LoadError(where + ": expected an object");
    doc.nodes.push_back(LaneNode{field<std::string>(n, "id", where),
                                 {field<double>(n, "lat", where), field<double>(n, "lon", where)}});
  }
  i = 0;
  for (const auto& s : array_field(root, "segments")) {
    const std::string where = fmt::format("segments[{}]", i++);
    if (!s.is_object()) throw LoadError(where + ": expected an object");
    doc.segments.push_back(MapDocument::Segment{
        field<std::string>(s, "id", where), field<std::string>(s, "from", where),
        field<std::string>(s, "to", where), field<double>(s, "speed_limit_mps", where),
        field<std::string>(s, "road_name", where), field<double>(s, "heading_deg", where)});
  }
  i = 0;
  for (const auto& s : array_field(root, "signals")) {
    const std::string where = fmt::format("signals[{}]", i++);
    if (!s.is_object()) throw LoadError(where + ": expected an object");
    doc.signals.push_back(SignalNode{field<std::string>(s, "node_id", where),
                                     {field<IntersectionId>(s, "intersection_id", where),
                                      field<SignalGroupId>(s, "signal_group_id", where)}});
  }
  return MapGraph::build(std::move(doc));
}

MapGraph load_map_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(fmt::format("cannot open map file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_map(buf.str());
}

std::string serialize_map(const MapGraph& map) {
  json root;
  root["nodes"] = json::array();
  for (const auto& n : map.nodes()) {
    root["nodes"].push_back({{"id", n.id}, {"lat", n.position.lat}, {"lon", n.position.lon}});
  }
  root["segments"] = json::array();
  for (const auto& s : map.segments()) {
    root["segments"].push_back({{"id", s.id},
                                {"from", s.from},
                                {"to", s.to},
                                {"speed_limit_mps", s.speed_limit_mps},
                                {"road_name", s.road_name},
                                {"heading_deg", s.heading_deg}});
  }
  root["signals"] = json::array();
  for (const auto& s : map.signals()) {
    root["signals"].push_back({{"node_id", s.node_id},
                               {"intersection_id", s.ref.intersection_id},
                               {"signal_group_id", s.ref.signal_group_id}});
  }
  return root.dump(2) + "\n";
}

}  // namespace ecodrive::geomap
