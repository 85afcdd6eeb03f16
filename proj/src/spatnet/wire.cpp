#include <fmt/format.h>
#include <json.hpp>

#include "ecodrive/error.hpp"
#include "ecodrive/spatnet/spat.hpp"

namespace ecodrive::spatnet {

std::string encode(const SpatMessage& m) {
  return fmt::format(
      R"({{"intersection_id":{},"signal_group_id":{},"phase":"{}","time_remaining_s":{},"timestamp_ms":{}}})",
      m.intersection_id, m.signal_group_id, to_string(m.phase), m.time_remaining_s, m.timestamp_ms);
}

SpatMessage decode(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(fmt::format("malformed SPaT line: {}", e.what()));
  }
  if (!j.is_object() || j.size() != 5) {
    throw InvalidInput("SPaT line must be an object with exactly five fields");
  }
  try {
    SpatMessage m;
    m.intersection_id = j.at("intersection_id").get<IntersectionId>();
    m.signal_group_id = j.at("signal_group_id").get<SignalGroupId>();
    m.phase = phase_from_string(j.at("phase").get<std::string>());
    m.time_remaining_s = j.at("time_remaining_s").get<std::int64_t>();
    m.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    if (m.time_remaining_s < 0) throw InvalidInput("negative time_remaining_s");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(fmt::format("malformed SPaT line: {}", e.what()));
  }
}

}  // namespace ecodrive::spatnet
