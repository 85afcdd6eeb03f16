#include <fmt/format.h>
#include <json.hpp>

#include "ecodrive/advisor/advisory_loop.hpp"
#include "ecodrive/error.hpp"

namespace ecodrive::advisor {

namespace {

std::string number_or_null(const std::optional<double>& v) {
  return v ? fmt::format("{:.3f}", *v) : std::string("null");
}

}  // namespace

std::string encode_record(const AdvisoryRecord& r) {
  return fmt::format(
      R"({{"t_ms":{},"d_sig_m":{},"phase":{},"t_used_s":{},"v_lower_mps":{:.3f},"v_upper_mps":{:.3f},"gating":"{}","ego_speed_mps":{:.3f}}})",
      r.t_ms, number_or_null(r.d_sig_m),
      r.phase ? fmt::format("\"{}\"", spatnet::to_string(*r.phase)) : std::string("null"),
      number_or_null(r.t_used_s), r.band.v_lower_mps, r.band.v_upper_mps, to_string(r.band.gating),
      r.ego_speed_mps);
}

AdvisoryRecord decode_record(std::string_view line) {
  try {
    auto j = nlohmann::json::parse(line);
    AdvisoryRecord r;
    r.t_ms = j.at("t_ms").get<std::int64_t>();
    if (!j.at("d_sig_m").is_null()) r.d_sig_m = j["d_sig_m"].get<double>();
    if (!j.at("phase").is_null()) r.phase = spatnet::phase_from_string(j["phase"].get<std::string>());
    if (!j.at("t_used_s").is_null()) r.t_used_s = j["t_used_s"].get<double>();
    r.band.v_lower_mps = j.at("v_lower_mps").get<double>();
    r.band.v_upper_mps = j.at("v_upper_mps").get<double>();
    r.band.gating = gating_from_string(j.at("gating").get<std::string>());
    r.ego_speed_mps = j.at("ego_speed_mps").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(fmt::format("malformed advisory record: {}", e.what()));
  }
}

}  // namespace ecodrive::advisor
