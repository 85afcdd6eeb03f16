#include "ecodrive/simtruck/scenario_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ecodrive/error.hpp"

namespace ecodrive::simtruck {

using nlohmann::json;

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

spatnet::SignalController parse_signal(const json& j) {
  const geomap::SignalRef ref{j.at("intersection_id").get<geomap::IntersectionId>(),
                              j.at("signal_group_id").get<geomap::SignalGroupId>()};
  std::vector<spatnet::PhaseInterval> intervals;
  for (const auto& step : j.at("plan")) {
    if (!step.is_array() || step.size() != 2) throw LoadError("plan entries are [color, seconds] pairs");
    intervals.push_back({spatnet::phase_from_string(step[0].get<std::string>()), step[1].get<double>()});
  }
  double offset = 0.0;
  read_opt(j, "cycle_offset_s", offset);
  return {ref, spatnet::PhasePlan(std::move(intervals), offset)};
}

TruckParams parse_truck_params(const json& j) {
  TruckParams p;
  read_opt(j, "max_accel_mps2", p.max_accel_mps2);
  read_opt(j, "max_decel_mps2", p.max_decel_mps2);
  read_opt(j, "emergency_decel_mps2", p.emergency_decel_mps2);
  read_opt(j, "max_speed_mps", p.max_speed_mps);
  read_opt(j, "length_m", p.length_m);
  return p;
}

DriverModel parse_driver(const json& j) {
  DriverModel d;
  d.kind = driver_kind_from_string(j.at("kind").get<std::string>());
  read_opt(j, "reaction_time_s", d.reaction_time_s);
  read_opt(j, "amber_sight_distance_m", d.amber_sight_distance_m);
  read_opt(j, "comfortable_decel_mps2", d.comfortable_decel_mps2);
  read_opt(j, "band_tracking_gain", d.band_tracking_gain);
  read_opt(j, "cruise_gain", d.cruise_gain);
  read_opt(j, "desired_speed_mps", d.desired_speed_mps);
  read_opt(j, "band_lower_margin_mps", d.band_lower_margin_mps);
  read_opt(j, "band_upper_margin_mps", d.band_upper_margin_mps);
  read_opt(j, "stop_margin_m", d.stop_margin_m);
  read_opt(j, "time_headway_s", d.time_headway_s);
  read_opt(j, "standstill_gap_m", d.standstill_gap_m);
  return d;
}

energy::EnergyParams parse_energy(const json& j) {
  energy::EnergyParams e;
  read_opt(j, "mass_kg", e.mass_kg);
  read_opt(j, "rolling_coeff", e.rolling_coefficient);
  read_opt(j, "drag_area_CdA_m2", e.drag_area_m2);
  read_opt(j, "air_density_kgm3", e.air_density_kgpm3);
  read_opt(j, "idle_fuel_gps", e.idle_fuel_gps);
  read_opt(j, "engine_efficiency", e.engine_efficiency);
  read_opt(j, "diesel_energy_Jpg", e.diesel_energy_jpg);
  return e;
}

}  // namespace

std::int64_t ScenarioConfig::dt_ms() const { return std::llround(dt_s * 1000.0); }

void ScenarioConfig::validate() const {
  if (!map) throw LoadError("scenario has no map");
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw LoadError("duration_s must be > 0");
  if (!(dt_s > 0.0)) throw LoadError("dt_s must be > 0");
  const double ms = dt_s * 1000.0;
  if (std::abs(ms - std::round(ms)) > 1e-6 || 1000 % dt_ms() != 0) {
    throw LoadError(fmt::format("dt_s {} does not divide 1 s evenly", dt_s));
  }
  if (!(gnss_noise_m >= 0.0)) throw LoadError("gnss_noise_m must be >= 0");
  if (stop_at_odometer_m && !(*stop_at_odometer_m > 0.0)) throw LoadError("stop_at_odometer_m must be > 0");
  if (!(start.speed_mps >= 0.0)) throw LoadError("truck start speed must be >= 0");
  if (!(advisor.ttc_threshold_s > 0.0) || !(advisor.staleness_s > 0.0)) {
    throw LoadError("advisor thresholds must be > 0");
  }
  try {
    truck.validate();
    driver.validate();
    channel.validate();
    energy.validate();
  } catch (const InvalidInput& e) {
    throw LoadError(e.what());
  }
  try {
    const auto& seg = map->segment(start.segment_id);
    if (!(start.offset_m >= 0.0) || start.offset_m > seg.length_m) {
      throw LoadError(fmt::format("truck.start_offset_m {} outside segment '{}'", start.offset_m, seg.id));
    }
  } catch (const InvalidInput&) {
    throw LoadError(fmt::format("truck.start_segment '{}' not in map", start.segment_id));
  }

  std::set<geomap::SignalRef> seen;
  for (const auto& s : signals) {
    if (!seen.insert(s.ref).second) {
      throw LoadError(fmt::format("duplicate plan for signal {}/{}", s.ref.intersection_id, s.ref.signal_group_id));
    }
  }
  for (const auto& s : map->signals()) {
    if (!seen.count(s.ref)) {
      throw LoadError(fmt::format("no plan for map signal {}/{}", s.ref.intersection_id, s.ref.signal_group_id));
    }
  }
  double prev = -1.0;
  for (const auto& k : lead) {
    if (!(k.t_s >= 0.0) || k.t_s < prev) throw LoadError("lead keyframes must be in time order");
    if (!(k.speed_mps >= 0.0)) throw LoadError("lead speed must be >= 0");
    prev = k.t_s;
  }
}

ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  try {
    const json j = json::parse(text);
    read_opt(j, "name", c.name);
    c.map_path = base_dir / j.at("map").get<std::string>();
    for (const auto& s : j.at("signals")) c.signals.push_back(parse_signal(s));

    const auto& t = j.at("truck");
    c.start.segment_id = t.at("start_segment").get<std::string>();
    read_opt(t, "start_offset_m", c.start.offset_m);
    read_opt(t, "start_speed_mps", c.start.speed_mps);
    if (auto p = t.find("params"); p != t.end()) c.truck = parse_truck_params(*p);

    c.driver = parse_driver(j.at("driver"));
    if (auto l = j.find("lead"); l != j.end()) {
      for (const auto& k : *l) {
        LeadKeyframe f;
        f.t_s = k.at("t_s").get<double>();
        read_opt(k, "gap_m", f.gap_m);
        f.speed_mps = k.at("speed_mps").get<double>();
        c.lead.push_back(f);
      }
    }
    if (auto ch = j.find("channel"); ch != j.end()) {
      read_opt(*ch, "latency_ms", c.channel.latency_ms);
      read_opt(*ch, "jitter_ms", c.channel.jitter_ms);
      read_opt(*ch, "drop_probability", c.channel.drop_probability);
    }
    if (auto a = j.find("advisor"); a != j.end()) {
      read_opt(*a, "ttc_threshold_s", c.advisor.ttc_threshold_s);
      read_opt(*a, "staleness_s", c.advisor.staleness_s);
      read_opt(*a, "rate_hz", c.advisor.rate_hz);
    }
    read_opt(j, "seed", c.seed);
    c.duration_s = j.at("duration_s").get<double>();
    read_opt(j, "dt_s", c.dt_s);
    read_opt(j, "stop_at_odometer_m", c.stop_at_odometer_m);
    std::string transport = "loopback";
    read_opt(j, "transport", transport);
    if (transport == "loopback") {
      c.transport = Transport::Loopback;
    } else if (transport == "tcp") {
      c.transport = Transport::Tcp;
    } else {
      throw LoadError(fmt::format("unknown transport '{}'", transport));
    }
    read_opt(j, "gnss_noise_m", c.gnss_noise_m);
    if (auto e = j.find("energy"); e != j.end()) c.energy = parse_energy(*e);
  } catch (const json::exception& e) {
    throw LoadError(fmt::format("scenario: {}", e.what()));
  } catch (const InvalidInput& e) {
    throw LoadError(fmt::format("scenario: {}", e.what()));
  }
  c.map = std::make_shared<const geomap::MapGraph>(geomap::load_map_file(c.map_path));
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(fmt::format("cannot read scenario '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

std::string config_digest(const ScenarioConfig& c) {
  json plans = json::array();
  for (const auto& s : c.signals) {
    json steps = json::array();
    for (const auto& i : s.plan.intervals()) steps.push_back({spatnet::to_string(i.color), i.duration_s});
    plans.push_back({{"intersection_id", s.ref.intersection_id},
                     {"signal_group_id", s.ref.signal_group_id},
                     {"plan", steps},
                     {"cycle_offset_s", s.plan.cycle_offset_s()}});
  }
  const json start = {{"segment", c.start.segment_id},
                      {"offset_m", c.start.offset_m},
                      {"speed_mps", c.start.speed_mps}};
  const std::string text = geomap::serialize_map(*c.map) + "\n" + plans.dump() + "\n" + start.dump();

  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string describe_channel(const spatnet::ChannelModel& c) {
  return fmt::format("latency_ms={:g};jitter_ms={:g};drop={:g}", c.latency_ms, c.jitter_ms, c.drop_probability);
}

}  // namespace ecodrive::simtruck
