#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecodrive/advisor/advisor.hpp"
#include "ecodrive/geomap/map_graph.hpp"
#include "ecodrive/spatnet/spat.hpp"

namespace ecodrive::advisor {

/// Single-slot mailbox: writers overwrite, readers copy the latest value.
template <typename T>
class LatestValue {
 public:
  void write(T value) {
    std::lock_guard lock(mutex_);
    value_ = std::move(value);
  }
  void clear() {
    std::lock_guard lock(mutex_);
    value_.reset();
  }
  std::optional<T> read() const {
    std::lock_guard lock(mutex_);
    return value_;
  }

 private:
  mutable std::mutex mutex_;
  std::optional<T> value_;
};

struct Localization {
  geomap::GeoPoint position;
  double heading_deg = 0.0;
  double speed_mps = 0.0;
};

/// One 10 Hz advisory output. Optional fields are absent when the truck is
/// not matched to a signal.
struct AdvisoryRecord {
  std::int64_t t_ms = 0;
  std::optional<double> d_sig_m;
  std::optional<PhaseColor> phase;
  std::optional<double> t_used_s;
  SpeedBand band;
  double ego_speed_mps = 0.0;

  // Not part of the wire record.
  AdvisoryInput input;
  std::optional<geomap::SignalRef> signal;
  std::optional<std::int64_t> spat_timestamp_ms;
  bool on_map = true;
  std::string diagnostic;
};

/// Encodes the record as one newline-free JSON object with the fields
/// t_ms, d_sig_m, phase, t_used_s, v_lower_mps, v_upper_mps, gating,
/// ego_speed_mps (absent values are null).
std::string encode_record(const AdvisoryRecord& r);
AdvisoryRecord decode_record(std::string_view line);

/// The 10 Hz planning loop. Producers push SPaT, localization and lead
/// observations at their own rates; tick() takes a snapshot, matches the
/// truck to the map, ages the newest SPaT of the matched signal group and
/// runs advise().
class AdvisoryLoop {
 public:
  AdvisoryLoop(const geomap::MapGraph& map, std::vector<spatnet::SignalController> plans,
               AdvisorConfig config = {}, geomap::MatchOptions match = {});

  void on_spat(const spatnet::SpatMessage& m);
  void on_localization(const Localization& loc) { localization_.write(loc); }
  void on_lead(std::optional<LeadVehicleObservation> lead);

  AdvisoryRecord tick(std::int64_t now_ms);

  /// Every record produced so far, in tick order.
  std::span<const AdvisoryRecord> history() const { return history_; }
  void keep_history(bool keep) { keep_history_ = keep; }

  const AdvisorConfig& config() const { return config_; }

 private:
  const geomap::MapGraph& map_;
  std::vector<spatnet::SignalController> plans_;
  AdvisorConfig config_;
  geomap::MatchOptions match_;

  mutable std::mutex spat_mutex_;
  std::map<geomap::SignalRef, spatnet::SpatMessage> newest_;
  LatestValue<Localization> localization_;
  LatestValue<std::optional<LeadVehicleObservation>> lead_;

  bool keep_history_ = true;
  std::vector<AdvisoryRecord> history_;
};

}  // namespace ecodrive::advisor
