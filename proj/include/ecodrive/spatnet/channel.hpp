#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "ecodrive/spatnet/spat.hpp"

namespace ecodrive::spatnet {

/// Cellular link impairments applied on the subscriber side.
struct ChannelModel {
  double latency_ms = 100.0;
  double jitter_ms = 0.0;
  double drop_probability = 0.0;  // [0, 1)

  void validate() const;
  friend bool operator==(const ChannelModel&, const ChannelModel&) = default;
};

struct Delivery {
  SpatMessage message;
  double delivered_ms = 0.0;
};

/// Seeded latency/jitter/drop emulator. Messages of one signal group are
/// never delivered out of send order, whatever the jitter draw.
class ChannelEmulator {
 public:
  ChannelEmulator(ChannelModel model, std::uint64_t seed);

  /// Schedules a message sent at its timestamp. Returns false if dropped.
  bool offer(const SpatMessage& m);

  /// Removes and returns every message due at or before now_ms, in delivery order.
  std::vector<Delivery> drain(double now_ms);

  const ChannelModel& model() const { return model_; }
  std::uint64_t offered() const { return offered_; }
  std::uint64_t dropped() const { return dropped_; }
  std::size_t in_flight() const { return pending_.size(); }

 private:
  double next_unit();

  ChannelModel model_;
  std::mt19937_64 rng_;
  std::uint64_t offered_ = 0;
  std::uint64_t dropped_ = 0;
  std::uint64_t sequence_ = 0;
  std::map<std::pair<double, std::uint64_t>, SpatMessage> pending_;
  std::map<SignalRef, double> last_delivery_ms_;
};

}  // namespace ecodrive::spatnet
