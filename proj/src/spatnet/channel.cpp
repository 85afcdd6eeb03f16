#include "ecodrive/spatnet/channel.hpp"

#include <algorithm>
#include <cmath>

#include "ecodrive/error.hpp"

namespace ecodrive::spatnet {

void ChannelModel::validate() const {
  if (!(latency_ms >= 0.0) || !std::isfinite(latency_ms)) throw InvalidInput("latency_ms must be >= 0");
  if (!(jitter_ms >= 0.0) || !std::isfinite(jitter_ms)) throw InvalidInput("jitter_ms must be >= 0");
  if (!(drop_probability >= 0.0 && drop_probability < 1.0)) {
    throw InvalidInput("drop_probability must be in [0, 1)");
  }
}

ChannelEmulator::ChannelEmulator(ChannelModel model, std::uint64_t seed) : model_(model), rng_(seed) {
  model_.validate();
}

// 53 random bits -> [0, 1). Spelled out instead of uniform_real_distribution,
// whose output is implementation-defined and would break replay across
// standard libraries.
double ChannelEmulator::next_unit() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

bool ChannelEmulator::offer(const SpatMessage& m) {
  ++offered_;
  const double drop_draw = next_unit();
  const double jitter_draw = next_unit();
  if (drop_draw < model_.drop_probability) {
    ++dropped_;
    return false;
  }
  const double sent = static_cast<double>(m.timestamp_ms);
  double at = sent + model_.latency_ms + (2.0 * jitter_draw - 1.0) * model_.jitter_ms;
  at = std::max(at, sent);
  auto [it, inserted] = last_delivery_ms_.try_emplace(m.ref(), at);
  if (!inserted) {
    at = std::max(at, it->second);
    it->second = at;
  }
  pending_.emplace(std::pair{at, sequence_++}, m);
  return true;
}

std::vector<Delivery> ChannelEmulator::drain(double now_ms) {
  std::vector<Delivery> out;
  auto it = pending_.begin();
  while (it != pending_.end() && it->first.first <= now_ms) {
    out.push_back({it->second, it->first.first});
    it = pending_.erase(it);
  }
  return out;
}

}  // namespace ecodrive::spatnet
