#include "ecodrive/error.hpp"
#include "ecodrive/spatnet/broker.hpp"

namespace ecodrive::spatnet {

SpatSubscriber::SpatSubscriber(const Endpoint& broker, ChannelModel channel, std::uint64_t seed)
    : socket_(connect_tcp(broker)), reader_(socket_), channel_(channel, seed) {}

void SpatSubscriber::accept_line(const std::string& line) {
  if (line.empty()) return;
  try {
    channel_.offer(decode(line));
  } catch (const InvalidInput&) {
    ++malformed_;
  }
}

bool SpatSubscriber::receive(std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    auto line = reader_.read_line();
    if (!line) {
      connected_ = false;
      return false;
    }
    accept_line(*line);
  }
  return true;
}

bool SpatSubscriber::receive_for(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (connected_) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) break;
    auto line = reader_.read_line_for(left);
    if (!line) {
      if (!reader_.timed_out()) connected_ = false;
      break;
    }
    accept_line(*line);
  }
  return connected_;
}

}  // namespace ecodrive::spatnet
