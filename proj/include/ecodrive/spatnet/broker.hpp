#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ecodrive/spatnet/channel.hpp"
#include "ecodrive/spatnet/socket.hpp"
#include "ecodrive/spatnet/spat.hpp"

namespace ecodrive::spatnet {

struct BrokerOptions {
  /// First endpoint serves vehicles; any further endpoints (e.g. the DVI UI)
  /// receive the identical stream.
  std::vector<Endpoint> binds{Endpoint{}};
  /// Per-subscriber backlog in batches; the oldest batch is dropped beyond it.
  std::size_t queue_bound = 32;
  bool verbose = false;
};

struct SubscriberStats {
  std::uint64_t id = 0;
  std::size_t listener = 0;
  std::uint64_t delivered_batches = 0;
  std::uint64_t dropped_batches = 0;
  bool connected = false;
};

/// Fan-out SPaT broker. publish() never blocks on a subscriber: each one has
/// a bounded queue drained by its own writer.
class Broker {
 public:
  explicit Broker(BrokerOptions options);
  ~Broker();
  Broker(const Broker&) = delete;
  Broker& operator=(const Broker&) = delete;

  /// Bound ports, in the order of BrokerOptions::binds.
  std::vector<std::uint16_t> ports() const { return ports_; }

  /// Sends one tick worth of messages, newline-framed, to every subscriber.
  void publish(std::span<const SpatMessage> batch);

  std::size_t subscriber_count() const;
  std::vector<SubscriberStats> stats() const;
  bool wait_for_subscribers(std::size_t n, std::chrono::milliseconds timeout) const;

  void stop();

 private:
  struct Subscriber;

  void accept_loop(std::size_t listener);
  void writer_loop(Subscriber& sub);
  void prune_locked();

  BrokerOptions options_;
  std::vector<Socket> listeners_;
  std::vector<std::uint16_t> ports_;
  std::vector<std::thread> acceptors_;
  std::atomic<bool> stopping_{false};
  mutable std::mutex mutex_;
  mutable std::condition_variable subscribers_changed_;
  std::vector<std::unique_ptr<Subscriber>> subscribers_;
  std::uint64_t next_id_ = 1;
};

/// Publishes broadcast_tick output on every whole second, paced against the
/// wall clock (`pace` simulated seconds per real second). Returns when
/// `duration_s` has elapsed or `keep_running` returns false.
void run_broadcast_loop(Broker& broker, std::span<const SignalController> controllers,
                        double duration_s, double pace,
                        const std::function<bool()>& keep_running = [] { return true; });

/// Client side of the stream: reads framed messages from a broker and passes
/// them through a ChannelEmulator.
class SpatSubscriber {
 public:
  SpatSubscriber(const Endpoint& broker, ChannelModel channel, std::uint64_t seed);

  /// Blocks until `n` messages arrived from the broker and feeds them into
  /// the channel. Returns false if the connection ended first.
  bool receive(std::size_t n);

  /// Blocks for at most `timeout` reading whatever arrives.
  bool receive_for(std::chrono::milliseconds timeout);

  /// Messages whose emulated delivery time is <= now_ms.
  std::vector<Delivery> poll(double now_ms) { return channel_.drain(now_ms); }

  bool connected() const { return connected_; }
  const ChannelEmulator& channel() const { return channel_; }
  std::uint64_t malformed_lines() const { return malformed_; }

 private:
  void accept_line(const std::string& line);

  Socket socket_;
  LineReader reader_;
  ChannelEmulator channel_;
  bool connected_ = true;
  std::uint64_t malformed_ = 0;
};

}  // namespace ecodrive::spatnet
