#include "ecodrive/spatnet/broker.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace ecodrive::spatnet {

struct Broker::Subscriber {
  std::uint64_t id = 0;
  std::size_t listener = 0;
  Socket socket;
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<std::shared_ptr<const std::string>> queue;
  bool stop = false;
  std::atomic<bool> connected{true};
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::thread writer;
};

Broker::Broker(BrokerOptions options) : options_(std::move(options)) {
  if (options_.binds.empty()) options_.binds.push_back(Endpoint{});
  if (options_.queue_bound == 0) options_.queue_bound = 1;
  for (const auto& ep : options_.binds) {
    listeners_.push_back(listen_tcp(ep));
    ports_.push_back(local_port(listeners_.back()));
  }
  for (std::size_t i = 0; i < listeners_.size(); ++i) {
    acceptors_.emplace_back([this, i] { accept_loop(i); });
  }
}

Broker::~Broker() { stop(); }

void Broker::accept_loop(std::size_t listener) {
  using namespace std::chrono_literals;
  while (!stopping_) {
    auto sock = accept_with_timeout(listeners_[listener], 50ms);
    if (!sock) continue;
    auto sub = std::make_unique<Subscriber>();
    sub->listener = listener;
    sub->socket = std::move(*sock);
    Subscriber& ref = *sub;
    {
      std::lock_guard lock(mutex_);
      if (stopping_) return;
      sub->id = next_id_++;
      if (options_.verbose) {
        fmt::print(stderr, "broker: subscriber {} connected on port {}\n", sub->id, ports_[listener]);
      }
      subscribers_.push_back(std::move(sub));
      ref.writer = std::thread([this, &ref] { writer_loop(ref); });
    }
    subscribers_changed_.notify_all();
  }
}

void Broker::writer_loop(Subscriber& sub) {
  while (true) {
    std::shared_ptr<const std::string> payload;
    {
      std::unique_lock lock(sub.mutex);
      sub.ready.wait(lock, [&] { return sub.stop || !sub.queue.empty(); });
      if (sub.stop) return;
      payload = std::move(sub.queue.front());
      sub.queue.pop_front();
    }
    if (!send_all(sub.socket, *payload)) {
      sub.connected = false;
      if (options_.verbose) fmt::print(stderr, "broker: subscriber {} disconnected\n", sub.id);
      subscribers_changed_.notify_all();
      return;
    }
    std::lock_guard lock(sub.mutex);
    ++sub.delivered;
  }
}

void Broker::prune_locked() {
  auto dead = std::stable_partition(subscribers_.begin(), subscribers_.end(),
                                    [](const auto& s) { return s->connected.load(); });
  for (auto it = dead; it != subscribers_.end(); ++it) {
    if ((*it)->writer.joinable()) (*it)->writer.join();
  }
  subscribers_.erase(dead, subscribers_.end());
}

void Broker::publish(std::span<const SpatMessage> batch) {
  if (batch.empty()) return;
  std::string framed;
  for (const auto& m : batch) {
    framed += encode(m);
    framed += '\n';
  }
  auto payload = std::make_shared<const std::string>(std::move(framed));

  std::lock_guard lock(mutex_);
  prune_locked();
  for (auto& sub : subscribers_) {
    {
      std::lock_guard q(sub->mutex);
      if (sub->queue.size() >= options_.queue_bound) {
        sub->queue.pop_front();
        ++sub->dropped;
      }
      sub->queue.push_back(payload);
    }
    sub->ready.notify_one();
  }
}

std::size_t Broker::subscriber_count() const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(std::count_if(subscribers_.begin(), subscribers_.end(),
                                                [](const auto& s) { return s->connected.load(); }));
}

std::vector<SubscriberStats> Broker::stats() const {
  std::lock_guard lock(mutex_);
  std::vector<SubscriberStats> out;
  for (const auto& sub : subscribers_) {
    std::lock_guard q(sub->mutex);
    out.push_back({sub->id, sub->listener, sub->delivered, sub->dropped, sub->connected.load()});
  }
  return out;
}

bool Broker::wait_for_subscribers(std::size_t n, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return subscribers_changed_.wait_for(lock, timeout, [&] {
    return static_cast<std::size_t>(std::count_if(subscribers_.begin(), subscribers_.end(), [](const auto& s) {
             return s->connected.load();
           })) >= n;
  });
}

void Broker::stop() {
  if (stopping_.exchange(true)) return;
  for (auto& t : acceptors_) {
    if (t.joinable()) t.join();
  }
  std::lock_guard lock(mutex_);
  for (auto& sub : subscribers_) {
    {
      std::lock_guard q(sub->mutex);
      sub->stop = true;
    }
    sub->ready.notify_one();
    sub->socket.shutdown();
    if (sub->writer.joinable()) sub->writer.join();
  }
  subscribers_.clear();
  listeners_.clear();
}

void run_broadcast_loop(Broker& broker, std::span<const SignalController> controllers,
                        double duration_s, double pace, const std::function<bool()>& keep_running) {
  const auto start = std::chrono::steady_clock::now();
  const double step_real_s = 1.0 / (pace > 0.0 ? pace : 1.0);
  const auto ticks = static_cast<std::int64_t>(std::floor(duration_s));
  for (std::int64_t k = 0; k <= ticks && keep_running(); ++k) {
    std::this_thread::sleep_until(start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                              std::chrono::duration<double>(k * step_real_s)));
    auto batch = broadcast_tick(controllers, k * 1000);
    broker.publish(batch);
  }
}

}  // namespace ecodrive::spatnet
