#include <algorithm>
#include <chrono>
#include <map>
#include <random>
#include <thread>

#include <doctest.h>

#include "ecodrive/error.hpp"
#include "ecodrive/spatnet/broker.hpp"
#include "ecodrive/spatnet/channel.hpp"
#include "ecodrive/spatnet/spat.hpp"

using namespace ecodrive;
using namespace ecodrive::spatnet;
using namespace std::chrono_literals;

namespace {

PhasePlan g30a4r26(double offset = 0.0) {
  return PhasePlan({{PhaseColor::Green, 30}, {PhaseColor::Amber, 4}, {PhaseColor::Red, 26}}, offset);
}

std::vector<SignalController> two_controllers() {
  return {SignalController{{202, 2}, g30a4r26()}, SignalController{{201, 2}, g30a4r26(10)}};
}

}  // namespace

TEST_CASE("controller state examples") {
  const auto plan = g30a4r26();
  auto s = controller_state(plan, 0.0);
  CHECK(s.phase == PhaseColor::Green);
  CHECK(s.time_remaining_s == 30);
  s = controller_state(plan, 31.5);
  CHECK(s.phase == PhaseColor::Amber);
  CHECK(s.time_remaining_s == 2);
  s = controller_state(plan, 60.0);
  CHECK(s.phase == PhaseColor::Green);
  CHECK(s.time_remaining_s == 30);
  s = controller_state(plan, 34.0);
  CHECK(s.phase == PhaseColor::Red);
  CHECK(s.time_remaining_s == 26);
  CHECK(plan.red_following(1) == 26.0);
  CHECK(plan.red_following(2) == 0.0);
  CHECK(controller_state(g30a4r26(25), 0.0).phase == PhaseColor::Green);
  CHECK(controller_state(g30a4r26(25), 0.0).time_remaining_s == 5);
}

TEST_CASE("plan validation") {
  CHECK_THROWS_AS(PhasePlan({{PhaseColor::Green, 30}}), InvalidInput);
  CHECK_THROWS_AS(PhasePlan({{PhaseColor::Green, 30}, {PhaseColor::Red, 0}}), InvalidInput);
  CHECK_THROWS_AS(PhasePlan({{PhaseColor::Green, 30}, {PhaseColor::Red, 5}}, -1.0), InvalidInput);
  CHECK_THROWS_AS(controller_state(g30a4r26(), -0.1), InvalidInput);
  CHECK_THROWS_AS(phase_from_string("BLUE"), InvalidInput);
}

TEST_CASE("controller state is periodic and residences sum to the cycle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dur(1.0, 60.0), t(0.0, 1000.0);
  for (int k = 0; k < 200; ++k) {
    const PhasePlan plan({{PhaseColor::Green, std::round(dur(rng))},
                          {PhaseColor::Amber, std::round(dur(rng) / 10) + 1},
                          {PhaseColor::Red, std::round(dur(rng))}},
                         std::round(dur(rng)));
    const double c = plan.cycle_length_s();
    for (int i = 0; i < 20; ++i) {
      const double tt = std::round(t(rng) * 10) / 10;
      const auto a = controller_state(plan, tt), b = controller_state(plan, tt + 3 * c);
      CHECK(a.phase == b.phase);
      CHECK(a.time_remaining_s == b.time_remaining_s);
      const auto e = controller_state_exact(plan, tt);
      CHECK(e.time_remaining_s > 0.0);
      CHECK(e.time_remaining_s <= plan.intervals()[e.interval_index].duration_s + 1e-9);
      CHECK(a.time_remaining_s == static_cast<std::int64_t>(std::floor(e.time_remaining_s + 1e-9)));
    }
    // Sampled at 0.1 s, residence in each color matches the plan.
    std::map<PhaseColor, int> ticks;
    for (int i = 0; i < static_cast<int>(std::lround(c * 10)); ++i) ++ticks[controller_state_exact(plan, i * 0.1 + 0.05).phase];
    for (const auto& iv : plan.intervals()) CHECK(ticks[iv.color] == std::lround(iv.duration_s * 10));
  }
}

TEST_CASE("broadcast tick") {
  const auto ctrls = two_controllers();
  const auto batch = broadcast_tick(ctrls, 31000);
  REQUIRE(batch.size() == 2);
  CHECK(batch[0].intersection_id == 201);  // ordered by reference
  CHECK(batch[1].intersection_id == 202);
  CHECK(batch[1].phase == PhaseColor::Amber);
  CHECK(batch[1].time_remaining_s == 3);
  CHECK(batch[0].timestamp_ms == 31000);
  CHECK(broadcast_tick({}, 1000).empty());
  CHECK(find_controller(ctrls, {201, 2}) != nullptr);
  CHECK(find_controller(ctrls, {201, 3}) == nullptr);
}

TEST_CASE("wire encoding") {
  const SpatMessage m{203, 2, PhaseColor::Red, 17, 42000};
  const auto line = encode(m);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(line ==
        R"({"intersection_id":203,"signal_group_id":2,"phase":"RED","time_remaining_s":17,"timestamp_ms":42000})");
  CHECK(decode(line) == m);
  CHECK_THROWS_AS(decode(R"({"intersection_id":203,"signal_group_id":2,"phase":"RED","time_remaining_s":17})"),
                  InvalidInput);
  CHECK_THROWS_AS(decode(line.substr(0, line.size() - 1) + R"(,"extra":1})"), InvalidInput);
  CHECK_THROWS_AS(decode("garbage"), InvalidInput);
  CHECK_THROWS_AS(decode(R"({"intersection_id":203,"signal_group_id":2,"phase":"RED","time_remaining_s":-1,"timestamp_ms":0})"),
                  InvalidInput);
}

TEST_CASE("channel: fixed latency") {
  ChannelEmulator ch({100.0, 0.0, 0.0}, 1);
  REQUIRE(ch.offer({1, 2, PhaseColor::Green, 10, 5000}));
  CHECK(ch.drain(5099.9).empty());
  const auto d = ch.drain(5100.0);
  REQUIRE(d.size() == 1);
  CHECK(d[0].delivered_ms == doctest::Approx(5100.0));
  CHECK(ch.in_flight() == 0);
}

TEST_CASE("channel: zero impairments is the identity") {
  ChannelEmulator ch({0.0, 0.0, 0.0}, 9);
  std::vector<SpatMessage> sent;
  for (int t = 0; t < 50; ++t) {
    sent.push_back({1, 2, PhaseColor::Red, t % 7, t * 1000});
    ch.offer(sent.back());
  }
  const auto got = ch.drain(1e9);
  REQUIRE(got.size() == sent.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].message == sent[i]);
    CHECK(got[i].delivered_ms == sent[i].timestamp_ms);
  }
}

TEST_CASE("channel: drop rate") {
  ChannelEmulator ch({100.0, 0.0, 0.5}, 2024);
  for (int i = 0; i < 10000; ++i) ch.offer({1, 2, PhaseColor::Green, 1, i * 100});
  const double rate = static_cast<double>(ch.dropped()) / static_cast<double>(ch.offered());
  CHECK(std::abs(rate - 0.5) < 0.02);  // 4 sigma at n = 10000
  CHECK(ch.drain(1e12).size() == ch.offered() - ch.dropped());
}

TEST_CASE("channel: per-group order survives jitter") {
  ChannelEmulator ch({100.0, 400.0, 0.1}, 77);
  for (int t = 0; t < 500; ++t) {
    ch.offer({1, 2, PhaseColor::Green, 1, t * 200});
    ch.offer({3, 2, PhaseColor::Green, 1, t * 200});
  }
  std::map<int, std::int64_t> last;
  double last_delivery = -1;
  for (const auto& d : ch.drain(1e12)) {
    CHECK(d.delivered_ms >= last_delivery);
    last_delivery = d.delivered_ms;
    CHECK(d.delivered_ms >= static_cast<double>(d.message.timestamp_ms));
    auto [it, fresh] = last.try_emplace(d.message.intersection_id, d.message.timestamp_ms);
    if (!fresh) {
      CHECK(d.message.timestamp_ms > it->second);
      it->second = d.message.timestamp_ms;
    }
  }
}

TEST_CASE("channel: seeded determinism and validation") {
  auto run = [](std::uint64_t seed) {
    ChannelEmulator ch({100.0, 50.0, 0.2}, seed);
    for (int i = 0; i < 300; ++i) ch.offer({1, 2, PhaseColor::Green, 1, i * 1000});
    std::vector<double> out;
    for (const auto& d : ch.drain(1e12)) out.push_back(d.delivered_ms);
    return out;
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
  CHECK_THROWS_AS(ChannelEmulator({-1.0, 0.0, 0.0}, 1), InvalidInput);
  CHECK_THROWS_AS(ChannelEmulator({0.0, 0.0, 1.0}, 1), InvalidInput);
}

TEST_CASE("endpoint parsing") {
  CHECK(Endpoint::parse("127.0.0.1:9000").port == 9000);
  CHECK(Endpoint::parse(":9000").host == "127.0.0.1");
  CHECK(Endpoint::parse("9001").port == 9001);
  CHECK(Endpoint::parse("localhost:1").to_string() == "localhost:1");
  CHECK_THROWS_AS(Endpoint::parse("host:port"), InvalidInput);
}

TEST_CASE("broker fan-out") {
  Broker broker({});
  const Endpoint ep{"127.0.0.1", broker.ports()[0]};
  const auto ctrls = two_controllers();

  SpatSubscriber first(ep, {0.0, 0.0, 0.0}, 1);
  REQUIRE(broker.wait_for_subscribers(1, 5s));
  for (int t = 0; t < 3; ++t) {
    broker.publish(broadcast_tick(ctrls, t * 1000));
    REQUIRE(first.receive(2));
  }

  SUBCASE("a late joiner starts at the next batch and sees identical content") {
    SpatSubscriber second(ep, {0.0, 0.0, 0.0}, 1);
    REQUIRE(broker.wait_for_subscribers(2, 5s));
    const auto batch = broadcast_tick(ctrls, 3000);
    broker.publish(batch);
    REQUIRE(first.receive(2));
    REQUIRE(second.receive(2));
    const auto a = first.poll(1e9);
    const auto b = second.poll(1e9);
    REQUIRE(a.size() == 8);
    REQUIRE(b.size() == 2);
    CHECK(b[0].message == batch[0]);
    CHECK(b[1].message == batch[1]);
    CHECK(a[6].message == b[0].message);
    CHECK(a[7].message == b[1].message);
  }

  SUBCASE("a stalled subscriber loses oldest batches without blocking publish") {
    BrokerOptions opts;
    opts.queue_bound = 4;
    Broker small(opts);
    Socket stalled = connect_tcp({"127.0.0.1", small.ports()[0]});
    REQUIRE(small.wait_for_subscribers(1, 5s));
    std::vector<SpatMessage> big;
    for (int i = 0; i < 400; ++i) big.push_back({i, 2, PhaseColor::Green, 10, 1000});
    const auto start = std::chrono::steady_clock::now();
    for (int k = 0; k < 3000; ++k) small.publish(big);
    CHECK(std::chrono::steady_clock::now() - start < 20s);
    const auto st = small.stats();
    REQUIRE(st.size() == 1);
    CHECK(st[0].dropped_batches > 0);
    small.stop();
  }
  broker.stop();
}

TEST_CASE("lossless stream: one message per group per second in plan order") {
  const auto ctrls = two_controllers();
  ChannelEmulator ch({100.0, 0.0, 0.0}, 3);
  for (std::int64_t t = 0; t <= 300; ++t) {
    for (const auto& m : broadcast_tick(ctrls, t * 1000)) ch.offer(m);
  }
  std::map<int, std::vector<SpatMessage>> by_group;
  for (const auto& d : ch.drain(1e12)) by_group[d.message.intersection_id].push_back(d.message);
  REQUIRE(by_group.size() == 2);
  auto next_color = [](PhaseColor c) {
    return c == PhaseColor::Green ? PhaseColor::Amber : c == PhaseColor::Amber ? PhaseColor::Red : PhaseColor::Green;
  };
  for (const auto& [id, msgs] : by_group) {
    REQUIRE(msgs.size() == 301);
    for (std::size_t i = 1; i < msgs.size(); ++i) {
      CHECK(msgs[i].timestamp_ms - msgs[i - 1].timestamp_ms == 1000);
      if (msgs[i].phase == msgs[i - 1].phase) {
        CHECK(msgs[i].time_remaining_s == msgs[i - 1].time_remaining_s - 1);
      } else {
        CHECK(msgs[i].phase == next_color(msgs[i - 1].phase));
      }
    }
  }
}

TEST_CASE("subscriber sees the end of the stream") {
  Broker broker({});
  SpatSubscriber sub({"127.0.0.1", broker.ports()[0]}, {0.0, 0.0, 0.0}, 1);
  REQUIRE(broker.wait_for_subscribers(1, 5s));
  broker.stop();
  CHECK_FALSE(sub.receive(1));
  CHECK_FALSE(sub.connected());
}
