#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <doctest.h>
#include <httplib.h>

#include "../support/oracles.hpp"
#include "ecodrive/advisor/advisory_loop.hpp"
#include "ecodrive/cli/commands.hpp"
#include "ecodrive/cli/compare.hpp"
#include "ecodrive/cli/live.hpp"
#include "ecodrive/error.hpp"
#include "ecodrive/simtruck/scenario_config.hpp"
#include "ecodrive/simtruck/scenario_runner.hpp"

using namespace ecodrive;
using namespace ecodrive::cli;
using namespace std::chrono_literals;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("ecodrive_test_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

int invoke(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "ecodrive");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

advisor::AdvisoryRecord record(std::int64_t t_ms, double lo, double hi, advisor::Gating g = advisor::Gating::Active) {
  advisor::AdvisoryRecord r;
  r.t_ms = t_ms;
  r.band = {lo, hi, g};
  return r;
}

}  // namespace

TEST_CASE("run writes identical bytes twice and compare against itself saves nothing") {
  TempDir tmp;
  const auto cfg = oracle::fixture("decel_eco.json").string();
  REQUIRE(invoke({"run", cfg, "-o", (tmp / "a.csv").string()}) == kExitOk);
  REQUIRE(invoke({"run", cfg, "-o", (tmp / "b.csv").string()}) == kExitOk);
  CHECK(slurp(tmp / "a.csv") == slurp(tmp / "b.csv"));
  CHECK(slurp(tmp / "a.csv").find("config_digest=") != std::string::npos);

  const auto log = simtruck::read_csv_file(tmp / "a.csv");
  const auto self = compare_logs(log, log);
  CHECK(self.savings_percent == 0.0);
  CHECK(self.stops_delta == 0);
  CHECK_FALSE(self.flags.eco_saves_fuel);
  CHECK(invoke({"compare", (tmp / "a.csv").string(), (tmp / "b.csv").string(), "--report",
             (tmp / "r.json").string(), "--csv", (tmp / "r.csv").string()}) == kExitOk);
  CHECK(slurp(tmp / "r.json").find("\"savings_percent\"") != std::string::npos);
  CHECK(slurp(tmp / "r.csv").rfind(csv_header(), 0) == 0);
  CHECK(invoke({"compare", (tmp / "a.csv").string(), (tmp / "b.csv").string(), "--check"}) == kExitFlagFailure);
}

TEST_CASE("comparison of different scenarios is refused") {
  TempDir tmp;
  REQUIRE(invoke({"run", oracle::fixture("decel_eco.json").string(), "-o", (tmp / "d.csv").string()}) == kExitOk);
  REQUIRE(invoke({"run", oracle::fixture("accel_eco.json").string(), "-o", (tmp / "a.csv").string()}) == kExitOk);
  std::string err;
  CHECK(invoke({"compare", (tmp / "d.csv").string(), (tmp / "a.csv").string()}, nullptr, &err) == kExitUsage);
  CHECK(err.find("refused") != std::string::npos);
  CHECK_THROWS_AS(compare_logs(simtruck::read_csv_file(tmp / "d.csv"), simtruck::read_csv_file(tmp / "a.csv")),
                  ComparisonRefused);
}

TEST_CASE("missing input files exit 2 naming the path") {
  std::string err;
  CHECK(invoke({"run", "/nonexistent/cfg.json", "-o", "/tmp/x.csv"}, nullptr, &err) == kExitUsage);
  CHECK(err.find("/nonexistent/cfg.json") != std::string::npos);
  CHECK(invoke({"compare", "/nonexistent/a.csv", "/nonexistent/b.csv"}, nullptr, &err) == kExitUsage);
  CHECK(err.find("/nonexistent/a.csv") != std::string::npos);
  CHECK(invoke({"bogus"}) == kExitUsage);
  std::string out;
  CHECK(invoke({"--version"}, &out) == kExitOk);
  CHECK_FALSE(out.empty());
}

TEST_CASE("replay to stdout emits one advisory record per row") {
  TempDir tmp;
  REQUIRE(invoke({"run", oracle::fixture("decel_eco.json").string(), "-o", (tmp / "d.csv").string()}) == kExitOk);
  std::string out;
  REQUIRE(invoke({"replay", (tmp / "d.csv").string()}, &out) == kExitOk);
  const auto log = simtruck::read_csv_file(tmp / "d.csv");
  std::istringstream lines(out);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto rec = advisor::decode_record(line);
    CHECK(rec.t_ms == std::llround(log.rows[n].t_s * 1000));
    CHECK(rec.band == log.rows[n].band);
    ++n;
  }
  CHECK(n == log.rows.size());
}

TEST_CASE("pedal commands") {
  const PedalCommand c{1500, 0.25, 0.0};
  CHECK(decode_command(encode_command(c)).throttle == 0.25);
  CHECK(decode_command(R"({"t_ms":10,"throttle":0,"brake":1})").brake == 1.0);
  CHECK_THROWS_AS(decode_command(R"({"t_ms":10,"throttle":1.5,"brake":0})"), InvalidInput);
  CHECK_THROWS_AS(decode_command(R"({"t_ms":10,"throttle":0})"), InvalidInput);
  CHECK_THROWS_AS(decode_command("nope"), InvalidInput);

  const simtruck::TruckParams truck;
  const energy::EnergyParams energy;
  CHECK(pedal_accel({0, 1.0, 0.0}, 10, truck, energy) == doctest::Approx(truck.max_accel_mps2));
  CHECK(pedal_accel({0, 1.0, 1.0}, 10, truck, energy) == doctest::Approx(-truck.max_decel_mps2));
  CHECK(pedal_accel({0, 0.0, 0.0}, 10, truck, energy) == doctest::Approx(-energy::coast_decel(10, energy)));
}

TEST_CASE("display coalescing") {
  BandCoalescer c;
  CHECK(c.apply(record(0, 5.0, 10.0)).band.v_upper_mps == 10.0);
  CHECK(c.apply(record(100, 5.1, 10.2)).band == advisor::SpeedBand{5.0, 10.0, advisor::Gating::Active});
  CHECK(c.apply(record(200, 5.0, 10.3)).band.v_upper_mps == 10.3);
  CHECK(c.apply(record(300, 5.0, 10.4)).band.v_upper_mps == 10.3);
  CHECK(c.apply(record(1300, 5.0, 10.4)).band.v_upper_mps == 10.4);
  CHECK(c.apply(record(1400, 5.0, 10.5, advisor::Gating::CappedByLead)).band.gating == advisor::Gating::CappedByLead);
}

TEST_CASE("ui bridge streams advisories and accepts commands") {
  UiBridge bridge({"127.0.0.1", 0});
  REQUIRE(bridge.port() != 0);
  CHECK_FALSE(bridge.ui_seen());

  std::string streamed;
  std::thread reader([&] {
    httplib::Client client("127.0.0.1", bridge.port());
    client.set_read_timeout(10, 0);
    client.Get("/advisory", [&](const char* data, std::size_t len) {
      streamed.append(data, len);
      return true;
    });
  });
  REQUIRE(bridge.wait_for_ui(5000ms));
  for (int i = 0; i < 200 && bridge.open_streams() == 0; ++i) std::this_thread::sleep_for(10ms);

  bridge.publish(record(0, 0.0, 10.0));
  bridge.publish(record(100, 0.0, 12.0, advisor::Gating::SuppressedTtc));
  bridge.publish(record(200, 0.0, 12.0));

  httplib::Client poster("127.0.0.1", bridge.port());
  auto res = poster.Post("/command", encode_command({100, 0.4, 0.0}) + "\n" + encode_command({200, 0.0, 0.3}) + "\n",
                         "application/x-ndjson");
  REQUIRE(res);
  CHECK(res->status == 204);
  res = poster.Post("/command", "{\"t_ms\":1}\n", "application/x-ndjson");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(res->body.find("line 1") != std::string::npos);

  bridge.close_streams();
  reader.join();
  bridge.stop();

  std::istringstream lines(streamed);
  std::string line;
  std::vector<advisor::AdvisoryRecord> got;
  while (std::getline(lines, line)) got.push_back(advisor::decode_record(line));
  REQUIRE(got.size() == 3);
  CHECK(got[1].band.gating == advisor::Gating::SuppressedTtc);
  CHECK(bridge.latest_command()->brake == doctest::Approx(0.3));
  CHECK(bridge.received_commands().size() == 2);
}

TEST_CASE("live session ends with a gentle stop when the UI goes quiet") {
  TempDir tmp;
  LiveOptions opt;
  opt.config = oracle::fixture("accel_eco.json");
  opt.ui_bind = {"127.0.0.1", 0};
  opt.session_log = tmp / "session.csv";
  opt.commands_log = tmp / "commands.csv";
  opt.pace = 10.0;
  opt.connect_timeout = 5000ms;
  opt.heartbeat_timeout = 300ms;

  std::atomic<std::uint16_t> port{0};
  std::thread ui([&] {
    while (port == 0) std::this_thread::sleep_for(5ms);
    httplib::Client client("127.0.0.1", port);
    for (int i = 0; i < 10; ++i) {
      client.Post("/command", encode_command({i * 100, 0.5, 0.0}) + "\n", "application/x-ndjson");
      std::this_thread::sleep_for(50ms);
    }
  });
  const auto result = run_live(opt, [&](std::uint16_t p) { port = p; });
  ui.join();

  CHECK(result.ui_disconnected);
  CHECK(result.commands == 10);
  const auto log = simtruck::read_csv_file(result.session_log);
  CHECK(log.header.diagnostic == "UI disconnected");
  REQUIRE_FALSE(log.rows.empty());
  CHECK(log.rows.back().speed_mps < 1.0);
  for (const auto& r : log.rows) CHECK(r.accel_mps2 >= -1.5 - 1e-9);
  CHECK(slurp(opt.commands_log).rfind("received_ms,t_ms,throttle,brake\n", 0) == 0);
}
