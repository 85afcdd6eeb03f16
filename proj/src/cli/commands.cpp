#include "ecodrive/cli/commands.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <cmath>
#include <limits>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ecodrive/cli/compare.hpp"
#include "ecodrive/cli/live.hpp"
#include "ecodrive/error.hpp"
#include "ecodrive/simtruck/scenario_runner.hpp"
#include "ecodrive/spatnet/broker.hpp"

namespace ecodrive::cli {

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw LoadError(fmt::format("cannot write '{}'", path.string()));
  f << text;
}

std::pair<double, double> parse_window(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw InvalidInput("window must be 'lo,hi'");
  const double lo = std::stod(text.substr(0, comma));
  const double hi = std::stod(text.substr(comma + 1));
  if (!(lo <= hi)) throw InvalidInput("window lower bound exceeds upper bound");
  return {lo, hi};
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_path,
            const GlobalOptions& global, const AdvisorOverrides& advisor, std::ostream& out, std::ostream& err) {
  try {
    auto config = simtruck::load_scenario(config_path);
    if (global.seed) config.seed = *global.seed;
    if (advisor.ttc_threshold_s) config.advisor.ttc_threshold_s = *advisor.ttc_threshold_s;
    if (advisor.staleness_s) config.advisor.staleness_s = *advisor.staleness_s;
    if (advisor.rate_hz) config.advisor.rate_hz = *advisor.rate_hz;
    config.validate();
    const auto log = simtruck::run_scenario(config);
    simtruck::write_csv_file(log, out_path);
    if (global.verbose && !log.rows.empty()) {
      const auto fuel = trip_fuel(log);
      out << fmt::format("{}: {} rows, {:.1f} g fuel, {} stops -> {}\n", config.name, log.rows.size(),
                         fuel.total_g, fuel.stops_count, out_path.string());
    }
    if (!log.header.diagnostic.empty()) err << "run ended early: " << log.header.diagnostic << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_compare(const std::filesystem::path& baseline, const std::filesystem::path& eco,
                const CompareOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const auto base_log = simtruck::read_csv_file(baseline);
    const auto eco_log = simtruck::read_csv_file(eco);
    const auto report = compare_logs(base_log, eco_log, options.window);
    const auto json = to_json(report);
    out << json << "\n";
    if (options.report_path) write_text(*options.report_path, json + "\n");
    if (options.csv_path) write_text(*options.csv_path, csv_header() + "\n" + to_csv_row(report) + "\n");
    return options.check && !report.flags.all() ? kExitFlagFailure : kExitOk;
  } catch (const ComparisonRefused& e) {
    err << "refused: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_replay(const std::filesystem::path& log_path, const ReplayOptions& options, std::ostream& out,
               std::ostream& err) {
  try {
    const auto log = simtruck::read_csv_file(log_path);
    if (!options.ui_bind) {
      for (const auto& row : log.rows) out << advisor::encode_record(simtruck::to_advisory_record(row)) << "\n";
      return kExitOk;
    }
    UiBridge bridge(*options.ui_bind);
    err << fmt::format("replay: serving on port {}\n", bridge.port());
    replay_to_ui(log, bridge, options.pace, options.connect_timeout);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_serve(const ServeOptions& options, const GlobalOptions& global, std::ostream& out, std::ostream& err) {
  try {
    const auto config = simtruck::load_scenario(options.config);
    spatnet::BrokerOptions bo;
    bo.binds = {options.bind};
    if (options.ui_bind) bo.binds.push_back(*options.ui_bind);
    bo.verbose = global.verbose;
    spatnet::Broker broker(bo);
    const auto ports = broker.ports();
    out << fmt::format("serving SPaT on port {}", ports[0]);
    if (ports.size() > 1) out << fmt::format(", UI port {}", ports[1]);
    out << std::endl;
    g_interrupted = false;
    auto previous = std::signal(SIGINT, on_signal);
    spatnet::run_broadcast_loop(broker, config.signals, options.duration_s.value_or(config.duration_s),
                                options.pace, [] { return !g_interrupted.load(); });
    std::signal(SIGINT, previous);
    broker.stop();
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_subscribe(const SubscribeOptions& options, const GlobalOptions& global, std::ostream& out,
                  std::ostream& err) {
  try {
    options.channel.validate();
    if (!(options.pace > 0.0)) throw InvalidInput("pace must be > 0");
    spatnet::SpatSubscriber sub(options.connect, options.channel, global.seed.value_or(0));
    std::size_t printed = 0;
    const auto start = std::chrono::steady_clock::now();
    auto emit = [&](double now_ms) {
      for (const auto& d : sub.poll(now_ms)) {
        out << fmt::format("{:.0f} {}", d.delivered_ms, spatnet::encode(d.message)) << std::endl;
        if (options.count && ++printed >= *options.count) return true;
      }
      return false;
    };
    while (sub.connected()) {
      sub.receive_for(std::chrono::milliseconds(20));
      const double elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (emit(elapsed_s * options.pace * 1000.0)) return kExitOk;
    }
    emit(std::numeric_limits<double>::infinity());
    if (global.verbose) {
      err << fmt::format("offered {}, dropped {}\n", sub.channel().offered(), sub.channel().dropped());
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Connected eco-driving simulator for heavy-duty trucks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ECODRIVE_VERSION);

  GlobalOptions global;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the scenario / channel seed");
  app.add_flag("-v,--verbose", global.verbose, "Print progress to stderr");

  // run
  std::string run_config;
  std::string run_out = "trajectory.csv";
  AdvisorOverrides overrides;
  auto* run = app.add_subcommand("run", "Run a scenario and write its trajectory log");
  run->add_option("config", run_config, "Scenario config")->required();
  run->add_option("-o,--out", run_out, "Output CSV");
  run->add_option("--ttc-threshold-s", overrides.ttc_threshold_s, "Time-to-collision suppression threshold");
  run->add_option("--staleness-s", overrides.staleness_s, "SPaT staleness bound");
  run->add_option("--rate-hz", overrides.rate_hz, "Advisory rate");

  // compare
  std::string cmp_base;
  std::string cmp_eco;
  std::string cmp_window;
  std::string cmp_report;
  std::string cmp_csv;
  CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "Compare a baseline log (first) with an eco log (second)");
  compare->add_option("baseline", cmp_base, "Baseline trajectory log")->required();
  compare->add_option("eco", cmp_eco, "Eco trajectory log")->required();
  compare->add_option("--window", cmp_window, "Savings acceptance window in percent, 'lo,hi'");
  compare->add_option("--report", cmp_report, "Also write the JSON report here");
  compare->add_option("--csv", cmp_csv, "Write a one-row CSV summary here");
  compare->add_flag("--check", cmp.check, "Exit 1 if any verdict flag fails");

  // live
  LiveOptions live;
  std::string live_config;
  std::string live_bind = "127.0.0.1:8765";
  std::string live_log = "live_session.csv";
  std::string live_cmds = "live_commands.csv";
  double heartbeat_s = 3.0;
  double connect_s = 30.0;
  auto* live_cmd = app.add_subcommand("live", "Drive a scenario from the browser UI");
  live_cmd->add_option("config", live_config, "Scenario config")->required();
  live_cmd->add_option("--ui-bind", live_bind, "UI bridge address host:port");
  live_cmd->add_option("-o,--out", live_log, "Session trajectory log");
  live_cmd->add_option("--commands-out", live_cmds, "Received pedal commands");
  live_cmd->add_option("--pace", live.pace, "Simulated seconds per wall second");
  live_cmd->add_option("--heartbeat-timeout-s", heartbeat_s, "UI silence treated as a disconnect");
  live_cmd->add_option("--connect-timeout-s", connect_s, "How long to wait for the UI");

  // replay
  std::string replay_log;
  std::string replay_bind;
  ReplayOptions replay;
  auto* replay_cmd = app.add_subcommand("replay", "Stream a trajectory log as advisory records");
  replay_cmd->add_option("log", replay_log, "Trajectory log")->required();
  replay_cmd->add_option("--ui-bind", replay_bind, "Serve the UI bridge here instead of printing");
  replay_cmd->add_option("--pace", replay.pace, "Simulated seconds per wall second");

  // serve
  ServeOptions serve;
  std::string serve_config;
  std::string serve_bind = "127.0.0.1:7000";
  std::string serve_ui;
  auto* serve_cmd = app.add_subcommand("serve", "Publish a scenario's SPaT stream over TCP");
  serve_cmd->add_option("config", serve_config, "Scenario config")->required();
  serve_cmd->add_option("--bind", serve_bind, "Vehicle endpoint host:port");
  serve_cmd->add_option("--ui-bind", serve_ui, "Second endpoint carrying the same stream");
  serve_cmd->add_option("--pace", serve.pace, "Simulated seconds per wall second");
  serve_cmd->add_option("--duration-s", serve.duration_s, "Override the scenario duration");

  // subscribe
  SubscribeOptions sub;
  std::string sub_connect = "127.0.0.1:7000";
  auto* sub_cmd = app.add_subcommand("subscribe", "Receive a SPaT stream through an emulated cellular link");
  sub_cmd->add_option("--connect", sub_connect, "Broker host:port");
  sub_cmd->add_option("--latency-ms", sub.channel.latency_ms, "Mean one-way latency");
  sub_cmd->add_option("--jitter-ms", sub.channel.jitter_ms, "Uniform jitter half-width");
  sub_cmd->add_option("--drop", sub.channel.drop_probability, "Drop probability");
  sub_cmd->add_option("--count", sub.count, "Stop after this many messages");
  sub_cmd->add_option("--pace", sub.pace, "Simulated seconds per wall second");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }
  if (*seed_opt) global.seed = seed;

  try {
    if (*run) return cmd_run(run_config, run_out, global, overrides, out, err);
    if (*compare) {
      if (!cmp_window.empty()) cmp.window = parse_window(cmp_window);
      if (!cmp_report.empty()) cmp.report_path = cmp_report;
      if (!cmp_csv.empty()) cmp.csv_path = cmp_csv;
      return cmd_compare(cmp_base, cmp_eco, cmp, out, err);
    }
    if (*live_cmd) {
      live.config = live_config;
      live.ui_bind = spatnet::Endpoint::parse(live_bind);
      live.session_log = live_log;
      live.commands_log = live_cmds;
      live.heartbeat_timeout = std::chrono::milliseconds(std::llround(heartbeat_s * 1000.0));
      live.connect_timeout = std::chrono::milliseconds(std::llround(connect_s * 1000.0));
      live.seed = global.seed;
      live.verbose = global.verbose;
      const auto r = run_live(live, [&](std::uint16_t port) {
        out << fmt::format("live: UI bridge on port {}", port) << std::endl;
      });
      out << fmt::format("live: {} rows, {} commands{} -> {}\n", r.rows, r.commands,
                         r.ui_disconnected ? ", UI disconnected" : "", r.session_log.string());
      return kExitOk;
    }
    if (*replay_cmd) {
      if (!replay_bind.empty()) replay.ui_bind = spatnet::Endpoint::parse(replay_bind);
      return cmd_replay(replay_log, replay, out, err);
    }
    if (*serve_cmd) {
      serve.config = serve_config;
      serve.bind = spatnet::Endpoint::parse(serve_bind);
      if (!serve_ui.empty()) serve.ui_bind = spatnet::Endpoint::parse(serve_ui);
      return cmd_serve(serve, global, out, err);
    }
    if (*sub_cmd) {
      sub.connect = spatnet::Endpoint::parse(sub_connect);
      return cmd_subscribe(sub, global, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace ecodrive::cli
