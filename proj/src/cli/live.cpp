#include "ecodrive/cli/live.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "ecodrive/energy/energy.hpp"
#include "ecodrive/error.hpp"
#include "ecodrive/simtruck/scenario_runner.hpp"

namespace ecodrive::cli {

namespace {

constexpr auto kStreamPoll = std::chrono::milliseconds(100);
constexpr double kStoppedMps = 0.1;

void add_cors(httplib::Response& res) {
  res.set_header("Access-Control-Allow-Origin", "*");
  res.set_header("Access-Control-Allow-Headers", "Content-Type");
  res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
}

std::chrono::steady_clock::duration wall_for(double sim_s, double pace) {
  return std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(sim_s / pace));
}

}  // namespace

std::string encode_command(const PedalCommand& c) {
  return fmt::format(R"({{"t_ms":{},"throttle":{:.3f},"brake":{:.3f}}})", c.t_ms, c.throttle, c.brake);
}

PedalCommand decode_command(std::string_view line) {
  PedalCommand c;
  try {
    const auto j = nlohmann::json::parse(line);
    c.t_ms = j.at("t_ms").get<std::int64_t>();
    c.throttle = j.at("throttle").get<double>();
    c.brake = j.at("brake").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(fmt::format("malformed command: {}", e.what()));
  }
  for (double p : {c.throttle, c.brake}) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("pedal values must be in [0, 1]");
  }
  return c;
}

double pedal_accel(const PedalCommand& c, double speed_mps, const simtruck::TruckParams& truck,
                   const energy::EnergyParams& energy) {
  if (c.brake > 0.0) return -c.brake * truck.max_decel_mps2;
  if (c.throttle > 0.0) return c.throttle * truck.max_accel_mps2;
  return -energy::coast_decel(speed_mps, energy);
}

advisor::AdvisoryRecord BandCoalescer::apply(advisor::AdvisoryRecord rec) {
  const auto& b = rec.band;
  if (shown_ && shown_->gating == b.gating && rec.t_ms - shown_at_ms_ < kHoldMs &&
      std::abs(shown_->v_lower_mps - b.v_lower_mps) < kMinBandChangeMps &&
      std::abs(shown_->v_upper_mps - b.v_upper_mps) < kMinBandChangeMps) {
    rec.band = *shown_;
    return rec;
  }
  shown_ = b;
  shown_at_ms_ = rec.t_ms;
  return rec;
}

UiBridge::UiBridge(const spatnet::Endpoint& bind)
    : server_(std::make_unique<httplib::Server>()),
      start_(std::chrono::steady_clock::now()),
      last_command_(start_) {
  server_->Options(".*", [](const httplib::Request&, httplib::Response& res) {
    add_cors(res);
    res.status = 204;
  });

  server_->Get("/advisory", [this](const httplib::Request&, httplib::Response& res) {
    add_cors(res);
    std::size_t first = 0;
    {
      std::lock_guard lock(mutex_);
      ui_seen_ = true;
      ++open_streams_;
      first = lines_.empty() ? 0 : lines_.size() - 1;
    }
    changed_.notify_all();
    // Decrements the stream count when the last copy of the provider dies.
    auto guard = std::shared_ptr<void>(nullptr, [this](void*) {
      std::lock_guard lock(mutex_);
      --open_streams_;
    });
    auto next = std::make_shared<std::size_t>(first);
    res.set_chunked_content_provider(
        "application/x-ndjson", [this, next, guard](std::size_t, httplib::DataSink& sink) {
          std::vector<std::string> batch;
          bool finished = false;
          {
            std::unique_lock lock(mutex_);
            changed_.wait_for(lock, kStreamPoll, [&] { return closed_ || *next < lines_.size(); });
            for (; *next < lines_.size(); ++*next) batch.push_back(lines_[*next]);
            finished = closed_;
          }
          for (const auto& line : batch) {
            if (!sink.write(line.data(), line.size())) return false;
          }
          if (finished) {
            sink.done();
          } else if (!sink.is_writable()) {
            return false;
          }
          return true;
        });
  });

  server_->Post("/command", [this](const httplib::Request& req, httplib::Response& res) {
    add_cors(res);
    std::vector<PedalCommand> accepted;
    std::size_t line_no = 0;
    std::size_t start = 0;
    const std::string& body = req.body;
    while (start < body.size()) {
      auto end = body.find('\n', start);
      if (end == std::string::npos) end = body.size();
      std::string_view line(body.data() + start, end - start);
      start = end + 1;
      ++line_no;
      if (line.empty() || line == "\r") continue;
      try {
        accepted.push_back(decode_command(line));
      } catch (const InvalidInput& e) {
        res.status = 400;
        res.set_content(fmt::format("line {}: {}\n", line_no, e.what()), "text/plain");
        return;
      }
    }
    const auto now = std::chrono::steady_clock::now();
    const auto offset = std::chrono::duration_cast<std::chrono::milliseconds>(now - start_).count();
    {
      std::lock_guard lock(mutex_);
      ui_seen_ = true;
      last_command_ = now;
      for (const auto& c : accepted) {
        commands_.emplace_back(offset, c);
        latest_ = c;
      }
    }
    changed_.notify_all();
    res.status = 204;
  });

  const bool bound = bind.port == 0 ? (port_ = static_cast<std::uint16_t>(server_->bind_to_any_port(bind.host))) > 0
                                    : server_->bind_to_port(bind.host, bind.port);
  if (!bound) throw NetworkError(fmt::format("cannot bind UI bridge to {}", bind.to_string()));
  if (bind.port != 0) port_ = bind.port;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

UiBridge::~UiBridge() { stop(); }

void UiBridge::stop() {
  close_streams();
  if (thread_.joinable()) {
    server_->stop();
    thread_.join();
  }
}

void UiBridge::publish(const advisor::AdvisoryRecord& rec) {
  {
    std::lock_guard lock(mutex_);
    lines_.push_back(advisor::encode_record(coalescer_.apply(rec)) + "\n");
  }
  changed_.notify_all();
}

void UiBridge::close_streams() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  changed_.notify_all();
}

std::optional<PedalCommand> UiBridge::latest_command() const {
  std::lock_guard lock(mutex_);
  return latest_;
}

std::vector<std::pair<std::int64_t, PedalCommand>> UiBridge::received_commands() const {
  std::lock_guard lock(mutex_);
  return commands_;
}

std::chrono::steady_clock::duration UiBridge::since_last_command() const {
  std::lock_guard lock(mutex_);
  return std::chrono::steady_clock::now() - last_command_;
}

bool UiBridge::ui_seen() const {
  std::lock_guard lock(mutex_);
  return ui_seen_;
}

std::size_t UiBridge::open_streams() const {
  std::lock_guard lock(mutex_);
  return open_streams_;
}

bool UiBridge::wait_for_ui(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return changed_.wait_for(lock, timeout, [this] { return ui_seen_; });
}

LiveResult run_live(const LiveOptions& options, const std::function<void(std::uint16_t)>& on_ready) {
  if (!(options.pace > 0.0)) throw InvalidInput("pace must be > 0");
  auto config = simtruck::load_scenario(options.config);
  if (options.seed) config.seed = *options.seed;

  UiBridge bridge(options.ui_bind);
  if (on_ready) on_ready(bridge.port());
  if (options.verbose) fmt::print(stderr, "live: waiting for UI on port {}\n", bridge.port());
  if (!bridge.wait_for_ui(options.connect_timeout)) throw NetworkError("no UI connected");

  simtruck::ScenarioRunner runner(std::move(config));
  const auto& cfg = runner.config();
  LiveResult result;
  result.session_log = options.session_log;

  // The heartbeat clock starts when the drive does.
  const auto start = std::chrono::steady_clock::now();
  auto heartbeat_ref = start;
  std::size_t seen_commands = 0;

  while (!runner.done()) {
    const auto commands = bridge.received_commands();
    if (commands.size() != seen_commands) {
      seen_commands = commands.size();
      heartbeat_ref = std::chrono::steady_clock::now();
    }
    const bool gone = std::chrono::steady_clock::now() - heartbeat_ref > options.heartbeat_timeout;
    if (gone && !result.ui_disconnected) {
      result.ui_disconnected = true;
      if (options.verbose) fmt::print(stderr, "live: UI heartbeat lost, bringing the truck to a stop\n");
    }

    const double v = runner.state().speed_mps;
    if (result.ui_disconnected) {
      if (v < kStoppedMps) {
        runner.stop("UI disconnected");
        break;
      }
      runner.set_manual_accel(-cfg.driver.comfortable_decel_mps2);
    } else {
      const auto cmd = bridge.latest_command().value_or(PedalCommand{});
      runner.set_manual_accel(pedal_accel(cmd, v, cfg.truck, cfg.energy));
    }

    runner.step();
    bridge.publish(runner.last_advisory());
    std::this_thread::sleep_until(start + wall_for(static_cast<double>(runner.now_ms()) / 1000.0, options.pace));
  }

  bridge.close_streams();
  const auto log = runner.log();
  simtruck::write_csv_file(log, options.session_log);
  result.rows = log.rows.size();

  std::ofstream cmd_out(options.commands_log, std::ios::binary);
  if (!cmd_out) throw LoadError(fmt::format("cannot write '{}'", options.commands_log.string()));
  cmd_out << "received_ms,t_ms,throttle,brake\n";
  for (const auto& [at, c] : bridge.received_commands()) {
    cmd_out << fmt::format("{},{},{:.3f},{:.3f}\n", at, c.t_ms, c.throttle, c.brake);
    ++result.commands;
  }
  // Let open streams flush their tail before the server goes away.
  for (int i = 0; i < 20 && bridge.open_streams() > 0; ++i) std::this_thread::sleep_for(kStreamPoll);
  return result;
}

void replay_to_ui(const simtruck::TrajectoryLog& log, UiBridge& bridge, double pace,
                  std::chrono::milliseconds connect_timeout) {
  if (!(pace > 0.0)) throw InvalidInput("pace must be > 0");
  if (!bridge.wait_for_ui(connect_timeout)) throw NetworkError("no UI connected");
  if (log.rows.empty()) {
    bridge.close_streams();
    return;
  }
  const auto start = std::chrono::steady_clock::now();
  const double t0 = log.rows.front().t_s;
  for (const auto& row : log.rows) {
    std::this_thread::sleep_until(start + wall_for(row.t_s - t0, pace));
    bridge.publish(simtruck::to_advisory_record(row));
  }
  bridge.close_streams();
  for (int i = 0; i < 20 && bridge.open_streams() > 0; ++i) std::this_thread::sleep_for(kStreamPoll);
}

}  // namespace ecodrive::cli
