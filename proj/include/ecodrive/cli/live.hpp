#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ecodrive/advisor/advisory_loop.hpp"
#include "ecodrive/simtruck/scenario_config.hpp"
#include "ecodrive/simtruck/trajectory_log.hpp"
#include "ecodrive/spatnet/socket.hpp"

namespace httplib {
class Server;
}

namespace ecodrive::cli {

/// Pedal input from the DVI: {t_ms, throttle, brake}, each pedal in [0, 1].
struct PedalCommand {
  std::int64_t t_ms = 0;
  double throttle = 0.0;
  double brake = 0.0;
};

std::string encode_command(const PedalCommand& c);
/// Throws InvalidInput on malformed records or pedal values outside [0, 1].
PedalCommand decode_command(std::string_view line);

/// Acceleration for a pedal command. Brake wins when both are pressed; no
/// pedal means coasting on road load.
double pedal_accel(const PedalCommand& c, double speed_mps, const simtruck::TruckParams& truck,
                   const energy::EnergyParams& energy);

/// Display hysteresis for the UI stream: a band that moved less than
/// kMinBandChangeMps on both bounds, with unchanged gating, within
/// kHoldMs of the last shown band is replaced by the shown band. The
/// logged advisory is never filtered.
class BandCoalescer {
 public:
  static constexpr double kMinBandChangeMps = 0.25;
  static constexpr std::int64_t kHoldMs = 1000;

  advisor::AdvisoryRecord apply(advisor::AdvisoryRecord rec);

 private:
  std::optional<advisor::SpeedBand> shown_;
  std::int64_t shown_at_ms_ = 0;
};

/// HTTP bridge to the browser UI.
///   GET  /advisory  chunked stream of advisory records, one JSON object per line
///   POST /command   newline-delimited pedal commands (also the heartbeat)
class UiBridge {
 public:
  explicit UiBridge(const spatnet::Endpoint& bind);
  ~UiBridge();
  UiBridge(const UiBridge&) = delete;
  UiBridge& operator=(const UiBridge&) = delete;

  std::uint16_t port() const { return port_; }

  /// Queues a record for every open stream (after display coalescing).
  void publish(const advisor::AdvisoryRecord& rec);
  /// Ends all open streams after they have sent everything published.
  void close_streams();

  std::optional<PedalCommand> latest_command() const;
  /// Every accepted command with its wall-clock receive offset in ms.
  std::vector<std::pair<std::int64_t, PedalCommand>> received_commands() const;
  /// Time since the last command, or since start when none arrived.
  std::chrono::steady_clock::duration since_last_command() const;
  bool ui_seen() const;
  std::size_t open_streams() const;
  /// Waits until a UI opened the stream or posted a command.
  bool wait_for_ui(std::chrono::milliseconds timeout) const;

  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::uint16_t port_ = 0;
  BandCoalescer coalescer_;
  std::chrono::steady_clock::time_point start_;

  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::vector<std::string> lines_;
  bool closed_ = false;
  bool ui_seen_ = false;
  std::size_t open_streams_ = 0;
  std::optional<PedalCommand> latest_;
  std::chrono::steady_clock::time_point last_command_;
  std::vector<std::pair<std::int64_t, PedalCommand>> commands_;
};

struct LiveOptions {
  std::filesystem::path config;
  spatnet::Endpoint ui_bind{"127.0.0.1", 8765};
  std::filesystem::path session_log{"live_session.csv"};
  std::filesystem::path commands_log{"live_commands.csv"};
  double pace = 1.0;  // simulated seconds per wall second
  std::chrono::milliseconds connect_timeout{30000};
  std::chrono::milliseconds heartbeat_timeout{3000};
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

struct LiveResult {
  std::filesystem::path session_log;
  std::size_t rows = 0;
  std::size_t commands = 0;
  bool ui_disconnected = false;
};

/// Runs the scenario against the wall clock with the UI in the driver's
/// seat. Without a heartbeat for heartbeat_timeout the UI counts as gone:
/// the truck brakes gently to a stop and the session ends. `on_ready` gets
/// the bound port once the bridge listens.
LiveResult run_live(const LiveOptions& options,
                    const std::function<void(std::uint16_t)>& on_ready = {});

/// Streams a logged run through a bridge, paced against the wall clock.
/// Waits for a UI first.
void replay_to_ui(const simtruck::TrajectoryLog& log, UiBridge& bridge, double pace,
                  std::chrono::milliseconds connect_timeout);

}  // namespace ecodrive::cli
