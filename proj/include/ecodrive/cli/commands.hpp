#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ecodrive/spatnet/channel.hpp"
#include "ecodrive/spatnet/socket.hpp"

namespace ecodrive::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFlagFailure = 1;
inline constexpr int kExitUsage = 2;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

struct AdvisorOverrides {
  std::optional<double> ttc_threshold_s;
  std::optional<double> staleness_s;
  std::optional<double> rate_hz;
};

int cmd_run(const std::filesystem::path& config, const std::filesystem::path& out_path,
            const GlobalOptions& global, const AdvisorOverrides& advisor, std::ostream& out, std::ostream& err);

struct CompareOptions {
  std::pair<double, double> window{2.0, 25.0};
  std::optional<std::filesystem::path> report_path;
  std::optional<std::filesystem::path> csv_path;
  /// Exit 1 when any verdict flag fails.
  bool check = false;
};

/// First log is the baseline run, second the eco run.
int cmd_compare(const std::filesystem::path& baseline, const std::filesystem::path& eco,
                const CompareOptions& options, std::ostream& out, std::ostream& err);

struct ReplayOptions {
  /// Serve the UI bridge here; without it the records go to `out`.
  std::optional<spatnet::Endpoint> ui_bind;
  double pace = 1.0;
  std::chrono::milliseconds connect_timeout{30000};
};

int cmd_replay(const std::filesystem::path& log, const ReplayOptions& options, std::ostream& out,
               std::ostream& err);

struct ServeOptions {
  std::filesystem::path config;
  spatnet::Endpoint bind{"127.0.0.1", 7000};
  std::optional<spatnet::Endpoint> ui_bind;
  double pace = 1.0;
  std::optional<double> duration_s;
};

/// Publishes the scenario's signal plans over TCP until its duration ends.
int cmd_serve(const ServeOptions& options, const GlobalOptions& global, std::ostream& out, std::ostream& err);

struct SubscribeOptions {
  spatnet::Endpoint connect{"127.0.0.1", 7000};
  spatnet::ChannelModel channel;
  std::optional<std::size_t> count;  // stop after this many deliveries
  double pace = 1.0;
};

/// Prints every SPaT message as delivered through the emulated channel,
/// prefixed by its delivery time in ms.
int cmd_subscribe(const SubscribeOptions& options, const GlobalOptions& global, std::ostream& out,
                  std::ostream& err);

/// Full command line: subcommands run, compare, live, replay, serve, subscribe.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ecodrive::cli
