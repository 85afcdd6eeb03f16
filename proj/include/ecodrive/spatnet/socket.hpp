#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace ecodrive::spatnet {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// Parses "host:port" (or ":port" / "port" for loopback).
  static Endpoint parse(std::string_view text);
  std::string to_string() const;
};

/// Owning POSIX socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close();
  /// Half-closes both directions so a thread blocked in recv wakes up.
  void shutdown();

 private:
  int fd_ = -1;
};

Socket listen_tcp(const Endpoint& ep, int backlog = 16);
std::uint16_t local_port(const Socket& s);
Socket connect_tcp(const Endpoint& ep);

/// Waits up to `timeout` for a pending connection; nullopt on timeout.
std::optional<Socket> accept_with_timeout(const Socket& listener, std::chrono::milliseconds timeout);

/// Writes everything or returns false (peer gone). Never raises SIGPIPE.
bool send_all(const Socket& s, std::string_view data);

/// Buffered newline-delimited reader.
class LineReader {
 public:
  explicit LineReader(const Socket& s) : socket_(&s) {}

  /// Next line without its terminator; nullopt when the peer closed.
  std::optional<std::string> read_line();

  /// Like read_line but gives up after `timeout` with an empty optional and
  /// timed_out() == true.
  std::optional<std::string> read_line_for(std::chrono::milliseconds timeout);
  bool timed_out() const { return timed_out_; }

 private:
  std::optional<std::string> take_line();

  const Socket* socket_;
  std::string buffer_;
  bool timed_out_ = false;
};

}  // namespace ecodrive::spatnet
