// SPDX-License-Identifier: Apache-2.0
// Small POSIX TCP layer: blocking line streams for clients and a poll(2)-driven
// line server for the game and metrics ports.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

namespace meterstick::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  std::string to_string() const { return host + ":" + std::to_string(port); }
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

/// Parses "host:port"; throws meterstick::Error on malformed input.
Endpoint parse_endpoint(std::string_view text);

/// Owning file descriptor.
class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept;
  ~Fd() { reset(); }

  int get() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  void reset(int fd = -1) noexcept;
  int release() noexcept { return std::exchange(fd_, -1); }

 private:
  int fd_ = -1;
};

/// Blocking TCP connection with newline framing.
class TcpStream {
 public:
  TcpStream() = default;
  explicit TcpStream(Fd fd) : fd_(std::move(fd)) {}

  /// Connects or throws meterstick::Error (refused, unreachable, timeout).
  static TcpStream connect(const Endpoint& ep, std::chrono::milliseconds timeout = std::chrono::seconds(5));

  bool valid() const noexcept { return fd_.valid(); }
  int fd() const noexcept { return fd_.get(); }
  void close() { fd_.reset(); }

  /// Writes all bytes; returns false if the peer is gone.
  bool write_all(std::string_view data);
  bool write_line(std::string_view line);

  /// Next line without the trailing newline. nullopt on timeout; throws
  /// meterstick::Error on EOF or socket error.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);

  /// Non-blocking: a complete buffered line if one is available.
  std::optional<std::string> try_buffered_line();

  /// True once the peer has closed and the buffer is drained.
  bool eof() const noexcept { return eof_ && buffer_.empty(); }

 private:
  Fd fd_;
  std::string buffer_;
  bool eof_ = false;
};

/// Listening socket. Port 0 binds an ephemeral port.
class TcpListener {
 public:
  static TcpListener bind(const Endpoint& ep);

  std::uint16_t port() const noexcept { return port_; }
  int fd() const noexcept { return fd_.get(); }

  /// Accepts one connection, or nullopt after the timeout.
  std::optional<TcpStream> accept(std::chrono::milliseconds timeout);

 private:
  Fd fd_;
  std::uint16_t port_ = 0;
};

using ConnId = std::uint64_t;

/// Line-oriented multi-connection server on its own thread. Callbacks run on the
/// server thread; send()/close() may be called from any thread.
class LineServer {
 public:
  struct Handlers {
    std::function<void(ConnId)> on_open;
    std::function<void(ConnId, std::string_view)> on_line;
    std::function<void(ConnId)> on_close;
  };

  LineServer(const Endpoint& bind_to, Handlers handlers);
  LineServer(const LineServer&) = delete;
  LineServer& operator=(const LineServer&) = delete;
  ~LineServer();

  std::uint16_t port() const noexcept { return listener_.port(); }

  void send(ConnId id, std::string data);
  void send_many(std::vector<std::pair<ConnId, std::string>> batch);
  void close(ConnId id);
  void stop();

  /// Lines longer than this close the connection.
  static constexpr std::size_t kMaxLine = 64 * 1024;

 private:
  struct Conn {
    Fd fd;
    std::string in;
    std::string out;
    bool closing = false;
  };

  void run();
  void wake();

  TcpListener listener_;
  Handlers handlers_;
  Fd wake_read_;
  Fd wake_write_;
  std::mutex mu_;
  std::map<ConnId, std::string> pending_out_;
  std::vector<ConnId> pending_close_;
  std::atomic<bool> running_{true};
  ConnId next_id_ = 1;
  std::thread thread_;
};

}  // namespace meterstick::net
