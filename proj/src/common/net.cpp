// SPDX-License-Identifier: Apache-2.0
#include "meterstick/common/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "meterstick/common/error.hpp"

namespace meterstick::net {

namespace {

void set_nonblocking(int fd) {
  const int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (ep.host.empty() || ep.host == "0.0.0.0" || ep.host == "*") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    return addr;
  }
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw Error("cannot resolve host '" + ep.host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

int poll_ms(std::chrono::milliseconds timeout) {
  return static_cast<int>(std::max<std::int64_t>(0, timeout.count()));
}

}  // namespace

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon + 1 >= text.size()) {
    throw Error("endpoint '" + std::string(text) + "' is not host:port");
  }
  unsigned port = 0;
  const auto digits = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || port > 65535) {
    throw Error("endpoint '" + std::string(text) + "' has an invalid port");
  }
  Endpoint ep;
  ep.host = std::string(text.substr(0, colon));
  if (ep.host.empty()) ep.host = "127.0.0.1";
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

Fd& Fd::operator=(Fd&& o) noexcept {
  if (this != &o) reset(o.release());
  return *this;
}

void Fd::reset(int fd) noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = fd;
}

TcpStream TcpStream::connect(const Endpoint& ep, std::chrono::milliseconds timeout) {
  const sockaddr_in addr = resolve(ep);
  Fd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!fd.valid()) throw Error(std::string("socket: ") + std::strerror(errno));
  set_nonblocking(fd.get());
  set_nodelay(fd.get());

  int rc = ::connect(fd.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr));
  if (rc < 0 && errno != EINPROGRESS) {
    throw Error("connect " + ep.to_string() + ": " + std::strerror(errno));
  }
  if (rc < 0) {
    pollfd p{fd.get(), POLLOUT, 0};
    rc = ::poll(&p, 1, poll_ms(timeout));
    if (rc == 0) throw Error("connect " + ep.to_string() + ": timed out");
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) throw Error("connect " + ep.to_string() + ": " + std::strerror(err));
  }
  return TcpStream(std::move(fd));
}

bool TcpStream::write_all(std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd_.get(), data.data(), data.size(), MSG_NOSIGNAL);
    if (n > 0) {
      data.remove_prefix(static_cast<std::size_t>(n));
      continue;
    }
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
      pollfd p{fd_.get(), POLLOUT, 0};
      if (::poll(&p, 1, 5000) <= 0) return false;
      continue;
    }
    if (n < 0 && errno == EINTR) continue;
    return false;
  }
  return true;
}

bool TcpStream::write_line(std::string_view line) {
  std::string buf;
  buf.reserve(line.size() + 1);
  buf.append(line);
  buf.push_back('\n');
  return write_all(buf);
}

std::optional<std::string> TcpStream::try_buffered_line() {
  const auto nl = buffer_.find('\n');
  if (nl == std::string::npos) return std::nullopt;
  std::string line = buffer_.substr(0, nl);
  buffer_.erase(0, nl + 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::optional<std::string> TcpStream::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (auto line = try_buffered_line()) return line;
    if (eof_) throw Error("connection closed by peer");
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() < 0) return std::nullopt;
    pollfd p{fd_.get(), POLLIN, 0};
    const int rc = ::poll(&p, 1, poll_ms(left));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw Error(std::string("poll: ") + std::strerror(errno));
    if (rc == 0) return std::nullopt;
    char chunk[8192];
    const ssize_t n = ::recv(fd_.get(), chunk, sizeof(chunk), 0);
    if (n > 0) {
      buffer_.append(chunk, static_cast<std::size_t>(n));
    } else if (n == 0) {
      eof_ = true;
    } else if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
      eof_ = true;
      throw Error(std::string("recv: ") + std::strerror(errno));
    }
  }
}

TcpListener TcpListener::bind(const Endpoint& ep) {
  const sockaddr_in addr = resolve(ep);
  TcpListener l;
  l.fd_.reset(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!l.fd_.valid()) throw Error(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(l.fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(l.fd_.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) {
    throw Error("bind " + ep.to_string() + ": " + std::strerror(errno));
  }
  if (::listen(l.fd_.get(), 128) < 0) {
    throw Error("listen " + ep.to_string() + ": " + std::strerror(errno));
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(l.fd_.get(), reinterpret_cast<sockaddr*>(&bound), &len);
  l.port_ = ntohs(bound.sin_port);
  set_nonblocking(l.fd_.get());
  return l;
}

std::optional<TcpStream> TcpListener::accept(std::chrono::milliseconds timeout) {
  pollfd p{fd_.get(), POLLIN, 0};
  const int rc = ::poll(&p, 1, poll_ms(timeout));
  if (rc <= 0) return std::nullopt;
  const int c = ::accept4(fd_.get(), nullptr, nullptr, SOCK_CLOEXEC | SOCK_NONBLOCK);
  if (c < 0) return std::nullopt;
  set_nodelay(c);
  return TcpStream(Fd(c));
}

LineServer::LineServer(const Endpoint& bind_to, Handlers handlers)
    : listener_(TcpListener::bind(bind_to)), handlers_(std::move(handlers)) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC | O_NONBLOCK) < 0) {
    throw Error(std::string("pipe: ") + std::strerror(errno));
  }
  wake_read_.reset(fds[0]);
  wake_write_.reset(fds[1]);
  thread_ = std::thread([this] { run(); });
}

LineServer::~LineServer() { stop(); }

void LineServer::stop() {
  if (running_.exchange(false)) {
    wake();
  }
  if (thread_.joinable()) thread_.join();
}

void LineServer::wake() {
  const char b = 1;
  [[maybe_unused]] auto n = ::write(wake_write_.get(), &b, 1);
}

void LineServer::send(ConnId id, std::string data) {
  {
    std::lock_guard lock(mu_);
    pending_out_[id].append(data);
  }
  wake();
}

void LineServer::send_many(std::vector<std::pair<ConnId, std::string>> batch) {
  if (batch.empty()) return;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, data] : batch) pending_out_[id].append(data);
  }
  wake();
}

void LineServer::close(ConnId id) {
  {
    std::lock_guard lock(mu_);
    pending_close_.push_back(id);
  }
  wake();
}

void LineServer::run() {
  std::map<ConnId, Conn> conns;
  std::vector<pollfd> fds;
  std::vector<ConnId> ids;

  auto drop = [&](ConnId id) {
    auto it = conns.find(id);
    if (it == conns.end()) return;
    conns.erase(it);
    if (handlers_.on_close) handlers_.on_close(id);
  };

  while (running_.load()) {
    {
      std::lock_guard lock(mu_);
      for (auto& [id, data] : pending_out_) {
        auto it = conns.find(id);
        if (it != conns.end()) it->second.out.append(data);
      }
      pending_out_.clear();
      for (ConnId id : pending_close_) {
        auto it = conns.find(id);
        if (it != conns.end()) it->second.closing = true;
      }
      pending_close_.clear();
    }

    fds.clear();
    ids.clear();
    fds.push_back({wake_read_.get(), POLLIN, 0});
    fds.push_back({listener_.fd(), POLLIN, 0});
    for (auto& [id, c] : conns) {
      short ev = POLLIN;
      if (!c.out.empty()) ev |= POLLOUT;
      fds.push_back({c.fd.get(), ev, 0});
      ids.push_back(id);
    }

    // Flush opportunistically before sleeping so replies leave without a poll round trip.
    for (std::size_t i = 0; i < ids.size(); ++i) {
      Conn& c = conns[ids[i]];
      while (!c.out.empty()) {
        const ssize_t n = ::send(c.fd.get(), c.out.data(), c.out.size(), MSG_NOSIGNAL);
        if (n > 0) {
          c.out.erase(0, static_cast<std::size_t>(n));
        } else {
          break;
        }
      }
    }
    std::vector<ConnId> to_drop;
    for (auto& [id, c] : conns) {
      if (c.closing && c.out.empty()) to_drop.push_back(id);
    }
    for (ConnId id : to_drop) drop(id);
    if (!to_drop.empty()) continue;

    const int rc = ::poll(fds.data(), fds.size(), 200);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (fds[0].revents & POLLIN) {
      char buf[256];
      while (::read(wake_read_.get(), buf, sizeof(buf)) > 0) {
      }
    }
    if (fds[1].revents & POLLIN) {
      while (true) {
        const int c = ::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC | SOCK_NONBLOCK);
        if (c < 0) break;
        set_nodelay(c);
        const ConnId id = next_id_++;
        conns.emplace(id, Conn{Fd(c), {}, {}, false});
        if (handlers_.on_open) handlers_.on_open(id);
      }
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const short rev = fds[i + 2].revents;
      if (rev == 0) continue;
      const ConnId id = ids[i];
      auto it = conns.find(id);
      if (it == conns.end()) continue;
      Conn& c = it->second;
      bool dead = false;
      if (rev & (POLLIN | POLLHUP | POLLERR)) {
        char chunk[16384];
        while (true) {
          const ssize_t n = ::recv(c.fd.get(), chunk, sizeof(chunk), 0);
          if (n > 0) {
            c.in.append(chunk, static_cast<std::size_t>(n));
            continue;
          }
          if (n == 0 || (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR)) dead = true;
          break;
        }
        std::size_t start = 0;
        while (true) {
          const auto nl = c.in.find('\n', start);
          if (nl == std::string::npos) break;
          std::string_view line(c.in.data() + start, nl - start);
          if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
          if (handlers_.on_line) handlers_.on_line(id, line);
          start = nl + 1;
        }
        c.in.erase(0, start);
        if (c.in.size() > kMaxLine) dead = true;
      }
      if (!dead && (rev & POLLOUT)) {
        while (!c.out.empty()) {
          const ssize_t n = ::send(c.fd.get(), c.out.data(), c.out.size(), MSG_NOSIGNAL);
          if (n > 0) {
            c.out.erase(0, static_cast<std::size_t>(n));
          } else {
            if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) dead = true;
            break;
          }
        }
      }
      if (dead) drop(id);
    }
  }
  std::vector<ConnId> remaining;
  for (auto& [id, c] : conns) remaining.push_back(id);
  for (ConnId id : remaining) drop(id);
}

}  // namespace meterstick::net
