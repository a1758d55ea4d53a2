#include "commcost/netprobe.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "commcost/errors.hpp"
#include "commcost/rng.hpp"

namespace commcost {

namespace {

using Clock = std::chrono::steady_clock;

constexpr int kPollSliceMs = 100;
constexpr std::size_t kChunk = 64 * 1024;

std::string errno_text() { return std::strerror(errno); }

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

// Hard close: the peer sees a connection reset instead of an orderly FIN.
void abort_connection(Socket& s) {
  linger lg{1, 0};
  ::setsockopt(s.fd(), SOL_SOCKET, SO_LINGER, &lg, sizeof(lg));
  s.reset();
}

enum class IoStatus { ok, closed, stopped, timeout, failed };

// Reads exactly buf.size() bytes.  `stop` may be null.
IoStatus read_exact(int fd, std::span<std::uint8_t> buf, const std::atomic<bool>* stop,
                    std::chrono::milliseconds timeout) {
  std::size_t got = 0;
  const auto deadline = Clock::now() + timeout;
  while (got < buf.size()) {
    pollfd pfd{fd, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, kPollSliceMs);
    if (rc < 0) {
      if (errno == EINTR) continue;
      return IoStatus::failed;
    }
    if (stop && stop->load()) return IoStatus::stopped;
    if (rc == 0) {
      if (Clock::now() > deadline) return IoStatus::timeout;
      continue;
    }
    const ssize_t n = ::recv(fd, buf.data() + got, buf.size() - got, 0);
    if (n == 0) return IoStatus::closed;
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return IoStatus::failed;
    }
    got += static_cast<std::size_t>(n);
  }
  return IoStatus::ok;
}

bool write_all(int fd, std::span<const std::uint8_t> buf) {
  std::size_t sent = 0;
  while (sent < buf.size()) {
    const ssize_t n = ::send(fd, buf.data() + sent, buf.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

std::array<std::uint8_t, kPrefixBytes> encode_length_prefix(std::uint64_t len) noexcept {
  std::array<std::uint8_t, kPrefixBytes> out{};
  for (std::size_t i = 0; i < kPrefixBytes; ++i) out[i] = static_cast<std::uint8_t>(len >> (8 * (kPrefixBytes - 1 - i)));
  return out;
}

std::uint64_t decode_length_prefix(std::span<const std::uint8_t, kPrefixBytes> bytes) noexcept {
  std::uint64_t len = 0;
  for (auto b : bytes) len = (len << 8) | b;
  return len;
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    reset();
    fd_ = other.release();
  }
  return *this;
}

Socket::~Socket() { reset(); }

int Socket::release() noexcept {
  const int fd = fd_;
  fd_ = -1;
  return fd;
}

void Socket::reset() noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

// ---- server ----------------------------------------------------------------

ProbeServer::ProbeServer(std::uint16_t port, std::uint64_t p_max, const std::string& bind_address) : p_max_(p_max) {
  if (p_max_ == 0) throw ParameterError("p_max must be >= 1 byte");
  listener_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
  if (!listener_.valid()) throw NetworkError("socket(): " + errno_text());
  int one = 1;
  ::setsockopt(listener_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr) != 1)
    throw NetworkError(fmt::format("invalid bind address '{}'", bind_address));
  if (::bind(listener_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
    throw NetworkError(fmt::format("bind {}:{}: {}", bind_address, port, errno_text()));
  if (::listen(listener_.fd(), 4) != 0) throw NetworkError("listen(): " + errno_text());

  socklen_t len = sizeof(addr);
  ::getsockname(listener_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

ServerStats ProbeServer::stats() const noexcept {
  return ServerStats{connections_.load(), frames_.load(), payload_bytes_.load(),
                     prefix_bytes_.load(), acks_.load(),   resets_.load()};
}

void ProbeServer::serve() {
  while (!stop_.load()) {
    pollfd pfd{listener_.fd(), POLLIN, 0};
    const int rc = ::poll(&pfd, 1, kPollSliceMs);
    if (rc < 0 && errno != EINTR) throw NetworkError("poll(): " + errno_text());
    if (rc <= 0) continue;
    Socket conn(::accept(listener_.fd(), nullptr, nullptr));
    if (!conn.valid()) continue;
    connections_.fetch_add(1);
    handle(std::move(conn));
  }
}

void ProbeServer::handle(Socket conn) {
  set_nodelay(conn.fd());
  std::vector<std::uint8_t> sink(kChunk);
  // an idle peer is allowed to sit between exchanges
  constexpr auto idle = std::chrono::hours(24);
  for (;;) {
    std::array<std::uint8_t, kPrefixBytes> prefix{};
    const auto st = read_exact(conn.fd(), prefix, &stop_, idle);
    if (st != IoStatus::ok) {
      if (st == IoStatus::closed) std::cerr << "probe server: peer closed without a terminating frame\n";
      return;
    }
    prefix_bytes_.fetch_add(kPrefixBytes);
    const std::uint64_t len = decode_length_prefix(prefix);
    if (len == 0) return;  // clean shutdown
    if (len > p_max_) {
      std::cerr << fmt::format("probe server: frame of {} bytes exceeds p_max {}; resetting\n", len, p_max_);
      resets_.fetch_add(1);
      abort_connection(conn);
      return;
    }
    std::uint64_t remaining = len;
    while (remaining > 0) {
      const std::size_t chunk = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, sink.size()));
      if (read_exact(conn.fd(), std::span(sink.data(), chunk), &stop_, std::chrono::seconds(30)) != IoStatus::ok) {
        std::cerr << "probe server: connection lost mid-payload\n";
        resets_.fetch_add(1);
        abort_connection(conn);
        return;
      }
      payload_bytes_.fetch_add(chunk);
      remaining -= chunk;
    }
    const std::uint8_t ack = kAckByte;
    if (!write_all(conn.fd(), std::span(&ack, 1))) return;
    frames_.fetch_add(1);
    acks_.fetch_add(1);
  }
}

// ---- client ----------------------------------------------------------------

ProbeClient::ProbeClient(const std::string& host, std::uint16_t port, std::chrono::milliseconds connect_timeout,
                         std::chrono::milliseconds io_timeout)
    : io_timeout_(io_timeout) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const auto service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
    throw NetworkError(fmt::format("resolve {}: {}", host, ::gai_strerror(rc)));
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr && !sock_.valid(); ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) continue;
    const int flags = ::fcntl(s.fd(), F_GETFL, 0);
    ::fcntl(s.fd(), F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(s.fd(), ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      pollfd pfd{s.fd(), POLLOUT, 0};
      rc = ::poll(&pfd, 1, static_cast<int>(connect_timeout.count()));
      if (rc == 0) {
        last_error = "connect timed out";
        continue;
      }
      int err = 0;
      socklen_t len = sizeof(err);
      ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      if (err != 0) errno = err;
    }
    if (rc != 0) {
      last_error = errno_text();
      continue;
    }
    ::fcntl(s.fd(), F_SETFL, flags);
    set_nodelay(s.fd());
    sock_ = std::move(s);
  }
  ::freeaddrinfo(res);
  if (!sock_.valid()) throw NetworkError(fmt::format("connect {}:{}: {}", host, port, last_error));
  opened_ = Clock::now();
}

ProbeClient::~ProbeClient() {
  try {
    close();
  } catch (...) {
  }
}

double ProbeClient::exchange(std::uint64_t size_bytes) {
  if (!sock_.valid()) throw NetworkError("probe client is closed");
  if (size_bytes == 0) throw ParameterError("probe size must be >= 1 byte");
  const std::size_t frame = kPrefixBytes + static_cast<std::size_t>(size_bytes);
  buffer_.resize(frame);
  const auto prefix = encode_length_prefix(size_bytes);
  std::copy(prefix.begin(), prefix.end(), buffer_.begin());
  // fresh pseudorandom payload each time so nothing on the path can cache or compress it
  CounterRng rng(derive_key({0x70726f6265, payload_seed_++}));
  for (std::size_t i = kPrefixBytes; i < frame; i += 8) {
    const auto word = rng();
    for (std::size_t j = 0; j < 8 && i + j < frame; ++j) buffer_[i + j] = static_cast<std::uint8_t>(word >> (8 * j));
  }

  const auto start = Clock::now();
  if (!write_all(sock_.fd(), buffer_)) {
    sock_.reset();
    throw NetworkError("send failed: " + errno_text());
  }
  bytes_sent_ += frame;
  std::array<std::uint8_t, 1> ack{};
  const auto st = read_exact(sock_.fd(), ack, nullptr, io_timeout_);
  const auto stop = Clock::now();
  if (st != IoStatus::ok) {
    sock_.reset();
    throw NetworkError(st == IoStatus::timeout ? "timed out waiting for ack" : "connection lost waiting for ack");
  }
  bytes_received_ += 1;
  if (ack[0] != kAckByte) {
    sock_.reset();
    throw NetworkError(fmt::format("unexpected ack byte 0x{:02x}", ack[0]));
  }
  return std::chrono::duration<double>(stop - start).count();
}

void ProbeClient::close() {
  if (!sock_.valid()) return;
  const auto prefix = encode_length_prefix(0);
  if (write_all(sock_.fd(), prefix)) bytes_sent_ += kPrefixBytes;
  sock_.reset();
}

double ProbeClient::elapsed() const { return std::chrono::duration<double>(Clock::now() - opened_).count(); }

ProbeResult probe(const std::string& host, std::uint16_t port, std::span<const std::uint64_t> sizes,
                  std::uint64_t reps, std::uint64_t warmup, std::chrono::milliseconds connect_timeout) {
  for (auto s : sizes)
    if (s == 0) throw ParameterError("probe sizes must be >= 1 byte");
  ProbeResult result;
  if (reps == 0) return result;

  ProbeClient client(host, port, connect_timeout);
  try {
    for (auto size : sizes) {
      for (std::uint64_t w = 0; w < warmup; ++w) client.exchange(size);
      for (std::uint64_t r = 0; r < reps; ++r) {
        const double rtt = client.exchange(size);
        result.samples.push_back(ProbeSample{size, rtt, client.elapsed(), r});
      }
    }
    client.close();
  } catch (const NetworkError& e) {
    result.error = true;
    result.message = e.what();
  }
  result.bytes_sent = client.bytes_sent();
  result.bytes_received = client.bytes_received();
  return result;
}

void write_probe_csv(std::ostream& out, std::span<const ProbeSample> samples) {
  out << "size_bytes,time_seconds,rep\n";
  for (const auto& s : samples) fmt::print(out, "{},{},{}\n", s.size_bytes, s.rtt_seconds, s.rep);
}

}  // namespace commcost
