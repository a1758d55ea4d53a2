#pragma once

// TCP ping-pong used to measure (message size, delay) pairs.
//
// Wire protocol, one exchange:
//   client -> server: [len: u64 big-endian][payload: len bytes]
//   server -> client: [0x06]
// A frame with len == 0 ends the session.

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace commcost {

inline constexpr std::uint8_t kAckByte = 0x06;
inline constexpr std::size_t kPrefixBytes = 8;

std::array<std::uint8_t, kPrefixBytes> encode_length_prefix(std::uint64_t len) noexcept;
std::uint64_t decode_length_prefix(std::span<const std::uint8_t, kPrefixBytes> bytes) noexcept;

/// Owned socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  int release() noexcept;
  void reset() noexcept;

 private:
  int fd_ = -1;
};

struct ServerStats {
  std::uint64_t connections = 0;
  std::uint64_t frames = 0;         // non-terminating frames acknowledged
  std::uint64_t payload_bytes = 0;  // payload bytes read
  std::uint64_t prefix_bytes = 0;   // prefix bytes read, including the terminating frame
  std::uint64_t acks = 0;
  std::uint64_t resets = 0;         // connections dropped for protocol violations
};

/// Sequential accept loop: one connection is served to completion before the next.
class ProbeServer {
 public:
  /// Binds and listens.  Port 0 picks an ephemeral port.  Throws NetworkError.
  ProbeServer(std::uint16_t port, std::uint64_t p_max, const std::string& bind_address = "127.0.0.1");

  std::uint16_t port() const noexcept { return port_; }
  std::uint64_t p_max() const noexcept { return p_max_; }

  /// Runs until request_stop().  Safe to call request_stop() from another thread.
  void serve();
  void request_stop() noexcept { stop_.store(true); }

  ServerStats stats() const noexcept;

 private:
  void handle(Socket conn);

  Socket listener_;
  std::uint16_t port_ = 0;
  std::uint64_t p_max_;
  std::atomic<bool> stop_{false};

  std::atomic<std::uint64_t> connections_{0}, frames_{0}, payload_bytes_{0}, prefix_bytes_{0}, acks_{0}, resets_{0};
};

struct ProbeSample {
  std::uint64_t size_bytes;
  double rtt_seconds;
  double timestamp;  // seconds since the client connected
  std::uint64_t rep;
};

/// One connected client doing strictly sequential exchanges.
class ProbeClient {
 public:
  /// Throws NetworkError if the connection is not up within `connect_timeout`.
  ProbeClient(const std::string& host, std::uint16_t port,
              std::chrono::milliseconds connect_timeout = std::chrono::seconds(5),
              std::chrono::milliseconds io_timeout = std::chrono::seconds(30));
  ~ProbeClient();

  ProbeClient(const ProbeClient&) = delete;
  ProbeClient& operator=(const ProbeClient&) = delete;

  /// Sends one frame of `size_bytes` pseudorandom bytes and waits for the ack.
  /// Returns the round-trip time in seconds.  Throws NetworkError on failure.
  double exchange(std::uint64_t size_bytes);

  /// Sends the terminating zero-length frame and closes.
  void close();

  double elapsed() const;
  std::uint64_t bytes_sent() const noexcept { return bytes_sent_; }
  std::uint64_t bytes_received() const noexcept { return bytes_received_; }

 private:
  Socket sock_;
  std::chrono::milliseconds io_timeout_;
  std::chrono::steady_clock::time_point opened_;
  std::vector<std::uint8_t> buffer_;
  std::uint64_t bytes_sent_ = 0;
  std::uint64_t bytes_received_ = 0;
  std::uint64_t payload_seed_ = 0;
};

struct ProbeResult {
  std::vector<ProbeSample> samples;
  bool error = false;  // set when the connection failed mid-run; samples are partial
  std::string message;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
};

/// For each size: `warmup` untimed exchanges then `reps` timed ones.
/// Connect failures throw NetworkError; later failures return partial results.
ProbeResult probe(const std::string& host, std::uint16_t port, std::span<const std::uint64_t> sizes,
                  std::uint64_t reps, std::uint64_t warmup,
                  std::chrono::milliseconds connect_timeout = std::chrono::seconds(5));

/// Header `size_bytes,time_seconds,rep`.
void write_probe_csv(std::ostream& out, std::span<const ProbeSample> samples);

}  // namespace commcost
