#include "streamsync/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "streamsync/wire.hpp"

namespace streamsync {

namespace {

sockaddr_in make_addr(const std::string& address, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, address.c_str(), &addr.sin_addr) != 1)
    throw std::runtime_error("invalid IPv4 address: " + address);
  return addr;
}

void set_recv_timeout(int fd, Duration timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout / 1_s);
  tv.tv_usec = static_cast<suseconds_t>((timeout % 1_s) / 1_us);
  setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
}

}  // namespace

Timestamp SteadyClock::now() const {
  const auto t = std::chrono::steady_clock::now().time_since_epoch();
  return Timestamp{std::chrono::duration_cast<std::chrono::nanoseconds>(t).count(), domain_};
}

LeaderServer::LeaderServer(const std::string& bind_address, std::uint16_t port, SteadyClock clock)
    : clock_(clock) {
  fd_ = socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw std::runtime_error("socket() failed");
  sockaddr_in addr = make_addr(bind_address, port);
  if (bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    close(fd_);
    throw std::runtime_error("bind failed on " + bind_address + ":" + std::to_string(port));
  }
  socklen_t len = sizeof addr;
  getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  set_recv_timeout(fd_, 100_ms);  // wake periodically to observe stop()
  thread_ = std::thread(&LeaderServer::serve_loop, this);
}

LeaderServer::~LeaderServer() { stop(); }

void LeaderServer::stop() {
  if (fd_ < 0) return;
  stopping_.store(true);
  if (thread_.joinable()) thread_.join();
  close(fd_);
  fd_ = -1;
}

void LeaderServer::serve_loop() {
  std::uint8_t buf[64];
  while (!stopping_.load()) {
    sockaddr_in peer{};
    socklen_t peer_len = sizeof peer;
    const ssize_t n =
        recvfrom(fd_, buf, sizeof buf, 0, reinterpret_cast<sockaddr*>(&peer), &peer_len);
    const Timestamp receive_time = clock_.now();
    if (n < 0) {
      if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
      break;
    }
    WireMessage message;
    try {
      message = decode(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
    } catch (const WireError&) {
      decode_errors_.fetch_add(1);
      continue;
    }
    const auto* probe = std::get_if<SyncProbe>(&message);
    if (probe == nullptr) {
      decode_errors_.fetch_add(1);  // replies are not valid requests
      continue;
    }
    SyncReply reply;
    reply.t0 = probe->t0;
    reply.t1 = receive_time.nanos;
    reply.t2 = clock_.now().nanos;
    const auto bytes = encode(reply);
    sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<sockaddr*>(&peer), peer_len);
    replies_sent_.fetch_add(1);
  }
}

UdpClientTransport::UdpClientTransport(const std::string& leader_address, std::uint16_t port,
                                       SteadyClock clock, Duration timeout)
    : clock_(clock), timeout_(timeout) {
  if (timeout <= 0) throw std::invalid_argument("timeout must be positive");
  fd_ = socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw std::runtime_error("socket() failed");
  sockaddr_in addr = make_addr(leader_address, port);
  if (connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    close(fd_);
    throw std::runtime_error("connect failed to " + leader_address + ":" + std::to_string(port));
  }
  set_recv_timeout(fd_, timeout_);
}

UdpClientTransport::~UdpClientTransport() {
  if (fd_ >= 0) close(fd_);
}

NtpSample UdpClientTransport::exchange() {
  // The initiator holds t0/t3; the remote end stamps t1/t2. Over loopback the
  // initiator is this process's client role, so theta estimates the leader
  // clock relative to it.
  const Timestamp t0 = clock_.now();
  const auto probe = encode(SyncProbe{t0.nanos});
  if (send(fd_, probe.data(), probe.size(), 0) != static_cast<ssize_t>(probe.size()))
    throw TransportTimeout("send failed");

  std::uint8_t buf[64];
  for (;;) {
    const ssize_t n = recv(fd_, buf, sizeof buf, 0);
    if (n < 0) {
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportTimeout("no reply from leader");
      if (errno == EINTR) continue;
      throw std::runtime_error("recv failed");
    }
    const Timestamp t3 = clock_.now();
    WireMessage message;
    try {
      message = decode(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
    } catch (const WireError&) {
      continue;  // counted as noise; keep waiting for a matching reply
    }
    const auto* reply = std::get_if<SyncReply>(&message);
    if (reply == nullptr || reply->t0 != t0.nanos) continue;  // stale or foreign
    NtpSample s;
    s.t0 = t0;
    s.t1 = Timestamp{reply->t1, leader_domain_};
    s.t2 = Timestamp{reply->t2, leader_domain_};
    s.t3 = t3;
    return s;
  }
}

}  // namespace streamsync
