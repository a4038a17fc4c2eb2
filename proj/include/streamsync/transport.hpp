#ifndef STREAMSYNC_TRANSPORT_HPP_
#define STREAMSYNC_TRANSPORT_HPP_

#include <atomic>
#include <cstdint>
#include <string>
#include <thread>

#include "streamsync/clocksync.hpp"
#include "streamsync/timebase.hpp"

namespace streamsync {

// Monotonic wall clock read into a protocol domain; timestamps are taken as
// close to the socket boundary as the platform allows.
class SteadyClock {
 public:
  explicit SteadyClock(ClockDomain domain) : domain_(domain) {}
  Timestamp now() const;
  ClockDomain domain() const { return domain_; }

 private:
  ClockDomain domain_;
};

// Stateless UDP responder: answers each SyncProbe with a SyncReply carrying
// (t0, receive time, send time) from its local clock. Malformed datagrams
// are counted and skipped, never fatal.
class LeaderServer {
 public:
  LeaderServer(const std::string& bind_address, std::uint16_t port, SteadyClock clock);
  ~LeaderServer();

  LeaderServer(const LeaderServer&) = delete;
  LeaderServer& operator=(const LeaderServer&) = delete;

  std::uint16_t port() const { return port_; }
  std::uint64_t replies_sent() const { return replies_sent_.load(); }
  std::uint64_t decode_errors() const { return decode_errors_.load(); }
  void stop();

 private:
  void serve_loop();

  int fd_ = -1;
  std::uint16_t port_ = 0;
  SteadyClock clock_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> replies_sent_{0};
  std::atomic<std::uint64_t> decode_errors_{0};
  std::thread thread_;
};

// One probe/reply handshake over UDP. The initiator holds t0 and t3 in its
// own clock domain. Throws TransportTimeout when no matching reply arrives
// within the timeout.
class UdpClientTransport : public HandshakeTransport {
 public:
  UdpClientTransport(const std::string& leader_address, std::uint16_t port, SteadyClock clock,
                     Duration timeout = 1_s);
  ~UdpClientTransport() override;

  UdpClientTransport(const UdpClientTransport&) = delete;
  UdpClientTransport& operator=(const UdpClientTransport&) = delete;

  NtpSample exchange() override;

 private:
  int fd_ = -1;
  SteadyClock clock_;
  ClockDomain leader_domain_ = ClockDomain::leader();
  Duration timeout_;
};

}  // namespace streamsync

#endif  // STREAMSYNC_TRANSPORT_HPP_
