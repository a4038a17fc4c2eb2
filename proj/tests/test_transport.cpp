#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "doctest.h"
#include "streamsync/transport.hpp"

using namespace streamsync;

TEST_CASE("loopback handshake yields ordered timestamps and small offsets") {
  LeaderServer server("127.0.0.1", 0, SteadyClock(ClockDomain::leader()));
  UdpClientTransport client("127.0.0.1", server.port(), SteadyClock(ClockDomain::client(1)),
                            500_ms);
  for (int i = 0; i < 20; ++i) {
    const NtpSample s = client.exchange();
    CHECK(s.t2.nanos >= s.t1.nanos);
    CHECK(s.t3.nanos >= s.t0.nanos);
    const OffsetDelay od = estimate_offset_delay(s);
    // Same physical clock on both ends: the offset is bounded by transit.
    CHECK(std::abs(od.theta) < 1_ms);
    CHECK(od.phi > 0);
  }
}

TEST_CASE("malformed datagrams are counted and skipped, probes still served") {
  LeaderServer server("127.0.0.1", 0, SteadyClock(ClockDomain::leader()));

  const int fd = socket(AF_INET, SOCK_DGRAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(server.port());
  inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  const char junk[] = "not a probe";
  sendto(fd, junk, sizeof junk, 0, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  close(fd);

  UdpClientTransport client("127.0.0.1", server.port(), SteadyClock(ClockDomain::client(1)),
                            500_ms);
  const NtpSample s = client.exchange();
  CHECK(s.t3.nanos >= s.t0.nanos);
  server.stop();
  CHECK(server.decode_errors() >= 1);
  CHECK(server.replies_sent() >= 1);
}

TEST_CASE("the stateless server handles concurrent clients") {
  LeaderServer server("127.0.0.1", 0, SteadyClock(ClockDomain::leader()));
  std::atomic<int> completed{0};
  std::vector<std::thread> clients;
  for (int c = 1; c <= 3; ++c) {
    clients.emplace_back([&, c] {
      UdpClientTransport transport("127.0.0.1", server.port(),
                                   SteadyClock(ClockDomain::client(c)), 1_s);
      for (int i = 0; i < 50; ++i) {
        const NtpSample s = transport.exchange();
        if (s.t3.nanos >= s.t0.nanos && s.t2.nanos >= s.t1.nanos) completed.fetch_add(1);
      }
    });
  }
  for (auto& t : clients) t.join();
  CHECK(completed.load() == 150);
  server.stop();
  CHECK(server.replies_sent() >= 150);
}

TEST_CASE("timeouts surface as TransportTimeout") {
  // 203.0.113.0/24 is reserved for documentation; nothing answers there.
  UdpClientTransport client("203.0.113.1", 9, SteadyClock(ClockDomain::client(1)), 50_ms);
  CHECK_THROWS_AS(client.exchange(), TransportTimeout);
}

TEST_CASE("a 300-exchange loopback session min-filters below the mean") {
  LeaderServer server("127.0.0.1", 0, SteadyClock(ClockDomain::leader()));
  UdpClientTransport client("127.0.0.1", server.port(), SteadyClock(ClockDomain::client(1)),
                            500_ms);
  FilterConfig config;
  config.sample_count = 300;
  const SyncResult r = sync_client(client, config);
  REQUIRE(r.samples.size() == 300);

  double mean_phi = 0.0;
  for (const NtpSample& s : r.samples)
    mean_phi += static_cast<double>(estimate_offset_delay(s).phi);
  mean_phi /= static_cast<double>(r.samples.size());
  CHECK(static_cast<double>(r.estimate.phi) <= mean_phi);
  CHECK(r.estimate.phi >= 0);
}
