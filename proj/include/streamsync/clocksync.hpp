#ifndef STREAMSYNC_CLOCKSYNC_HPP_
#define STREAMSYNC_CLOCKSYNC_HPP_

#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "streamsync/netsim.hpp"
#include "streamsync/rng.hpp"
#include "streamsync/timebase.hpp"

namespace streamsync {

// Four-timestamp handshake. t0/t3 live in the initiator's (leader's) domain,
// t1/t2 in the responder's (client's) domain.
struct NtpSample {
  Timestamp t0;
  Timestamp t1;
  Timestamp t2;
  Timestamp t3;
};

struct OffsetDelay {
  Duration theta = 0;  // estimated client - leader offset
  Duration phi = 0;    // round-trip delay excluding remote processing
};

// theta = ((t1 - t0) + (t2 - t3)) / 2, phi = (t3 - t2) + (t1 - t0).
// Exact integer arithmetic; the single halving rounds half away from zero.
// Throws on per-domain ordering violations (t2 < t1 or t3 < t0).
OffsetDelay estimate_offset_delay(const NtpSample& sample);

struct FilterConfig {
  FilterKind kind = FilterKind::min;
  int sample_count = 300;                                    // K
  Duration outlier_threshold = 10_ms;                        // round-trip cutoff, mean filter
  std::optional<Duration> target_latency_threshold;          // min-filter early stop
  int max_transport_failures = 10;
};

class TransportTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One handshake against either the simulated link or a real socket.
class HandshakeTransport {
 public:
  virtual ~HandshakeTransport() = default;
  virtual NtpSample exchange() = 0;  // throws TransportTimeout on a lost round
};

// Simulated leader<->client link over a LatencyModel. The link owns a
// reference-time cursor that advances as messages transit, so a sequence of
// exchanges also yields the simulated wall time of the session.
class SimLink : public HandshakeTransport {
 public:
  struct OneWayLog {
    Duration out = 0;   // leader -> client transit of this exchange
    Duration back = 0;  // client -> leader transit
  };

  SimLink(const LatencyModel& model, LocalClock leader_clock, LocalClock client_clock,
          Timestamp start_reference, std::uint64_t seed,
          Duration processing_delay = 100_us, Duration inter_message_gap = 0);

  NtpSample exchange() override;

  Timestamp now_reference() const { return cursor_; }
  void set_now_reference(Timestamp t);
  const std::vector<OneWayLog>& latency_log() const { return latency_log_; }
  const LocalClock& leader_clock() const { return leader_clock_; }
  const LocalClock& client_clock() const { return client_clock_; }

 private:
  const LatencyModel& model_;
  LocalClock leader_clock_;
  LocalClock client_clock_;
  Timestamp cursor_;
  Rng rng_;
  Duration processing_delay_;
  Duration inter_message_gap_;
  std::vector<OneWayLog> latency_log_;
};

// Sample mean of theta over samples whose round trip survives the outlier
// threshold; also reports the surviving-sample variance. Throws if every
// sample is rejected.
ClockEstimate mean_filter(std::span<const NtpSample> samples, const FilterConfig& config);

// Theta of the sample with minimal round-trip delay; ties break toward the
// earliest sample. Throws on empty input.
ClockEstimate min_filter(std::span<const NtpSample> samples, const FilterConfig& config);

// K = ceil((sample_stdev / target_stdev)^2), from the 1/K variance law.
int required_samples_mean(Duration sample_stdev, Duration target_stdev);

struct SyncResult {
  ClockEstimate estimate;
  std::vector<NtpSample> samples;
  int timeouts = 0;
};

// Runs K exchanges (or stops early once the min filter sees a round trip at
// or below target_latency_threshold), then applies the configured filter.
SyncResult sync_client(HandshakeTransport& transport, const FilterConfig& config);

// CSV columns: t0,t1,t2,t3,theta,phi as integer nanoseconds.
void write_samples_csv(std::ostream& out, std::span<const NtpSample> samples);

}  // namespace streamsync

#endif  // STREAMSYNC_CLOCKSYNC_HPP_
