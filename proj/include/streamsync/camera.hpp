#ifndef STREAMSYNC_CAMERA_HPP_
#define STREAMSYNC_CAMERA_HPP_

#include <deque>
#include <ostream>
#include <span>
#include <vector>

#include "streamsync/rng.hpp"
#include "streamsync/timebase.hpp"

namespace streamsync {

// Device-specific response to a high-priority long-exposure frame: injecting
// exposure e shifts the stream phase by period_multiple*T + gain*(e - T),
// plus Gaussian quantization noise. The ideal device has gain 1, multiple 1;
// the modeled handset has gain 2, multiple 2.
struct InjectionModel {
  double gain = 1.0;            // a
  int period_multiple = 1;      // k
  Duration scanline_quantum = 0;  // exposure granularity; 0 disables snapping
};

struct CameraConfig {
  Duration period = 33_ms;              // T
  Duration exposure = 100_us;           // streaming exposure
  Duration start_latency_min = 600_ms;  // S ~ Uniform[min, max]
  Duration start_latency_max = 800_ms;
  InjectionModel injection;
  Duration quantization_sigma = 0;      // injection shift noise stdev
};

struct FrameRecord {
  Timestamp start;  // local clock domain
  Duration exposure = 0;
  std::int64_t sequence = 0;
};

// Latched streaming camera: once started, frames tick exactly T apart in the
// local clock domain until a reset or an injected frame moves the phase.
class SimCamera {
 public:
  SimCamera(CameraConfig config, LocalClock clock);

  bool running() const { return running_; }
  const CameraConfig& config() const { return config_; }
  const LocalClock& clock() const { return clock_; }

  // Starts streaming; the first frame lands start-latency after reference_now.
  // Returns a preview of frame 0 (next_frame will still emit it).
  FrameRecord start_stream(Timestamp reference_now, Rng& rng);

  void stop_stream();

  // Stop, sleep Uniform(0, sleep_bound), restart. The resulting stream phase
  // is (U + S) mod T, which is near-uniform once sleep_bound dominates T.
  FrameRecord reset_with_sleep(Timestamp reference_now, Duration sleep_bound, Rng& rng);

  // Queues one high-priority frame with the given exposure (>= period) at the
  // next free slot. Returns the stream phase after the shift, i.e. the new
  // epoch modulo T in the local domain.
  Duration inject_frame(Duration exposure, Rng& rng);

  // Emits every frame with start <= until (local domain), in order.
  std::vector<FrameRecord> next_frame(Timestamp until_local);

  Duration stream_phase() const;        // epoch mod T after pending injections
  Timestamp next_start_local() const;   // start of the next unemitted frame
  std::int64_t next_sequence() const { return next_sequence_; }
  Duration last_cycle_elapsed() const { return last_cycle_elapsed_; }

 private:
  struct PendingInjection {
    Duration exposure = 0;  // snapped exposure of the long frame
    Duration step = 0;      // start-to-start advance that replaces one T step
  };

  void require_running() const;

  CameraConfig config_;
  LocalClock clock_;
  bool running_ = false;
  Timestamp next_start_;           // local domain
  std::int64_t next_sequence_ = 0;
  std::deque<PendingInjection> pending_;
  Duration last_cycle_elapsed_ = 0;  // sleep + start latency of the last (re)start
};

// CSV columns: sequence, local_start_ns, leader_domain_start_ns, exposure_ns.
// Leader-domain starts come from the estimate (identity for the leader's own
// frames).
void write_frames_csv(std::ostream& out, std::span<const FrameRecord> frames,
                      const ClockEstimate& estimate);

}  // namespace streamsync

#endif  // STREAMSYNC_CAMERA_HPP_
