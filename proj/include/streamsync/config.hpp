#ifndef STREAMSYNC_CONFIG_HPP_
#define STREAMSYNC_CONFIG_HPP_

#include <cstdint>
#include <istream>
#include <optional>
#include <string>

#include "streamsync/camera.hpp"
#include "streamsync/clocksync.hpp"
#include "streamsync/netsim.hpp"
#include "streamsync/phasealign.hpp"
#include "streamsync/timebase.hpp"

namespace streamsync {

// Simulated trigger-latency distribution for the naive baselines: every
// device fires at command time plus an independent Gaussian delay.
struct NaiveConfig {
  std::string mode;     // wired | bluetooth | wifi
  Duration mean = 0;    // 0 = use the built-in per-mode default
  Duration stdev = 0;
};

// Everything a run needs; same config + seed reproduces identical outputs.
struct ExperimentConfig {
  int devices = 2;  // leader + N-1 clients
  int trials = 239;
  std::uint64_t seed = 1;
  int threads = 1;

  Duration clock_offset_spread = 50_ms;  // per-trial offsets ~ U(-spread, spread)
  double clock_drift_spread = 0.0;       // per-trial drift ~ U(-spread, spread)
  Duration processing_delay = 100_us;    // client turnaround t2 - t1

  CameraConfig camera;

  DirectionConfig latency_leader_to_client{517_us, 576_us};
  DirectionConfig latency_client_to_leader{479_us, 1359_us};
  double spike_probability = 0.01;
  Duration spike_scale = 4_ms;

  FilterConfig filter;
  bool sync_interleaved = false;   // per-message round robin instead of per-batch
  Duration resync_period = 0;      // re-run clock sync when a trial outlives this; 0 = off

  AlignMethod align_method = AlignMethod::frame_injection;
  Duration align_tolerance = 20_us;
  Duration align_sleep_bound = 1_s;
  int align_max_iterations = 0;    // 0 = method default
  Duration injection_latency = 300_ms;
  int measure_frames = 3;
  bool perturb_phase = true;       // undo alignment with a random long frame first

  Duration oracle_tau = 200_us;
  Duration oracle_exposure = 100_us;

  std::optional<NaiveConfig> naive;

  Duration phase_bin = 5_us;   // histogram bin widths
  Duration clock_bin = 10_us;
  Duration total_bin = 10_us;

  LatencyModel latency_model() const {
    return LatencyModel(latency_leader_to_client, latency_client_to_leader, spike_probability,
                        spike_scale);
  }
};

ExperimentConfig default_config();

// Flat key = value text; '#' starts a comment. Durations take ns/us/ms/s
// suffixes. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_string(const std::string& text);

void validate(const ExperimentConfig& config);

// "33ms" -> 33'000'000; accepts fractional values like "0.5s".
Duration parse_duration(const std::string& text);

}  // namespace streamsync

#endif  // STREAMSYNC_CONFIG_HPP_
