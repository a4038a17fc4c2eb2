#ifndef STREAMSYNC_PHASEALIGN_HPP_
#define STREAMSYNC_PHASEALIGN_HPP_

#include <span>
#include <string>
#include <vector>

#include "streamsync/camera.hpp"
#include "streamsync/rng.hpp"
#include "streamsync/timebase.hpp"

namespace streamsync {

enum class AlignMethod { reset_sampling, frame_injection };

inline const char* to_string(AlignMethod m) {
  return m == AlignMethod::reset_sampling ? "reset_sampling" : "frame_injection";
}

struct AlignConfig {
  Duration tolerance = 20_us;          // epsilon
  Duration random_sleep_bound = 1_s;   // L, reset sampling
  int max_iterations = 0;              // 0 = default (3*R resets, 20 injections)
  AlignMethod method = AlignMethod::frame_injection;
  Timestamp goal_phase;                // leader domain
  int measure_frames = 3;              // phase = mean of the last N frames
  Duration injection_latency = 300_ms; // wall cost per injected frame
};

// Stream-vs-goal phase. raw is (ts - goal) mod T in [0, T); centered rewraps
// it to (-T/2, T/2] for error reporting.
struct PhaseOffset {
  Duration raw = 0;
  Duration centered = 0;
};

PhaseOffset phase_offset(const Timestamp& ts, const Timestamp& goal, Duration period);

// R = ceil(log(1 - confidence) / log(1 - tolerance/period)): resets needed
// for the geometric acceptance to succeed with the given confidence.
int expected_reset_iterations(Duration tolerance, Duration period, double confidence = 0.95);

// max(1, ceil(4 sigma^2 / epsilon^2)): injection iterations for 95% success
// under Gaussian shift noise.
int expected_injection_iterations(Duration sigma, Duration tolerance, double confidence = 0.95);

// e = T + delta/gain, snapped to the scanline quantum: the exposure whose
// modeled shift is congruent to delta (mod T) up to quantization.
Duration plan_injection_exposure(Duration delta_needed, const InjectionModel& model,
                                 Duration period);

struct AlignStep {
  int iteration = 0;
  Duration raw_delta = 0;
  Duration centered_error = 0;
  std::string action;  // "reset" or "inject:<exposure_ns>"
};

struct AlignResult {
  int iterations = 0;
  Duration final_phase_error = 0;  // centered, (-T/2, T/2]
  bool converged = false;
  std::vector<AlignStep> trace;
  Duration sim_elapsed = 0;        // simulated wall time spent aligning
  Timestamp end_reference;         // reference-time cursor after alignment
};

// Both aligners measure stream phase in the leader domain through the given
// clock estimate and accept when |centered error| <= tolerance/2, making the
// per-attempt acceptance probability exactly tolerance/period for a uniform
// phase. The raw [0, T) offset is kept in the trace for both conventions.
AlignResult reset_sampling_align(SimCamera& camera, const AlignConfig& config,
                                 const ClockEstimate& estimate, Timestamp reference_now,
                                 Rng& rng);

AlignResult frame_injection_align(SimCamera& camera, const AlignConfig& config,
                                  const ClockEstimate& estimate, Timestamp reference_now,
                                  Rng& rng);

void write_align_trace_csv(std::ostream& out, std::span<const AlignStep> trace);

struct MisalignmentReport {
  Duration max_phase_error = 0;       // largest |centered| offset seen
  int flagged_frames = 0;             // frames whose |centered| error exceeds tolerance
  int dropped_frames = 0;             // gaps wider than 1.5 periods
  Duration max_period_deviation = 0;  // largest |spacing - T| over consecutive frames
};

// Scans leader-domain frame timestamps for phase drift, drops, and period
// deviations. Requires at least two frames.
MisalignmentReport detect_misalignment(std::span<const FrameRecord> frames, const Timestamp& goal,
                                       Duration period, Duration tolerance);

}  // namespace streamsync

#endif  // STREAMSYNC_PHASEALIGN_HPP_
