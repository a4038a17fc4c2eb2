#ifndef STREAMSYNC_ORACLE_HPP_
#define STREAMSYNC_ORACLE_HPP_

#include <array>

#include "streamsync/rng.hpp"
#include "streamsync/timebase.hpp"

namespace streamsync {

// External reference panel: a fast 10-column sweep at tau per column and a
// slow 10-column sweep at 10*tau, encoding absolute time modulo 100*tau.
struct LedPanel {
  Duration tau = 200_us;
  static constexpr int fast_columns = 10;
  static constexpr int slow_columns = 10;
  double intensity_noise = 0.0;  // stdev of additive per-cell noise, as a
                                 // fraction of full-exposure intensity

  Duration slow_period() const { return 10 * tau; }
  Duration full_period() const { return 100 * tau; }
};

struct PanelState {
  int fast_column = 0;
  int slow_column = 0;
};

// Lit columns at reference time t: fast = floor(t/tau) mod 10,
// slow = floor(t/(10 tau)) mod 10.
PanelState panel_state(const LedPanel& panel, const Timestamp& t);

struct CaptureReading {
  int fast_column = 0;
  int slow_column = 0;
  double fast_fraction = 0.0;  // [0, 1) sub-column position of the exposure midpoint
};

// Simulates photographing the panel over [start, start + exposure]. Requires
// exposure < tau so partial illumination stays decodable. Without noise the
// reading carries the exact exposure midpoint; with intensity noise the
// per-cell on-times are perturbed and decoded back through the overlap
// centroid, degrading the fraction accordingly.
CaptureReading capture_reading(const LedPanel& panel, const Timestamp& exposure_start,
                               Duration exposure, Rng* noise_rng = nullptr);

// Panel time encoded by the reading: (slow*10 + fast + fraction) * tau, in
// [0, 100 tau).
Duration decoded_time(const LedPanel& panel, const CaptureReading& reading);

// Difference of decoded times, rewrapped to (-50 tau, 50 tau]. Captures a
// full panel period apart are inherently ambiguous; re-measure with another
// tau to disambiguate.
Duration measure_pair_error(const LedPanel& panel, const CaptureReading& a,
                            const CaptureReading& b);

// Ground-truth record of one synchronized capture, used to split the total
// error into clock-estimation and phase-alignment parts.
struct TrialLog {
  Duration true_theta = 0;       // client - leader clock offset, ns
  Duration estimated_theta = 0;  // filter output used during the trial
  Timestamp requested_local;     // capture request mapped into the client domain
  Timestamp actual_local;        // frame the client actually saved
  Duration oracle_pair_error = 0;  // signed client-minus-leader panel measurement
};

struct ErrorDecomposition {
  Duration signed_clock = 0;  // estimated_theta - true_theta
  Duration signed_phase = 0;  // actual - requested, client domain
  Duration signed_total = 0;  // oracle measurement
  Duration eps_clock = 0;     // magnitudes of the above
  Duration eps_phase = 0;
  Duration eps_total = 0;
  Duration residual = 0;      // signed_total - (signed_clock + signed_phase)
};

// Total error decomposes as clock error plus phase error; the residual is
// bounded by the oracle's decode quantization.
ErrorDecomposition decompose_error(const TrialLog& log);

}  // namespace streamsync

#endif  // STREAMSYNC_ORACLE_HPP_
