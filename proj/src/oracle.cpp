#include "streamsync/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace streamsync {

namespace {

void require_reference(const Timestamp& t, const char* what) {
  if (!t.domain.is_reference())
    throw DomainMismatch(std::string(what) + " expects a reference-domain timestamp, got " +
                         t.domain.name());
}

CaptureReading reading_from_panel_time(const LedPanel& panel, double panel_time) {
  const double tau = static_cast<double>(panel.tau);
  const double full = static_cast<double>(panel.full_period());
  double wrapped = std::fmod(panel_time, full);
  if (wrapped < 0.0) wrapped += full;
  const double columns = wrapped / tau;  // [0, 100)
  CaptureReading r;
  const int index = std::min(99, static_cast<int>(columns));
  r.fast_column = index % LedPanel::fast_columns;
  r.slow_column = index / LedPanel::fast_columns;
  r.fast_fraction = std::clamp(columns - static_cast<double>(index), 0.0, 1.0 - 1e-12);
  return r;
}

}  // namespace

PanelState panel_state(const LedPanel& panel, const Timestamp& t) {
  if (panel.tau <= 0) throw std::invalid_argument("panel tau must be positive");
  require_reference(t, "panel_state");
  PanelState s;
  s.fast_column = static_cast<int>(floor_mod(floor_div(t.nanos, panel.tau), LedPanel::fast_columns));
  s.slow_column =
      static_cast<int>(floor_mod(floor_div(t.nanos, panel.slow_period()), LedPanel::slow_columns));
  return s;
}

CaptureReading capture_reading(const LedPanel& panel, const Timestamp& exposure_start,
                               Duration exposure, Rng* noise_rng) {
  if (panel.tau <= 0) throw std::invalid_argument("panel tau must be positive");
  require_reference(exposure_start, "capture_reading");
  if (exposure < 0) throw std::invalid_argument("exposure must be nonnegative");
  if (exposure >= panel.tau)
    throw std::invalid_argument("exposure must be shorter than tau for unambiguous decoding");

  const Duration start = exposure_start.nanos;
  const double midpoint = static_cast<double>(start) + static_cast<double>(exposure) / 2.0;

  if (panel.intensity_noise <= 0.0 || noise_rng == nullptr)
    return reading_from_panel_time(panel, midpoint);

  // Noisy path: accumulate per-column on-times over the window, perturb them
  // like pixel readings, then decode with the two-cell overlap centroid.
  const Duration tau = panel.tau;
  const Duration first_column = floor_div(start, tau);
  std::array<double, 2> on_time = {0.0, 0.0};  // first column, next column
  const Duration boundary = (first_column + 1) * tau;
  on_time[0] = static_cast<double>(std::min(exposure, boundary - start));
  on_time[1] = static_cast<double>(exposure) - on_time[0];

  const double scale = std::max<double>(1.0, static_cast<double>(exposure));
  for (double& v : on_time) {
    v += gaussian(*noise_rng, 0.0, panel.intensity_noise * scale);
    v = std::max(0.0, v);
  }

  double estimate;
  if (on_time[1] > 0.0 && on_time[0] > 0.0) {
    // Window straddles the boundary: midpoint = boundary - e/2 + next on-time.
    estimate = static_cast<double>(boundary) - static_cast<double>(exposure) / 2.0 + on_time[1];
  } else if (on_time[1] > 0.0) {
    estimate = static_cast<double>(boundary) + on_time[1] / 2.0;
  } else {
    // Fully inside one column: intensities cannot localize further than the
    // feasible interval's center.
    estimate = static_cast<double>(first_column * tau) + static_cast<double>(tau) / 2.0;
  }
  return reading_from_panel_time(panel, estimate);
}

Duration decoded_time(const LedPanel& panel, const CaptureReading& reading) {
  const double columns = static_cast<double>(reading.slow_column) * LedPanel::fast_columns +
                         static_cast<double>(reading.fast_column) + reading.fast_fraction;
  return static_cast<Duration>(std::llround(columns * static_cast<double>(panel.tau)));
}

Duration measure_pair_error(const LedPanel& panel, const CaptureReading& a,
                            const CaptureReading& b) {
  const Duration full = panel.full_period();
  Duration diff = floor_mod(decoded_time(panel, a) - decoded_time(panel, b), full);
  if (diff * 2 > full) diff -= full;
  return diff;
}

ErrorDecomposition decompose_error(const TrialLog& log) {
  if (log.requested_local.domain != log.actual_local.domain)
    throw DomainMismatch(log.requested_local.domain, log.actual_local.domain);
  ErrorDecomposition d;
  d.signed_clock = log.estimated_theta - log.true_theta;
  d.signed_phase = log.actual_local - log.requested_local;
  d.signed_total = log.oracle_pair_error;
  d.eps_clock = std::abs(d.signed_clock);
  d.eps_phase = std::abs(d.signed_phase);
  d.eps_total = std::abs(d.signed_total);
  d.residual = d.signed_total - (d.signed_clock + d.signed_phase);
  return d;
}

}  // namespace streamsync
