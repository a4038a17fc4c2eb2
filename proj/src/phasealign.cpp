#include "streamsync/phasealign.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace streamsync {

PhaseOffset phase_offset(const Timestamp& ts, const Timestamp& goal, Duration period) {
  if (period <= 0) throw std::invalid_argument("period must be positive");
  const Duration diff = ts - goal;  // domain-checked
  PhaseOffset po;
  po.raw = floor_mod(diff, period);
  po.centered = po.raw * 2 > period ? po.raw - period : po.raw;
  return po;
}

int expected_reset_iterations(Duration tolerance, Duration period, double confidence) {
  if (tolerance <= 0 || tolerance >= period)
    throw std::invalid_argument("tolerance must be in (0, period)");
  if (confidence <= 0.0 || confidence >= 1.0)
    throw std::invalid_argument("confidence must be in (0, 1)");
  const double p = static_cast<double>(tolerance) / static_cast<double>(period);
  const double r = std::log(1.0 - confidence) / std::log(1.0 - p);
  return std::max(1, static_cast<int>(std::ceil(r)));
}

int expected_injection_iterations(Duration sigma, Duration tolerance, double confidence) {
  (void)confidence;  // the bound is stated at 95%
  if (tolerance <= 0) throw std::invalid_argument("tolerance must be positive");
  if (sigma < 0) throw std::invalid_argument("sigma must be nonnegative");
  const double s = static_cast<double>(sigma) / static_cast<double>(tolerance);
  return std::max(1, static_cast<int>(std::ceil(4.0 * s * s)));
}

Duration plan_injection_exposure(Duration delta_needed, const InjectionModel& model,
                                 Duration period) {
  if (period <= 0) throw std::invalid_argument("period must be positive");
  if (model.gain <= 0.0) throw std::invalid_argument("injection gain must be positive");
  const Duration delta = floor_mod(delta_needed, period);
  Duration exposure = period + static_cast<Duration>(
                                   std::llround(static_cast<double>(delta) / model.gain));
  const Duration quantum = model.scanline_quantum;
  if (quantum > 0) {
    exposure = ((exposure + quantum / 2) / quantum) * quantum;
    if (exposure < period) exposure += quantum;
  }
  return exposure;
}

namespace {

struct Measurement {
  Duration raw = 0;
  Duration centered = 0;
};

// Collects `count` stream frames with sequence >= min_sequence, advancing the
// reference cursor as needed, and returns their mean phase against the goal.
// Long (injected) frames are excluded: they start on the pre-shift grid and
// their exposure marks them in the frame metadata, so a controller never
// mistakes them for settled stream frames. In-simulation stream frames share
// one exact phase and the mean is a formality that mirrors how a device-side
// controller smooths timestamp jitter.
Measurement measure_phase(SimCamera& camera, const ClockEstimate& estimate,
                          const AlignConfig& config, std::int64_t min_sequence,
                          Timestamp& reference_cursor) {
  const Duration period = camera.config().period;
  const int count = std::max(1, config.measure_frames);
  std::vector<PhaseOffset> phases;
  while (static_cast<int>(phases.size()) < count) {
    reference_cursor = reference_cursor + period;
    for (const FrameRecord& f :
         camera.next_frame(camera.clock().read(reference_cursor))) {
      if (f.sequence < min_sequence) continue;
      if (f.exposure != camera.config().exposure) continue;
      const Timestamp in_leader = convert(f.start, estimate, config.goal_phase.domain);
      phases.push_back(phase_offset(in_leader, config.goal_phase, period));
    }
  }

  // Average around the most recent value so a wrap inside the window cannot
  // smear the mean across the 0/T seam.
  const std::size_t first = phases.size() - static_cast<std::size_t>(count);
  const Duration anchor = phases.back().raw;
  double acc = 0.0;
  for (std::size_t i = first; i < phases.size(); ++i) {
    Duration d = floor_mod(phases[i].raw - anchor, period);
    if (d * 2 > period) d -= period;
    acc += static_cast<double>(d);
  }
  Measurement m;
  m.raw = floor_mod(anchor + static_cast<Duration>(std::llround(acc / count)), period);
  m.centered = m.raw * 2 > period ? m.raw - period : m.raw;
  return m;
}

}  // namespace

AlignResult reset_sampling_align(SimCamera& camera, const AlignConfig& config,
                                 const ClockEstimate& estimate, Timestamp reference_now,
                                 Rng& rng) {
  const Duration period = camera.config().period;
  if (config.tolerance <= 0 || config.tolerance >= period / 2)
    throw std::invalid_argument("tolerance must be in (0, period/2)");
  const Duration accept = config.tolerance / 2;
  const int max_iterations =
      config.max_iterations > 0
          ? config.max_iterations
          : 3 * expected_reset_iterations(config.tolerance, period);

  AlignResult result;
  result.end_reference = reference_now;
  Measurement m = measure_phase(camera, estimate, config, 0, result.end_reference);
  result.trace.push_back(AlignStep{0, m.raw, m.centered, "start"});

  while (std::abs(m.centered) > accept && result.iterations < max_iterations) {
    camera.reset_with_sleep(result.end_reference, config.random_sleep_bound, rng);
    result.end_reference = result.end_reference + camera.last_cycle_elapsed();
    result.sim_elapsed += camera.last_cycle_elapsed();
    ++result.iterations;
    m = measure_phase(camera, estimate, config, 0, result.end_reference);
    result.trace.push_back(AlignStep{result.iterations, m.raw, m.centered, "reset"});
  }

  result.final_phase_error = m.centered;
  result.converged = std::abs(m.centered) <= accept;
  return result;
}

AlignResult frame_injection_align(SimCamera& camera, const AlignConfig& config,
                                  const ClockEstimate& estimate, Timestamp reference_now,
                                  Rng& rng) {
  const Duration period = camera.config().period;
  if (config.tolerance <= 0 || config.tolerance >= period / 2)
    throw std::invalid_argument("tolerance must be in (0, period/2)");
  const Duration accept = config.tolerance / 2;
  const int max_iterations = config.max_iterations > 0 ? config.max_iterations : 20;

  AlignResult result;
  result.end_reference = reference_now;
  Measurement m = measure_phase(camera, estimate, config, 0, result.end_reference);
  result.trace.push_back(AlignStep{0, m.raw, m.centered, "start"});

  while (std::abs(m.centered) > accept && result.iterations < max_iterations) {
    // Exposures only lengthen frames, so the plan always shifts forward.
    const Duration delta_needed = floor_mod(-m.raw, period);
    const Duration exposure =
        plan_injection_exposure(delta_needed, camera.config().injection, period);
    const std::int64_t injected_sequence = camera.next_sequence();
    camera.inject_frame(exposure, rng);
    ++result.iterations;
    result.sim_elapsed += config.injection_latency;
    result.end_reference = result.end_reference + config.injection_latency;
    m = measure_phase(camera, estimate, config, injected_sequence + 1, result.end_reference);
    result.trace.push_back(
        AlignStep{result.iterations, m.raw, m.centered, "inject:" + std::to_string(exposure)});
  }

  result.final_phase_error = m.centered;
  result.converged = std::abs(m.centered) <= accept;
  return result;
}

void write_align_trace_csv(std::ostream& out, std::span<const AlignStep> trace) {
  out << "iteration,raw_delta_ns,centered_error_ns,action\n";
  for (const AlignStep& s : trace)
    out << s.iteration << ',' << s.raw_delta << ',' << s.centered_error << ',' << s.action
        << '\n';
}

MisalignmentReport detect_misalignment(std::span<const FrameRecord> frames, const Timestamp& goal,
                                       Duration period, Duration tolerance) {
  if (frames.size() < 2)
    throw std::invalid_argument("detect_misalignment: need at least two frames");
  if (period <= 0) throw std::invalid_argument("period must be positive");

  MisalignmentReport report;
  for (const FrameRecord& f : frames) {
    const PhaseOffset po = phase_offset(f.start, goal, period);
    report.max_phase_error = std::max(report.max_phase_error, std::abs(po.centered));
    if (std::abs(po.centered) > tolerance) ++report.flagged_frames;
  }
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const Duration spacing = frames[i].start - frames[i - 1].start;
    const auto periods = std::max<Duration>(
        1, static_cast<Duration>(std::llround(static_cast<double>(spacing) /
                                              static_cast<double>(period))));
    if (spacing > period + period / 2) report.dropped_frames += static_cast<int>(periods - 1);
    report.max_period_deviation =
        std::max(report.max_period_deviation, std::abs(spacing - periods * period));
  }
  return report;
}

}  // namespace streamsync
