#include "streamsync/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace streamsync {

SimCamera::SimCamera(CameraConfig config, LocalClock clock)
    : config_(config), clock_(clock), next_start_{0, clock.domain()} {
  if (config_.period <= 0) throw std::invalid_argument("camera period must be positive");
  if (config_.exposure <= 0 || config_.exposure > config_.period)
    throw std::invalid_argument("camera exposure must be in (0, period]");
  if (config_.start_latency_min < 0 || config_.start_latency_max < config_.start_latency_min)
    throw std::invalid_argument("invalid start latency range");
  if (config_.injection.gain <= 0.0) throw std::invalid_argument("injection gain must be positive");
  if (config_.injection.period_multiple < 1)
    throw std::invalid_argument("injection period multiple must be >= 1");
  if (config_.injection.scanline_quantum < 0 || config_.quantization_sigma < 0)
    throw std::invalid_argument("quantization parameters must be nonnegative");
}

void SimCamera::require_running() const {
  if (!running_) throw std::logic_error("camera is not streaming");
}

FrameRecord SimCamera::start_stream(Timestamp reference_now, Rng& rng) {
  if (running_) throw std::logic_error("camera is already streaming");
  if (!reference_now.domain.is_reference())
    throw DomainMismatch("start_stream expects a reference-domain timestamp");
  const Duration start_latency =
      uniform_duration(rng, config_.start_latency_min, config_.start_latency_max);
  last_cycle_elapsed_ = start_latency;
  next_start_ = clock_.read(reference_now + start_latency);
  next_sequence_ = 0;
  pending_.clear();
  running_ = true;
  return FrameRecord{next_start_, config_.exposure, 0};
}

void SimCamera::stop_stream() {
  require_running();
  running_ = false;
  pending_.clear();
}

FrameRecord SimCamera::reset_with_sleep(Timestamp reference_now, Duration sleep_bound, Rng& rng) {
  require_running();
  if (sleep_bound < 0) throw std::invalid_argument("sleep bound must be nonnegative");
  stop_stream();
  const Duration sleep = sleep_bound > 0 ? uniform_duration(rng, 0, sleep_bound) : 0;
  FrameRecord first = start_stream(reference_now + sleep, rng);
  last_cycle_elapsed_ += sleep;
  return first;
}

Duration SimCamera::inject_frame(Duration exposure, Rng& rng) {
  require_running();
  if (exposure < config_.period)
    throw std::invalid_argument("injected exposure must be at least the frame period");

  Duration snapped = exposure;
  const Duration quantum = config_.injection.scanline_quantum;
  if (quantum > 0) {
    snapped = ((exposure + quantum / 2) / quantum) * quantum;
    if (snapped < config_.period) snapped += quantum;
  }

  const Duration period = config_.period;
  Duration shift = static_cast<Duration>(config_.injection.period_multiple) * period +
                   static_cast<Duration>(
                       std::llround(config_.injection.gain * static_cast<double>(snapped - period)));
  if (config_.quantization_sigma > 0)
    shift += static_cast<Duration>(
        std::llround(gaussian(rng, 0.0, static_cast<double>(config_.quantization_sigma))));

  pending_.push_back(PendingInjection{snapped, shift});
  return stream_phase();
}

std::vector<FrameRecord> SimCamera::next_frame(Timestamp until_local) {
  require_running();
  if (until_local.domain != clock_.domain())
    throw DomainMismatch(until_local.domain, clock_.domain());

  std::vector<FrameRecord> frames;
  while (next_start_ <= until_local) {
    Duration exposure = config_.exposure;
    Duration step = config_.period;
    if (!pending_.empty()) {
      exposure = pending_.front().exposure;
      step = pending_.front().step;
      pending_.pop_front();
    }
    frames.push_back(FrameRecord{next_start_, exposure, next_sequence_});
    next_start_ = next_start_ + step;
    ++next_sequence_;
  }
  return frames;
}

Duration SimCamera::stream_phase() const {
  require_running();
  Duration epoch = next_start_.nanos;
  for (const PendingInjection& p : pending_) epoch += p.step - config_.period;
  return floor_mod(epoch, config_.period);
}

Timestamp SimCamera::next_start_local() const {
  require_running();
  return next_start_;
}

void write_frames_csv(std::ostream& out, std::span<const FrameRecord> frames,
                      const ClockEstimate& estimate) {
  out << "sequence,local_start_ns,leader_domain_start_ns,exposure_ns\n";
  for (const FrameRecord& f : frames) {
    const Timestamp leader = convert(f.start, estimate, estimate.leader_domain);
    out << f.sequence << ',' << f.start.nanos << ',' << leader.nanos << ',' << f.exposure << '\n';
  }
}

}  // namespace streamsync
