#include "streamsync/clocksync.hpp"

#include <cmath>
#include <limits>

namespace streamsync {

OffsetDelay estimate_offset_delay(const NtpSample& sample) {
  // Cross-domain differences are the point of the estimator: they carry
  // offset plus transit time. Work on raw counts, not domain-checked values.
  if (sample.t2.nanos < sample.t1.nanos)
    throw std::invalid_argument("handshake ordering violation: t2 < t1");
  if (sample.t3.nanos < sample.t0.nanos)
    throw std::invalid_argument("handshake ordering violation: t3 < t0");
  const Duration forward = sample.t1.nanos - sample.t0.nanos;
  const Duration backward = sample.t2.nanos - sample.t3.nanos;
  OffsetDelay result;
  result.theta = half_round_away(forward + backward);
  result.phi = (sample.t3.nanos - sample.t2.nanos) + forward;
  return result;
}

SimLink::SimLink(const LatencyModel& model, LocalClock leader_clock, LocalClock client_clock,
                 Timestamp start_reference, std::uint64_t seed, Duration processing_delay,
                 Duration inter_message_gap)
    : model_(model),
      leader_clock_(leader_clock),
      client_clock_(client_clock),
      cursor_(start_reference),
      rng_(seed),
      processing_delay_(processing_delay),
      inter_message_gap_(inter_message_gap) {
  if (!start_reference.domain.is_reference())
    throw DomainMismatch("SimLink cursor must start in the reference domain");
  if (processing_delay_ < 0) throw std::invalid_argument("processing delay must be nonnegative");
}

void SimLink::set_now_reference(Timestamp t) {
  if (!t.domain.is_reference())
    throw DomainMismatch("SimLink cursor must stay in the reference domain");
  cursor_ = t;
}

NtpSample SimLink::exchange() {
  const Duration out = model_.sample_one_way(Direction::leader_to_client, rng_);
  const Duration back = model_.sample_one_way(Direction::client_to_leader, rng_);

  NtpSample s;
  s.t0 = leader_clock_.read(cursor_);
  const Timestamp arrival = cursor_ + out;
  s.t1 = client_clock_.read(arrival);
  const Timestamp reply = arrival + processing_delay_;
  s.t2 = client_clock_.read(reply);
  cursor_ = reply + back;
  s.t3 = leader_clock_.read(cursor_);
  cursor_ = cursor_ + inter_message_gap_;

  latency_log_.push_back(OneWayLog{out, back});
  return s;
}

ClockEstimate mean_filter(std::span<const NtpSample> samples, const FilterConfig& config) {
  if (config.outlier_threshold <= 0)
    throw std::invalid_argument("outlier threshold must be positive");
  double theta_sum = 0.0;
  double phi_sum = 0.0;
  std::vector<double> thetas;
  thetas.reserve(samples.size());
  for (const NtpSample& s : samples) {
    const OffsetDelay od = estimate_offset_delay(s);
    if (od.phi > config.outlier_threshold) continue;
    theta_sum += static_cast<double>(od.theta);
    phi_sum += static_cast<double>(od.phi);
    thetas.push_back(static_cast<double>(od.theta));
  }
  if (thetas.empty())
    throw std::runtime_error("mean_filter: all samples rejected as outliers");

  ClockEstimate e;
  e.filter = FilterKind::mean;
  e.samples_used = static_cast<int>(thetas.size());
  const double n = static_cast<double>(thetas.size());
  const double mean = theta_sum / n;
  e.theta = static_cast<Duration>(std::llround(mean));
  e.phi = static_cast<Duration>(std::llround(phi_sum / n));
  if (thetas.size() > 1) {
    double sq = 0.0;
    for (double t : thetas) sq += (t - mean) * (t - mean);
    e.theta_variance = sq / (n - 1.0);
  }
  e.client_domain = samples.front().t1.domain;
  e.leader_domain = samples.front().t0.domain;
  return e;
}

ClockEstimate min_filter(std::span<const NtpSample> samples, const FilterConfig& config) {
  (void)config;
  if (samples.empty()) throw std::invalid_argument("min_filter: no samples");
  Duration best_phi = std::numeric_limits<Duration>::max();
  Duration best_theta = 0;
  for (const NtpSample& s : samples) {
    const OffsetDelay od = estimate_offset_delay(s);
    if (od.phi < best_phi) {  // strict: ties keep the earliest sample
      best_phi = od.phi;
      best_theta = od.theta;
    }
  }
  ClockEstimate e;
  e.filter = FilterKind::min;
  e.theta = best_theta;
  e.phi = best_phi;
  e.samples_used = static_cast<int>(samples.size());
  e.client_domain = samples.front().t1.domain;
  e.leader_domain = samples.front().t0.domain;
  return e;
}

int required_samples_mean(Duration sample_stdev, Duration target_stdev) {
  if (target_stdev <= 0) throw std::invalid_argument("target stdev must be positive");
  const double ratio = static_cast<double>(sample_stdev) / static_cast<double>(target_stdev);
  return std::max(1, static_cast<int>(std::ceil(ratio * ratio)));
}

SyncResult sync_client(HandshakeTransport& transport, const FilterConfig& config) {
  if (config.sample_count < 1) throw std::invalid_argument("sample count must be >= 1");
  SyncResult result;
  result.samples.reserve(static_cast<std::size_t>(config.sample_count));
  while (static_cast<int>(result.samples.size()) < config.sample_count) {
    NtpSample s;
    try {
      s = transport.exchange();
    } catch (const TransportTimeout&) {
      if (++result.timeouts > config.max_transport_failures)
        throw std::runtime_error("sync_client: too many transport failures");
      continue;
    }
    result.samples.push_back(s);
    if (config.kind == FilterKind::min && config.target_latency_threshold) {
      if (estimate_offset_delay(s).phi <= *config.target_latency_threshold) break;
    }
  }
  result.estimate = config.kind == FilterKind::mean ? mean_filter(result.samples, config)
                                                    : min_filter(result.samples, config);
  return result;
}

void write_samples_csv(std::ostream& out, std::span<const NtpSample> samples) {
  out << "t0,t1,t2,t3,theta,phi\n";
  for (const NtpSample& s : samples) {
    const OffsetDelay od = estimate_offset_delay(s);
    out << s.t0.nanos << ',' << s.t1.nanos << ',' << s.t2.nanos << ',' << s.t3.nanos << ','
        << od.theta << ',' << od.phi << '\n';
  }
}

}  // namespace streamsync
