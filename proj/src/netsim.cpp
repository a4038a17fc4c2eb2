#include "streamsync/netsim.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace streamsync {

LatencyModel::LatencyModel(DirectionConfig leader_to_client, DirectionConfig client_to_leader,
                           double spike_probability, Duration spike_scale)
    : leader_to_client_(leader_to_client),
      client_to_leader_(client_to_leader),
      spike_probability_(spike_probability),
      spike_scale_(spike_scale) {
  for (const auto& dc : {leader_to_client_, client_to_leader_}) {
    if (dc.base < 0) throw std::invalid_argument("latency base must be nonnegative");
    if (dc.jitter_scale < 0) throw std::invalid_argument("jitter scale must be nonnegative");
  }
  if (spike_probability_ < 0.0 || spike_probability_ > 1.0)
    throw std::invalid_argument("spike probability must be in [0, 1]");
  if (spike_scale_ < 0) throw std::invalid_argument("spike scale must be nonnegative");
}

Duration LatencyModel::sample_one_way(Direction direction, Rng& rng) const {
  const DirectionConfig& dc = config(direction);
  double latency = static_cast<double>(dc.base);
  if (dc.jitter_scale > 0)
    latency += exponential(rng, static_cast<double>(dc.jitter_scale));
  if (spike_probability_ > 0.0 && uniform01(rng) < spike_probability_)
    latency += exponential(rng, static_cast<double>(spike_scale_));
  return static_cast<Duration>(std::llround(latency));
}

double LatencyModel::analytic_mean(Direction d) const {
  const DirectionConfig& dc = config(d);
  return static_cast<double>(dc.base) + static_cast<double>(dc.jitter_scale) +
         spike_probability_ * static_cast<double>(spike_scale_);
}

double LatencyModel::asymmetry_delta() const {
  return std::abs(analytic_mean(Direction::client_to_leader) -
                  analytic_mean(Direction::leader_to_client));
}

SummaryStats latency_stats(std::span<const Duration> samples) {
  if (samples.empty()) throw std::invalid_argument("latency_stats: no samples");
  std::vector<double> values(samples.begin(), samples.end());
  return summarize(values);
}

}  // namespace streamsync
