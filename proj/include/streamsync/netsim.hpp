#ifndef STREAMSYNC_NETSIM_HPP_
#define STREAMSYNC_NETSIM_HPP_

#include <span>

#include "streamsync/rng.hpp"
#include "streamsync/stats.hpp"
#include "streamsync/timebase.hpp"

namespace streamsync {

enum class Direction { leader_to_client, client_to_leader };

inline const char* to_string(Direction d) {
  return d == Direction::leader_to_client ? "leader_to_client" : "client_to_leader";
}

// One direction of the link: a hard floor plus right-skewed exponential jitter.
struct DirectionConfig {
  Duration base = 500_us;          // minimum transit time
  Duration jitter_scale = 600_us;  // mean of the exponential jitter term
};

// Asymmetric one-way latency model. Each draw is
//   base + Exp(jitter_scale) [+ Exp(spike_scale) with spike_probability]
// where the rare additive spike models buffering/interference outliers.
class LatencyModel {
 public:
  LatencyModel(DirectionConfig leader_to_client, DirectionConfig client_to_leader,
               double spike_probability = 0.0, Duration spike_scale = 0);

  Duration sample_one_way(Direction direction, Rng& rng) const;

  const DirectionConfig& config(Direction d) const {
    return d == Direction::leader_to_client ? leader_to_client_ : client_to_leader_;
  }
  double spike_probability() const { return spike_probability_; }
  Duration spike_scale() const { return spike_scale_; }

  // Analytic mean of one direction, including the spike contribution.
  double analytic_mean(Direction d) const;
  // Asymmetry Delta: |mean(client->leader) - mean(leader->client)|.
  double asymmetry_delta() const;

 private:
  DirectionConfig leader_to_client_;
  DirectionConfig client_to_leader_;
  double spike_probability_ = 0.0;
  Duration spike_scale_ = 0;
};

// Exact sample statistics for one direction's draws. Throws on empty input.
SummaryStats latency_stats(std::span<const Duration> samples);

}  // namespace streamsync

#endif  // STREAMSYNC_NETSIM_HPP_
