#ifndef STREAMSYNC_HARNESS_HPP_
#define STREAMSYNC_HARNESS_HPP_

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "streamsync/config.hpp"
#include "streamsync/oracle.hpp"

namespace streamsync {

// Per-client outcome of one end-to-end trial: clock sync, phase alignment,
// simultaneous capture, oracle measurement.
struct ClientOutcome {
  int client = 1;
  ErrorDecomposition errors;
  Duration client_decoded = 0;  // panel time read from the client's capture
  Duration leader_decoded = 0;  // panel time read from the leader's capture
  int sync_messages = 0;
  int align_iterations = 0;
  bool align_converged = true;
  Duration sync_time = 0;   // simulated wall time of this client's sync session
  Duration align_time = 0;  // simulated wall time of this client's alignment
};

struct TrialResult {
  int trial = 0;
  std::vector<ClientOutcome> clients;
  Duration total_time = 0;  // sync (sequential) + stream start + align (parallel max)
};

TrialResult run_trial(const ExperimentConfig& config, int trial_index);

struct BatchResult {
  std::vector<TrialResult> trials;
};

// Runs all trials, optionally across worker threads; results are ordered by
// trial index regardless of completion order.
BatchResult run_batch(const ExperimentConfig& config);

void write_trials_csv(std::ostream& out, const BatchResult& batch);

// Per-component {max, mean_abs, stdev} plus signed histograms at the
// configured bin widths.
nlohmann::json summarize_batch(const ExperimentConfig& config, const BatchResult& batch);

// Writes trials.csv and summary.json under out_dir (created if needed).
void write_batch_outputs(const ExperimentConfig& config, const BatchResult& batch,
                         const std::string& out_dir);

// One simulated leader<->client sync session outside the trial pipeline,
// with ground truth retained for filter-bias analysis.
struct HandshakeDataset {
  std::vector<NtpSample> samples;
  std::vector<SimLink::OneWayLog> latencies;  // true one-way transits
  Duration true_theta = 0;
  Duration sim_elapsed = 0;
};

HandshakeDataset generate_handshake_dataset(const ExperimentConfig& config, int count,
                                            std::uint64_t salt);

// Wedge scattergram rows (phi, theta) plus equal-count phi bins with the
// theta variance inside each, to check that offset spread grows with delay.
void write_wedge_csv(std::ostream& out, std::span<const NtpSample> samples);

struct WedgeBin {
  Duration phi_lo = 0;
  Duration phi_hi = 0;
  int count = 0;
  double theta_variance = 0.0;  // ns^2
};

std::vector<WedgeBin> wedge_bins(std::span<const NtpSample> samples, int bins);

// estimate_after_k cumulative filter outputs for k = 1..N.
std::vector<Duration> convergence_curve(std::span<const NtpSample> samples,
                                        const FilterConfig& config);

void write_convergence_csv(std::ostream& out, std::span<const Duration> mean_curve,
                           std::span<const Duration> min_curve);

// Simulated wall-time budget of bringing up a rig with the given config.
struct RigTiming {
  Duration clock_sync_total = 0;        // sequential round robin over clients
  Duration align_injection_total = 0;   // parallel: max over clients
  Duration align_reset_total = 0;
  double injection_iterations_mean = 0.0;
  double reset_iterations_mean = 0.0;
  Duration reset_per_iteration_mean = 0;
};

RigTiming rig_timing_report(const ExperimentConfig& config);

}  // namespace streamsync

#endif  // STREAMSYNC_HARNESS_HPP_
