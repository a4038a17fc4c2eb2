#include "streamsync/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

namespace streamsync {

namespace {

enum StreamTag : std::uint64_t {
  kClockTag = 1,
  kLatencyTag = 2,
  kCameraTag = 3,
  kAlignTag = 4,
  kPerturbTag = 5,
  kNaiveTag = 6,
  kResyncTag = 7,
};

Duration draw_offset(const ExperimentConfig& config, int trial, int device) {
  if (config.clock_offset_spread == 0) return 0;
  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(trial),
                      static_cast<std::uint64_t>(device), kClockTag));
  return uniform_duration(rng, -config.clock_offset_spread, config.clock_offset_spread);
}

double draw_drift(const ExperimentConfig& config, int trial, int device) {
  if (config.clock_drift_spread == 0.0) return 0.0;
  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(trial),
                      static_cast<std::uint64_t>(device), kClockTag) ^ 0x5bu);
  return uniform(rng, -config.clock_drift_spread, config.clock_drift_spread);
}

struct NaiveDefaults {
  Duration mean;
  Duration stdev;
};

NaiveDefaults naive_defaults(const std::string& mode) {
  if (mode == "wired") return {103_ms, 50_ms};
  if (mode == "bluetooth") return {69_ms, 65_ms};
  return {123_ms, 84_ms};  // wifi
}

TrialResult run_naive_trial(const ExperimentConfig& config, int trial) {
  TrialResult result;
  result.trial = trial;
  NaiveDefaults d = naive_defaults(config.naive->mode);
  if (config.naive->mean > 0) d.mean = config.naive->mean;
  if (config.naive->stdev > 0) d.stdev = config.naive->stdev;

  const LedPanel panel{config.oracle_tau};
  const Timestamp command{0, ClockDomain::reference()};

  auto trigger_delay = [&](int device) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(trial),
                        static_cast<std::uint64_t>(device), kNaiveTag));
    const double delay =
        gaussian(rng, static_cast<double>(d.mean), static_cast<double>(d.stdev));
    return std::max<Duration>(0, static_cast<Duration>(std::llround(delay)));
  };

  const Duration leader_delay = trigger_delay(0);
  const CaptureReading leader_reading =
      capture_reading(panel, command + leader_delay, config.oracle_exposure);

  for (int i = 1; i < config.devices; ++i) {
    const Duration client_delay = trigger_delay(i);
    const CaptureReading client_reading =
        capture_reading(panel, command + client_delay, config.oracle_exposure);
    ClientOutcome outcome;
    outcome.client = i;
    outcome.errors.signed_total = measure_pair_error(panel, client_reading, leader_reading);
    outcome.errors.eps_total = std::abs(outcome.errors.signed_total);
    outcome.client_decoded = decoded_time(panel, client_reading);
    outcome.leader_decoded = decoded_time(panel, leader_reading);
    result.clients.push_back(outcome);
    result.total_time = std::max(result.total_time, std::max(leader_delay, client_delay));
  }
  return result;
}

struct SyncPhase {
  std::vector<SyncResult> sessions;     // one per client, index 0 = client 1
  std::vector<Duration> session_times;  // simulated wall time per client
  Timestamp end;                        // reference cursor after the round robin
};

SyncPhase run_sync_phase(const ExperimentConfig& config, const LatencyModel& model,
                         const LocalClock& leader_clock, std::span<const LocalClock> client_clocks,
                         Timestamp start, int trial, std::uint64_t tag) {
  SyncPhase phase;
  phase.end = start;
  if (!config.sync_interleaved) {
    for (std::size_t c = 0; c < client_clocks.size(); ++c) {
      SimLink link(model, leader_clock, client_clocks[c], phase.end,
                   derive_seed(config.seed, static_cast<std::uint64_t>(trial), c + 1, tag),
                   config.processing_delay);
      const Timestamp begin = link.now_reference();
      phase.sessions.push_back(sync_client(link, config.filter));
      phase.session_times.push_back(link.now_reference() - begin);
      phase.end = link.now_reference();
    }
    return phase;
  }

  // Per-message round robin: one shared medium, exchanges alternate clients.
  std::vector<SimLink> links;
  links.reserve(client_clocks.size());
  for (std::size_t c = 0; c < client_clocks.size(); ++c)
    links.emplace_back(model, leader_clock, client_clocks[c], start,
                       derive_seed(config.seed, static_cast<std::uint64_t>(trial), c + 1, tag),
                       config.processing_delay);
  std::vector<std::vector<NtpSample>> samples(client_clocks.size());
  std::vector<bool> done(client_clocks.size(), false);
  bool all_done = false;
  while (!all_done) {
    all_done = true;
    for (std::size_t c = 0; c < links.size(); ++c) {
      if (done[c]) continue;
      links[c].set_now_reference(phase.end);
      const NtpSample s = links[c].exchange();
      phase.end = links[c].now_reference();
      samples[c].push_back(s);
      const bool reached_count =
          static_cast<int>(samples[c].size()) >= config.filter.sample_count;
      const bool early_stop = config.filter.kind == FilterKind::min &&
                              config.filter.target_latency_threshold &&
                              estimate_offset_delay(s).phi <= *config.filter.target_latency_threshold;
      done[c] = reached_count || early_stop;
      if (!done[c]) all_done = false;
    }
  }
  const Duration elapsed = phase.end - start;
  for (std::size_t c = 0; c < links.size(); ++c) {
    SyncResult r;
    r.samples = std::move(samples[c]);
    r.estimate = config.filter.kind == FilterKind::mean ? mean_filter(r.samples, config.filter)
                                                        : min_filter(r.samples, config.filter);
    phase.sessions.push_back(std::move(r));
    phase.session_times.push_back(elapsed);
  }
  return phase;
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& config, int trial) {
  validate(config);
  if (config.naive) return run_naive_trial(config, trial);

  TrialResult result;
  result.trial = trial;
  const LatencyModel model = config.latency_model();
  const Duration period = config.camera.period;

  const LocalClock leader_clock(ClockDomain::leader(), draw_offset(config, trial, 0),
                                draw_drift(config, trial, 0));
  std::vector<LocalClock> client_clocks;
  for (int i = 1; i < config.devices; ++i)
    client_clocks.emplace_back(ClockDomain::client(i), draw_offset(config, trial, i),
                               draw_drift(config, trial, i));

  // Stage 1: clock synchronization, leader round-robins over clients.
  const Timestamp start{0, ClockDomain::reference()};
  SyncPhase sync =
      run_sync_phase(config, model, leader_clock, client_clocks, start, trial, kLatencyTag);
  Timestamp cursor = sync.end;
  const Duration sync_total = cursor - start;

  // Stage 2: everyone starts streaming; the leader's first frame is the goal.
  Rng leader_cam_rng(derive_seed(config.seed, static_cast<std::uint64_t>(trial), 0, kCameraTag));
  SimCamera leader_camera(config.camera, leader_clock);
  const FrameRecord leader_first = leader_camera.start_stream(cursor, leader_cam_rng);
  Duration stream_start_elapsed = leader_camera.last_cycle_elapsed();

  std::vector<SimCamera> cameras;
  cameras.reserve(client_clocks.size());
  for (std::size_t c = 0; c < client_clocks.size(); ++c) {
    Rng cam_rng(derive_seed(config.seed, static_cast<std::uint64_t>(trial), c + 1, kCameraTag));
    cameras.emplace_back(config.camera, client_clocks[c]);
    cameras.back().start_stream(cursor, cam_rng);
    stream_start_elapsed = std::max(stream_start_elapsed, cameras.back().last_cycle_elapsed());
  }

  AlignConfig align_config;
  align_config.tolerance = config.align_tolerance;
  align_config.random_sleep_bound = config.align_sleep_bound;
  align_config.max_iterations = config.align_max_iterations;
  align_config.method = config.align_method;
  align_config.goal_phase = leader_first.start;
  align_config.measure_frames = config.measure_frames;
  align_config.injection_latency = config.injection_latency;

  // Stage 3: phase alignment, independent per client (rig time = slowest).
  const Timestamp align_begin = cursor + stream_start_elapsed;
  std::vector<AlignResult> aligns;
  Timestamp align_end = align_begin;
  Duration align_parallel = 0;
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    if (config.perturb_phase) {
      Rng perturb_rng(
          derive_seed(config.seed, static_cast<std::uint64_t>(trial), c + 1, kPerturbTag));
      const Duration delta = uniform_duration(perturb_rng, 0, period);
      cameras[c].inject_frame(
          plan_injection_exposure(delta, config.camera.injection, period), perturb_rng);
      // The perturbing frame plays out before re-alignment is requested; its
      // slot is the stream epoch, which never lies beyond align_begin.
      cameras[c].next_frame(client_clocks[c].read(align_begin));
    }
    Rng align_rng(derive_seed(config.seed, static_cast<std::uint64_t>(trial), c + 1, kAlignTag));
    AlignResult r = config.align_method == AlignMethod::frame_injection
                        ? frame_injection_align(cameras[c], align_config, sync.sessions[c].estimate,
                                                align_begin, align_rng)
                        : reset_sampling_align(cameras[c], align_config, sync.sessions[c].estimate,
                                               align_begin, align_rng);
    if (r.end_reference.nanos > align_end.nanos) align_end = r.end_reference;
    align_parallel = std::max(align_parallel, r.sim_elapsed);
    aligns.push_back(std::move(r));
  }

  // Optional drift guard: re-estimate offsets when the session outlives the
  // configured re-sync period.
  if (config.resync_period > 0 && (align_end - start) > config.resync_period) {
    SyncPhase resync =
        run_sync_phase(config, model, leader_clock, client_clocks, align_end, trial, kResyncTag);
    for (std::size_t c = 0; c < cameras.size(); ++c) {
      sync.sessions[c].estimate = resync.sessions[c].estimate;
      sync.sessions[c].samples.insert(sync.sessions[c].samples.end(),
                                      resync.sessions[c].samples.begin(),
                                      resync.sessions[c].samples.end());
      sync.session_times[c] += resync.session_times[c];
    }
    align_end = resync.end;
  }

  // Stage 4: simultaneous capture, measured against the panel.
  const LedPanel panel{config.oracle_tau};
  const Timestamp capture_base = align_end + 5 * period;
  leader_camera.next_frame(leader_clock.read(capture_base));
  const Timestamp requested_leader = leader_camera.next_start_local();
  const Timestamp leader_capture_ref = leader_clock.to_reference(requested_leader);
  const CaptureReading leader_reading =
      capture_reading(panel, leader_capture_ref, config.oracle_exposure);

  for (std::size_t c = 0; c < cameras.size(); ++c) {
    const ClockEstimate& estimate = sync.sessions[c].estimate;
    const Timestamp requested_local =
        convert(requested_leader, estimate, client_clocks[c].domain());
    const PhaseOffset po =
        phase_offset(cameras[c].next_start_local(), requested_local, period);
    const Timestamp actual_local = requested_local + po.centered;
    const Timestamp client_capture_ref = client_clocks[c].to_reference(actual_local);
    const CaptureReading client_reading =
        capture_reading(panel, client_capture_ref, config.oracle_exposure);

    TrialLog log;
    log.true_theta = client_clocks[c].read(leader_capture_ref).nanos -
                     leader_clock.read(leader_capture_ref).nanos;
    log.estimated_theta = estimate.theta;
    log.requested_local = requested_local;
    log.actual_local = actual_local;
    log.oracle_pair_error = measure_pair_error(panel, client_reading, leader_reading);

    ClientOutcome outcome;
    outcome.client = static_cast<int>(c) + 1;
    outcome.errors = decompose_error(log);
    outcome.client_decoded = decoded_time(panel, client_reading);
    outcome.leader_decoded = decoded_time(panel, leader_reading);
    outcome.sync_messages = static_cast<int>(sync.sessions[c].samples.size());
    outcome.align_iterations = aligns[c].iterations;
    outcome.align_converged = aligns[c].converged;
    outcome.sync_time = sync.session_times[c];
    outcome.align_time = aligns[c].sim_elapsed;
    result.clients.push_back(outcome);
  }

  result.total_time = sync_total + stream_start_elapsed + align_parallel;
  return result;
}

BatchResult run_batch(const ExperimentConfig& config) {
  validate(config);
  BatchResult batch;
  batch.trials.resize(static_cast<std::size_t>(config.trials));
  const int workers = std::min(config.threads, config.trials);
  if (workers <= 1) {
    for (int t = 0; t < config.trials; ++t) batch.trials[static_cast<std::size_t>(t)] = run_trial(config, t);
    return batch;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= config.trials) return;
        batch.trials[static_cast<std::size_t>(t)] = run_trial(config, t);
      }
    });
  }
  for (auto& th : pool) th.join();
  return batch;
}

void write_trials_csv(std::ostream& out, const BatchResult& batch) {
  out << "trial,client,eps_clock_ns,eps_phase_ns,eps_total_ns,signed_clock_ns,signed_phase_ns,"
         "signed_total_ns,residual_ns,sync_messages,align_iterations,align_converged,"
         "sync_time_ns,align_time_ns,total_time_ns,client_panel_ns,leader_panel_ns\n";
  for (const TrialResult& t : batch.trials) {
    for (const ClientOutcome& c : t.clients) {
      out << t.trial << ',' << c.client << ',' << c.errors.eps_clock << ',' << c.errors.eps_phase
          << ',' << c.errors.eps_total << ',' << c.errors.signed_clock << ','
          << c.errors.signed_phase << ',' << c.errors.signed_total << ',' << c.errors.residual
          << ',' << c.sync_messages << ',' << c.align_iterations << ','
          << (c.align_converged ? 1 : 0) << ',' << c.sync_time << ',' << c.align_time << ','
          << t.total_time << ',' << c.client_decoded << ',' << c.leader_decoded << '\n';
    }
  }
}

namespace {

nlohmann::json component_summary(const std::vector<double>& signed_values) {
  const SummaryStats s = summarize(signed_values);
  double mean_abs = 0.0;
  double max_abs = 0.0;
  for (double v : signed_values) {
    mean_abs += std::abs(v);
    max_abs = std::max(max_abs, std::abs(v));
  }
  mean_abs /= static_cast<double>(signed_values.size());
  return nlohmann::json{{"max_abs_ns", std::llround(max_abs)},
                        {"mean_abs_ns", std::llround(mean_abs)},
                        {"mean_signed_ns", std::llround(s.mean)},
                        {"stdev_ns", std::llround(s.stdev)},
                        {"count", signed_values.size()}};
}

nlohmann::json histogram_json(const std::vector<double>& values, Duration bin_width) {
  const Histogram h = Histogram::build(values, static_cast<double>(bin_width));
  return nlohmann::json{{"origin_ns", std::llround(h.origin)},
                        {"bin_width_ns", bin_width},
                        {"counts", h.counts}};
}

}  // namespace

nlohmann::json summarize_batch(const ExperimentConfig& config, const BatchResult& batch) {
  std::vector<double> clock, phase, total, iterations, sync_times, align_times, totals;
  for (const TrialResult& t : batch.trials) {
    for (const ClientOutcome& c : t.clients) {
      clock.push_back(static_cast<double>(c.errors.signed_clock));
      phase.push_back(static_cast<double>(c.errors.signed_phase));
      total.push_back(static_cast<double>(c.errors.signed_total));
      iterations.push_back(static_cast<double>(c.align_iterations));
      sync_times.push_back(static_cast<double>(c.sync_time));
      align_times.push_back(static_cast<double>(c.align_time));
    }
    totals.push_back(static_cast<double>(t.total_time));
  }
  const SummaryStats iter_stats = summarize(iterations);
  nlohmann::json j;
  j["trials"] = config.trials;
  j["devices"] = config.devices;
  j["seed"] = config.seed;
  j["clock"] = component_summary(clock);
  j["phase"] = component_summary(phase);
  j["total"] = component_summary(total);
  j["align_iterations"] = {{"mean", iter_stats.mean},
                           {"min", iter_stats.min},
                           {"max", iter_stats.max},
                           {"stdev", iter_stats.stdev}};
  j["timing"] = {{"sync_mean_ns", std::llround(summarize(sync_times).mean)},
                 {"align_mean_ns", std::llround(summarize(align_times).mean)},
                 {"trial_total_mean_ns", std::llround(summarize(totals).mean)}};
  j["histograms"] = {{"phase", histogram_json(phase, config.phase_bin)},
                     {"clock", histogram_json(clock, config.clock_bin)},
                     {"total", histogram_json(total, config.total_bin)}};
  return j;
}

void write_batch_outputs(const ExperimentConfig& config, const BatchResult& batch,
                         const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir + "/trials.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + out_dir + "/trials.csv");
    write_trials_csv(csv, batch);
  }
  std::ofstream json(out_dir + "/summary.json", std::ios::binary);
  if (!json) throw std::runtime_error("cannot write " + out_dir + "/summary.json");
  json << summarize_batch(config, batch).dump(2) << '\n';
}

HandshakeDataset generate_handshake_dataset(const ExperimentConfig& config, int count,
                                            std::uint64_t salt) {
  if (count < 1) throw std::invalid_argument("need at least one handshake");
  const LatencyModel model = config.latency_model();
  const LocalClock leader_clock(ClockDomain::leader(), draw_offset(config, 0, 0));
  const LocalClock client_clock(ClockDomain::client(1), draw_offset(config, 0, 1));
  SimLink link(model, leader_clock, client_clock, Timestamp{0, ClockDomain::reference()},
               derive_seed(config.seed, salt, 1, kLatencyTag), config.processing_delay);
  HandshakeDataset data;
  data.true_theta = client_clock.offset() - leader_clock.offset();
  data.samples.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) data.samples.push_back(link.exchange());
  data.latencies = link.latency_log();
  data.sim_elapsed = link.now_reference() - Timestamp{0, ClockDomain::reference()};
  return data;
}

void write_wedge_csv(std::ostream& out, std::span<const NtpSample> samples) {
  out << "phi,theta\n";
  for (const NtpSample& s : samples) {
    const OffsetDelay od = estimate_offset_delay(s);
    out << od.phi << ',' << od.theta << '\n';
  }
}

std::vector<WedgeBin> wedge_bins(std::span<const NtpSample> samples, int bins) {
  if (samples.empty()) throw std::invalid_argument("wedge_bins: no samples");
  if (bins < 1) throw std::invalid_argument("wedge_bins: need at least one bin");
  std::vector<OffsetDelay> ods;
  ods.reserve(samples.size());
  for (const NtpSample& s : samples) ods.push_back(estimate_offset_delay(s));
  std::sort(ods.begin(), ods.end(),
            [](const OffsetDelay& a, const OffsetDelay& b) { return a.phi < b.phi; });

  std::vector<WedgeBin> result;
  const std::size_t per_bin = std::max<std::size_t>(1, ods.size() / static_cast<std::size_t>(bins));
  for (std::size_t begin = 0; begin < ods.size(); begin += per_bin) {
    const std::size_t end = std::min(begin + per_bin, ods.size());
    std::vector<double> thetas;
    thetas.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) thetas.push_back(static_cast<double>(ods[i].theta));
    const SummaryStats s = summarize(thetas);
    WedgeBin bin;
    bin.phi_lo = ods[begin].phi;
    bin.phi_hi = ods[end - 1].phi;
    bin.count = static_cast<int>(end - begin);
    bin.theta_variance = s.stdev * s.stdev;
    result.push_back(bin);
    if (result.size() == static_cast<std::size_t>(bins) && end < ods.size()) {
      // fold any remainder into the last bin
      std::vector<double> rest = std::move(thetas);
      for (std::size_t i = end; i < ods.size(); ++i)
        rest.push_back(static_cast<double>(ods[i].theta));
      const SummaryStats rs = summarize(rest);
      result.back().phi_hi = ods.back().phi;
      result.back().count = static_cast<int>(rest.size());
      result.back().theta_variance = rs.stdev * rs.stdev;
      break;
    }
  }
  return result;
}

std::vector<Duration> convergence_curve(std::span<const NtpSample> samples,
                                        const FilterConfig& config) {
  if (samples.empty()) throw std::invalid_argument("convergence_curve: no samples");
  std::vector<Duration> curve;
  curve.reserve(samples.size());
  if (config.kind == FilterKind::min) {
    Duration best_phi = std::numeric_limits<Duration>::max();
    Duration best_theta = 0;
    for (const NtpSample& s : samples) {
      const OffsetDelay od = estimate_offset_delay(s);
      if (od.phi < best_phi) {
        best_phi = od.phi;
        best_theta = od.theta;
      }
      curve.push_back(best_theta);
    }
    return curve;
  }
  double sum = 0.0;
  std::size_t used = 0;
  Duration first_theta = 0;
  bool have_first = false;
  for (const NtpSample& s : samples) {
    const OffsetDelay od = estimate_offset_delay(s);
    if (!have_first) {
      first_theta = od.theta;
      have_first = true;
    }
    if (od.phi <= config.outlier_threshold) {
      sum += static_cast<double>(od.theta);
      ++used;
    }
    curve.push_back(used > 0 ? static_cast<Duration>(std::llround(sum / static_cast<double>(used)))
                             : first_theta);
  }
  return curve;
}

void write_convergence_csv(std::ostream& out, std::span<const Duration> mean_curve,
                           std::span<const Duration> min_curve) {
  if (mean_curve.size() != min_curve.size())
    throw std::invalid_argument("convergence curves must have equal length");
  out << "k,mean_estimate,min_estimate\n";
  for (std::size_t i = 0; i < mean_curve.size(); ++i)
    out << (i + 1) << ',' << mean_curve[i] << ',' << min_curve[i] << '\n';
}

RigTiming rig_timing_report(const ExperimentConfig& config) {
  RigTiming timing;
  const int trials = std::min(10, config.trials);

  ExperimentConfig injection = config;
  injection.trials = trials;
  injection.align_method = AlignMethod::frame_injection;
  ExperimentConfig reset = config;
  reset.trials = trials;
  reset.align_method = AlignMethod::reset_sampling;

  double sync_total = 0.0, inj_total = 0.0, reset_total = 0.0;
  double inj_iters = 0.0, reset_iters = 0.0;
  std::int64_t n_clients = 0, n_reset_iters = 0;
  double reset_time_sum = 0.0;

  const BatchResult inj_batch = run_batch(injection);
  const BatchResult reset_batch = run_batch(reset);
  for (int t = 0; t < trials; ++t) {
    Duration sync_sum = 0, inj_max = 0, reset_max = 0;
    for (const ClientOutcome& c : inj_batch.trials[static_cast<std::size_t>(t)].clients) {
      sync_sum += c.sync_time;
      inj_max = std::max(inj_max, c.align_time);
      inj_iters += c.align_iterations;
      ++n_clients;
    }
    for (const ClientOutcome& c : reset_batch.trials[static_cast<std::size_t>(t)].clients) {
      reset_max = std::max(reset_max, c.align_time);
      reset_iters += c.align_iterations;
      n_reset_iters += c.align_iterations;
      reset_time_sum += static_cast<double>(c.align_time);
    }
    sync_total += static_cast<double>(sync_sum);
    inj_total += static_cast<double>(inj_max);
    reset_total += static_cast<double>(reset_max);
  }

  timing.clock_sync_total = static_cast<Duration>(std::llround(sync_total / trials));
  timing.align_injection_total = static_cast<Duration>(std::llround(inj_total / trials));
  timing.align_reset_total = static_cast<Duration>(std::llround(reset_total / trials));
  timing.injection_iterations_mean = inj_iters / static_cast<double>(n_clients);
  timing.reset_iterations_mean = reset_iters / static_cast<double>(n_clients);
  timing.reset_per_iteration_mean =
      n_reset_iters > 0
          ? static_cast<Duration>(std::llround(reset_time_sum / static_cast<double>(n_reset_iters)))
          : 0;
  return timing;
}

}  // namespace streamsync
