// Acceptance suite: runs every criterion end to end at its pinned tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "streamsync/harness.hpp"
#include "streamsync/transport.hpp"
#include "streamsync/wire.hpp"

using namespace streamsync;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

struct Check {
  Outcome outcome;

  void require(bool condition, const std::string& label) {
    if (!condition) {
      outcome.passed = false;
      outcome.detail += (outcome.detail.empty() ? "" : "; ") + label;
    }
  }
  void note(const std::string& text) {
    outcome.detail += (outcome.detail.empty() ? "" : "; ") + text;
  }
};

std::string format_us(double nanos) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1fus", nanos / 1e3);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Handshake estimator exactness.

Outcome criterion_1() {
  Check c;
  Rng rng(1001);
  for (int i = 0; i < 10'000; ++i) {
    const Duration theta = uniform_duration(rng, -500_ms, 500_ms);
    const Duration latency = uniform_duration(rng, 0, 20_ms);
    const Duration processing = uniform_duration(rng, 0, 2_ms);
    const Duration t0 = uniform_duration(rng, 0, 10_s);
    NtpSample s;
    s.t0 = Timestamp{t0, ClockDomain::leader()};
    s.t1 = Timestamp{t0 + latency + theta, ClockDomain::client(1)};
    s.t2 = Timestamp{s.t1.nanos + processing, ClockDomain::client(1)};
    s.t3 = Timestamp{s.t2.nanos - theta + latency, ClockDomain::leader()};
    const OffsetDelay od = estimate_offset_delay(s);
    if (od.theta != theta || od.phi != 2 * latency) {
      c.require(false, "symmetric case not exact at i=" + std::to_string(i));
      break;
    }
  }
  for (int i = 0; i < 10'000; ++i) {
    const Duration theta = uniform_duration(rng, -100_ms, 100_ms);
    const Duration out = 2 * uniform_duration(rng, 0, 3_ms);
    const Duration back = 2 * uniform_duration(rng, 0, 3_ms);  // even gap: /2 exact
    NtpSample s;
    s.t0 = Timestamp{i * 1_ms, ClockDomain::leader()};
    s.t1 = Timestamp{s.t0.nanos + out + theta, ClockDomain::client(1)};
    s.t2 = Timestamp{s.t1.nanos + 100_us, ClockDomain::client(1)};
    s.t3 = Timestamp{s.t2.nanos - theta + back, ClockDomain::leader()};
    const OffsetDelay od = estimate_offset_delay(s);
    if (od.theta - theta != (out - back) / 2) {
      c.require(false, "asymmetric error != (out-back)/2 at i=" + std::to_string(i));
      break;
    }
  }
  c.note("20000 constructed handshakes exact");
  return c.outcome;
}

// ---------------------------------------------------------------------------
// 2. Mean-filter bias against the calibrated asymmetric link.

Outcome criterion_2() {
  Check c;
  const ExperimentConfig config = default_config();
  const HandshakeDataset data = generate_handshake_dataset(config, 10'000, 2002);
  FilterConfig fc;
  fc.kind = FilterKind::mean;
  const ClockEstimate e = mean_filter(data.samples, fc);
  const double bias = std::abs(static_cast<double>(e.theta - data.true_theta));
  c.require(std::abs(bias - 372.5e3) <= 50e3, "|bias-372us| > 50us (" + format_us(bias) + ")");

  double out_mean = 0.0, back_mean = 0.0;
  for (const SimLink::OneWayLog& l : data.latencies) {
    out_mean += static_cast<double>(l.out);
    back_mean += static_cast<double>(l.back);
  }
  out_mean /= static_cast<double>(data.latencies.size());
  back_mean /= static_cast<double>(data.latencies.size());
  const double half_delta = std::abs(back_mean - out_mean) / 2.0;
  c.require(std::abs(bias - half_delta) <= 0.10 * half_delta,
            "bias not within 10% of measured Delta/2");
  c.note("bias " + format_us(bias) + ", measured Delta/2 " + format_us(half_delta));
  return c.outcome;
}

// ---------------------------------------------------------------------------
// 3. Min-filter bias across seeds.

Outcome criterion_3() {
  Check c;
  const ExperimentConfig config = default_config();
  FilterConfig fc;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const LatencyModel model = config.latency_model();
    SimLink link(model, LocalClock(ClockDomain::leader(), 0), LocalClock(ClockDomain::client(1), 0),
                 Timestamp{0, ClockDomain::reference()}, derive_seed(3003, seed),
                 config.processing_delay);
    std::vector<NtpSample> samples;
    samples.reserve(10'000);
    for (int i = 0; i < 10'000; ++i) samples.push_back(link.exchange());
    const ClockEstimate e = min_filter(samples, fc);
    worst = std::max(worst, std::abs(static_cast<double>(e.theta)));
  }
  c.require(worst <= 40e3, "min-filter |bias| > 40us");
  c.note("worst |bias| over 10 seeds " + format_us(worst));
  return c.outcome;
}

// ---------------------------------------------------------------------------
// 4. Reset-count formula and its empirical convergence fraction.

Outcome criterion_4() {
  Check c;
  c.require(expected_reset_iterations(1_ms, 33_ms, 0.95) == 98,
            "expected_reset_iterations(1ms, 33ms) != 98");

  CameraConfig camera;
  camera.period = 33_ms;
  camera.exposure = 100_us;
  AlignConfig align;
  align.tolerance = 1_ms;
  align.goal_phase = Timestamp{0, ClockDomain::leader()};
  align.max_iterations = 98;
  ClockEstimate estimate;
  estimate.theta = 0;
  estimate.client_domain = ClockDomain::client(1);

  Rng rng(4004);
  const int trials = 10'000;
  int converged = 0;
  for (int t = 0; t < trials; ++t) {
    SimCamera cam(camera, LocalClock(ClockDomain::client(1), 0));
    cam.start_stream(Timestamp{0, ClockDomain::reference()}, rng);
    const AlignResult r =
        reset_sampling_align(cam, align, estimate, Timestamp{0, ClockDomain::reference()}, rng);
    if (r.converged) ++converged;
  }
  const double fraction = static_cast<double>(converged) / trials;
  c.require(std::abs(fraction - 0.95) <= 0.01, "fraction within 98 resets outside 0.95 +/- 0.01");
  char buf[64];
  std::snprintf(buf, sizeof buf, "converged fraction %.4f", fraction);
  c.note(buf);
  return c.outcome;
}

// ---------------------------------------------------------------------------
// 5. Post-reset phase uniformity.

Outcome criterion_5() {
  Check c;
  CameraConfig camera;
  camera.period = 33_ms;
  camera.exposure = 100_us;
  Rng rng(5005);
  std::vector<double> phases;
  phases.reserve(10'000);
  for (int i = 0; i < 10'000; ++i) {
    SimCamera cam(camera, LocalClock(ClockDomain::client(1), 0));
    cam.start_stream(Timestamp{0, ClockDomain::reference()}, rng);
    const FrameRecord first =
        cam.reset_with_sleep(Timestamp{1_s, ClockDomain::reference()}, 1_s, rng);
    phases.push_back(static_cast<double>(floor_mod(first.start.nanos, camera.period)));
  }
  const double d = ks_uniform_statistic(phases, 0.0, static_cast<double>(camera.period));
  c.require(d < 0.02, "KS statistic >= 0.02");
  char buf[64];
  std::snprintf(buf, sizeof buf, "KS statistic %.4f over 10000 resets", d);
  c.note(buf);
  return c.outcome;
}

// ---------------------------------------------------------------------------
// 6. Frame-injection iteration counts.

Outcome criterion_6() {
  Check c;
  CameraConfig camera;
  camera.period = 33_ms;
  camera.exposure = 100_us;
  camera.injection.gain = 2.0;
  camera.injection.period_multiple = 2;
  camera.injection.scanline_quantum = 11_us;
  camera.quantization_sigma = 25_us;
  ClockEstimate estimate;
  estimate.theta = 0;
  estimate.client_domain = ClockDomain::client(1);

  AlignConfig align;
  align.tolerance = 20_us;
  align.goal_phase = Timestamp{0, ClockDomain::leader()};
  align.max_iterations = 100;

  Rng rng(6006);
  int in_envelope = 0;
  double mean = 0.0;
  const int trials = 239;
  for (int t = 0; t < trials; ++t) {
    SimCamera cam(camera, LocalClock(ClockDomain::client(1), 0));
    cam.start_stream(Timestamp{0, ClockDomain::reference()}, rng);
    const AlignResult r =
        frame_injection_align(cam, align, estimate, Timestamp{0, ClockDomain::reference()}, rng);
    mean += r.iterations;
    if (r.iterations >= 3 && r.iterations <= 9) ++in_envelope;
  }
  mean /= trials;
  const double envelope_fraction = static_cast<double>(in_envelope) / trials;
  c.require(envelope_fraction >= 0.95, "iteration count in [3,9] for < 95% of trials");
  c.require(mean >= 4.0 && mean <= 7.0, "batch mean outside [4,7]");

  align.tolerance = 1_ms;
  int one_shot = 0;
  const int loose_trials = 1'000;
  for (int t = 0; t < loose_trials; ++t) {
    SimCamera cam(camera, LocalClock(ClockDomain::client(1), 0));
    cam.start_stream(Timestamp{0, ClockDomain::reference()}, rng);
    const AlignResult r =
        frame_injection_align(cam, align, estimate, Timestamp{0, ClockDomain::reference()}, rng);
    if (r.iterations <= 1) ++one_shot;
  }
  c.require(one_shot >= loose_trials * 95 / 100, "eps=1ms not one-shot in >= 95% of trials");

  char buf[128];
  std::snprintf(buf, sizeof buf, "mean %.2f, in[3,9] %.0f%%, eps=1ms one-shot %.1f%%", mean,
                envelope_fraction * 100.0, one_shot / 10.0);
  c.note(buf);
  return c.outcome;
}

// ---------------------------------------------------------------------------
// 7. End-to-end error over the default 239-trial batch.

Outcome criterion_7(BatchResult& batch_out) {
  Check c;
  ExperimentConfig config = default_config();
  config.trials = 239;
  batch_out = run_batch(config);

  double max_total = 0.0;
  double max_phase = 0.0;
  double phase_sum = 0.0, phase_sq = 0.0;
  double max_residual = 0.0;
  int n = 0;
  for (const TrialResult& t : batch_out.trials) {
    for (const ClientOutcome& out : t.clients) {
      max_total = std::max(max_total, static_cast<double>(out.errors.eps_total));
      max_phase = std::max(max_phase, static_cast<double>(out.errors.eps_phase));
      phase_sum += static_cast<double>(out.errors.signed_phase);
      phase_sq += static_cast<double>(out.errors.signed_phase) *
                  static_cast<double>(out.errors.signed_phase);
      max_residual = std::max(max_residual, std::abs(static_cast<double>(out.errors.residual)));
      ++n;
    }
  }
  const double phase_mean = phase_sum / n;
  const double phase_stdev = std::sqrt(std::max(0.0, phase_sq / n - phase_mean * phase_mean));
  const double phase_stderr = phase_stdev / std::sqrt(static_cast<double>(n));

  c.require(max_total <= 250e3, "max eps_total > 250us");
  c.require(max_phase <= 20e3, "phase error exceeded the 20us tolerance");
  c.require(std::abs(phase_mean) <= 2.0 * phase_stderr, "phase error not zero-mean within 2 stderr");
  c.require(max_residual <= 1e3, "decomposition residual above oracle resolution (1us)");
  c.note("max total " + format_us(max_total) + ", max phase " + format_us(max_phase) +
         ", max residual " + format_us(max_residual));
  return c.outcome;
}

// ---------------------------------------------------------------------------
// 8. Naive trigger baselines versus the method.

Outcome criterion_8(const BatchResult& ours) {
  Check c;
  double ours_mean = 0.0;
  int n = 0;
  for (const TrialResult& t : ours.trials)
    for (const ClientOutcome& out : t.clients) {
      ours_mean += static_cast<double>(out.errors.eps_total);
      ++n;
    }
  ours_mean /= n;

  ExperimentConfig naive = default_config();
  naive.trials = 20;
  naive.naive = NaiveConfig{"wifi", 0, 0};
  naive.oracle_tau = 20_ms;
  const BatchResult batch = run_batch(naive);
  double naive_mean = 0.0;
  int m = 0;
  for (const TrialResult& t : batch.trials)
    for (const ClientOutcome& out : t.clients) {
      naive_mean += static_cast<double>(out.errors.eps_total);
      ++m;
    }
  naive_mean /= m;

  const double ratio = naive_mean / ours_mean;
  c.require(ratio >= 1000.0, "naive/ours ratio < 1000");
  char buf[128];
  std::snprintf(buf, sizeof buf, "naive %.1fms vs ours %s: ratio %.0f", naive_mean / 1e6,
                format_us(ours_mean).c_str(), ratio);
  c.note(buf);
  return c.outcome;
}

// ---------------------------------------------------------------------------
// 9. Oracle fidelity.

Outcome criterion_9() {
  Check c;
  const LedPanel panel{200_us};
  Rng rng(9009);
  for (int i = 0; i < 1'000; ++i) {
    const Duration t = uniform_duration(rng, 0, 3'600_s);
    const CaptureReading r =
        capture_reading(panel, Timestamp{t, ClockDomain::reference()}, 0);
    if (decoded_time(panel, r) != floor_mod(t, panel.full_period())) {
      c.require(false, "instantaneous decode not exact at t=" + std::to_string(t));
      break;
    }
  }
  double worst = 0.0;
  for (int i = 0; i < 1'000; ++i) {
    const Duration t = uniform_duration(rng, 0, 60_s);
    const CaptureReading r =
        capture_reading(panel, Timestamp{t, ClockDomain::reference()}, panel.tau / 2);
    const Duration midpoint = floor_mod(t + panel.tau / 4, panel.full_period());
    Duration err = floor_mod(decoded_time(panel, r) - midpoint, panel.full_period());
    if (err * 2 > panel.full_period()) err -= panel.full_period();
    worst = std::max(worst, std::abs(static_cast<double>(err)));
  }
  c.require(worst < static_cast<double>(panel.tau) / 4.0, "half-column decode error >= tau/4");

  const Duration gap = panel.full_period();  // 20 ms
  const CaptureReading a = capture_reading(panel, Timestamp{5_ms, ClockDomain::reference()}, 100_us);
  const CaptureReading b =
      capture_reading(panel, Timestamp{5_ms + gap, ClockDomain::reference()}, 100_us);
  c.require(measure_pair_error(panel, a, b) == 0, "100tau gap did not alias to zero");
  const LedPanel verify{10_ms};
  const CaptureReading va =
      capture_reading(verify, Timestamp{5_ms, ClockDomain::reference()}, 100_us);
  const CaptureReading vb =
      capture_reading(verify, Timestamp{5_ms + gap, ClockDomain::reference()}, 100_us);
  c.require(std::abs(measure_pair_error(verify, va, vb) + gap) <= 1_us,
            "tau=10ms re-measurement failed to expose the 20ms gap");
  c.note("instantaneous decode exact; sub-tau worst error " + format_us(worst) +
         "; ambiguity resolved at tau=10ms");
  return c.outcome;
}

// ---------------------------------------------------------------------------
// 10. Wire protocol and live loopback session.

Outcome criterion_10() {
  Check c;
  const std::vector<std::uint8_t> golden_probe = {0x53, 0x53, 0x59, 0x4E, 0x01, 0x01,
                                                  0,    0,    0,    0,    0,    0,
                                                  0,    0};
  c.require(encode(SyncProbe{0}) == golden_probe, "probe golden vector mismatch");
  const std::vector<std::uint8_t> golden_reply = {
      0x53, 0x53, 0x59, 0x4E, 0x01, 0x02, 0x01, 0, 0, 0, 0, 0, 0, 0,
      0x02, 0,    0,    0,    0,    0,    0,    0, 0x03, 0, 0, 0, 0, 0, 0, 0};
  c.require(encode(SyncReply{1, 2, 3}) == golden_reply, "reply golden vector mismatch");

  Rng rng(1010);
  for (int i = 0; i < 1'000; ++i) {
    const SyncReply m{static_cast<Duration>(rng()), static_cast<Duration>(rng()),
                      static_cast<Duration>(rng())};
    const auto round = std::get<SyncReply>(decode(encode(WireMessage{m})));
    if (round.t0 != m.t0 || round.t1 != m.t1 || round.t2 != m.t2) {
      c.require(false, "round trip mismatch");
      break;
    }
    const SyncProbe p{static_cast<Duration>(rng())};
    if (std::get<SyncProbe>(decode(encode(WireMessage{p}))).t0 != p.t0) {
      c.require(false, "probe round trip mismatch");
      break;
    }
  }

  try {
    LeaderServer server("127.0.0.1", 0, SteadyClock(ClockDomain::leader()));
    UdpClientTransport transport("127.0.0.1", server.port(),
                                 SteadyClock(ClockDomain::client(1)), 1_s);
    FilterConfig fc;
    fc.sample_count = 300;
    const SyncResult r = sync_client(transport, fc);
    c.require(static_cast<int>(r.samples.size()) == 300, "session did not complete 300 exchanges");
    double mean_phi = 0.0;
    for (const NtpSample& s : r.samples)
      mean_phi += static_cast<double>(estimate_offset_delay(s).phi);
    mean_phi /= static_cast<double>(r.samples.size());
    c.require(static_cast<double>(r.estimate.phi) < mean_phi, "min phi not below mean phi");
    c.note("loopback session: min phi " + format_us(static_cast<double>(r.estimate.phi)) +
           ", mean phi " + format_us(mean_phi));
  } catch (const std::exception& e) {
    c.require(false, std::string("loopback session failed: ") + e.what());
  }
  return c.outcome;
}

// ---------------------------------------------------------------------------
// 11. Byte-identical outputs from repeated CLI runs.

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_11(const std::string& cli_path) {
  Check c;
  if (!std::filesystem::exists(cli_path)) {
    c.require(false, "CLI binary not found at " + cli_path);
    return c.outcome;
  }
  const auto base = std::filesystem::temp_directory_path() / "streamsync_accept";
  std::filesystem::remove_all(base);
  std::filesystem::create_directories(base);
  for (const char* dir : {"a", "b"}) {
    const std::string cmd = cli_path + " simulate --seed 7 --trials 60 --threads 2 --out " +
                            (base / dir).string() + " > /dev/null";
    if (std::system(cmd.c_str()) != 0) {
      c.require(false, std::string("simulate run ") + dir + " failed");
      return c.outcome;
    }
  }
  for (const char* file : {"trials.csv", "summary.json"}) {
    const std::string a = read_file(base / "a" / file);
    const std::string b = read_file(base / "b" / file);
    c.require(!a.empty() && a == b, std::string(file) + " differs between runs");
  }
  c.note("trials.csv and summary.json byte-identical over two runs");
  std::filesystem::remove_all(base);
  return c.outcome;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef STREAMSYNC_CLI_PATH
  std::string cli_path = STREAMSYNC_CLI_PATH;
#else
  std::string cli_path = "streamsync";
#endif
  if (argc > 1) cli_path = argv[1];

  struct Entry {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };

  BatchResult default_batch;  // shared between criteria 7 and 8
  const std::vector<Entry> entries = {
      {1, "handshake estimator exactness", 1.0, criterion_1},
      {2, "mean-filter bias (calibrated link)", 10.0, criterion_2},
      {3, "min-filter bias over seeds", 10.0, criterion_3},
      {4, "reset-count formula and convergence fraction", 30.0, criterion_4},
      {5, "post-reset phase uniformity", 10.0, criterion_5},
      {6, "frame-injection iteration counts", 10.0, criterion_6},
      {7, "end-to-end error decomposition", 60.0,
       [&default_batch] { return criterion_7(default_batch); }},
      {8, "naive baselines ratio", 10.0, [&default_batch] { return criterion_8(default_batch); }},
      {9, "oracle fidelity", 5.0, criterion_9},
      {10, "wire protocol and loopback session", 10.0, criterion_10},
      {11, "deterministic CLI outputs", 60.0, [&cli_path] { return criterion_11(cli_path); }},
  };

  int failures = 0;
  for (const Entry& entry : entries) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = entry.run();
    } catch (const std::exception& e) {
      outcome.passed = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > entry.budget_s) {
      outcome.passed = false;
      outcome.detail += (outcome.detail.empty() ? "" : "; ") + std::string("over runtime budget");
    }
    std::printf("%s criterion %2d: %s (%.2fs) %s%s%s\n", outcome.passed ? "PASS" : "FAIL",
                entry.id, entry.name, seconds, outcome.detail.empty() ? "" : "[",
                outcome.detail.c_str(), outcome.detail.empty() ? "" : "]");
    if (!outcome.passed) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
