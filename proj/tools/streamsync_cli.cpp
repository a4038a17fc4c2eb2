// Command-line front end: seeded simulations reproducing the published
// tables and figures, plus the live UDP leader/client sync roles.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "streamsync/harness.hpp"
#include "streamsync/transport.hpp"

using namespace streamsync;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;  // 0 = keep the config's seed
  int trials = 0;          // 0 = keep the config's trial count
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_trials = true) {
  cmd->add_option("--config", opts.config_path, "experiment config file (key = value lines)");
  cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", opts.seed, "master seed override");
  if (with_trials) cmd->add_option("--trials", opts.trials, "trial count override");
  cmd->add_option("--threads", opts.threads, "worker thread count");
}

ExperimentConfig load_config(const CommonOptions& opts) {
  ExperimentConfig config = default_config();
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw std::runtime_error("cannot open config file " + opts.config_path);
    config = parse_config(in);
  }
  if (opts.seed != 0) config.seed = opts.seed;
  if (opts.trials != 0) config.trials = opts.trials;
  if (opts.threads != 0) config.threads = opts.threads;
  validate(config);
  return config;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

nlohmann::json batch_error_stats(const BatchResult& batch) {
  std::vector<double> total;
  for (const TrialResult& t : batch.trials)
    for (const ClientOutcome& c : t.clients)
      total.push_back(static_cast<double>(c.errors.signed_total));
  double max_abs = 0.0, mean_abs = 0.0;
  for (double v : total) {
    max_abs = std::max(max_abs, std::abs(v));
    mean_abs += std::abs(v);
  }
  mean_abs /= static_cast<double>(total.size());
  const SummaryStats s = summarize(total);
  return nlohmann::json{{"max_error_ns", std::llround(max_abs)},
                        {"mean_abs_error_ns", std::llround(mean_abs)},
                        {"stdev_ns", std::llround(s.stdev)}};
}

int cmd_simulate(const CommonOptions& opts) {
  const ExperimentConfig config = load_config(opts);
  const BatchResult batch = run_batch(config);
  write_batch_outputs(config, batch, opts.out_dir);
  std::cout << "wrote " << opts.out_dir << "/trials.csv and summary.json ("
            << config.trials << " trials)\n";
  return 0;
}

int cmd_table1(const CommonOptions& opts) {
  ExperimentConfig ours = load_config(opts);
  nlohmann::json table;
  {
    const BatchResult batch = run_batch(ours);
    table["our_method"] = batch_error_stats(batch);
  }
  for (const std::string mode : {"wired", "bluetooth", "wifi"}) {
    ExperimentConfig naive = ours;
    naive.trials = 20;
    naive.naive = NaiveConfig{mode, 0, 0};
    naive.oracle_tau = 20_ms;  // the wider panel range used for naive runs
    const BatchResult batch = run_batch(naive);
    table["naive_" + mode] = batch_error_stats(batch);
  }
  const double ours_mean = table["our_method"]["mean_abs_error_ns"].get<double>();
  double worst_ratio = 1e30;
  for (const std::string mode : {"wired", "bluetooth", "wifi"}) {
    const double naive_mean = table["naive_" + mode]["mean_abs_error_ns"].get<double>();
    worst_ratio = std::min(worst_ratio, naive_mean / ours_mean);
  }
  table["min_naive_to_ours_ratio"] = worst_ratio;
  std::filesystem::create_directories(opts.out_dir);
  write_json(opts.out_dir + "/table1.json", table);
  std::cout << "wrote " << opts.out_dir << "/table1.json (worst naive/ours ratio "
            << worst_ratio << ")\n";
  return 0;
}

int cmd_table2(const CommonOptions& opts) {
  const ExperimentConfig config = load_config(opts);
  const BatchResult batch = run_batch(config);
  write_batch_outputs(config, batch, opts.out_dir);
  nlohmann::json j = summarize_batch(config, batch);
  write_json(opts.out_dir + "/table2.json",
             nlohmann::json{{"clock", j["clock"]}, {"phase", j["phase"]}, {"total", j["total"]}});
  std::cout << "wrote " << opts.out_dir << "/table2.json\n";
  return 0;
}

int cmd_table3(const CommonOptions& opts) {
  const ExperimentConfig config = load_config(opts);
  const int count = config.filter.sample_count >= 10'000 ? config.filter.sample_count : 10'000;
  const HandshakeDataset data = generate_handshake_dataset(config, count, 0x7ab1e3);

  std::vector<Duration> out, back;
  for (const SimLink::OneWayLog& l : data.latencies) {
    out.push_back(l.out);
    back.push_back(l.back);
  }
  const SummaryStats so = latency_stats(out);
  const SummaryStats sb = latency_stats(back);

  FilterConfig fc = config.filter;
  fc.kind = FilterKind::mean;
  const ClockEstimate mean_est = mean_filter(data.samples, fc);
  fc.kind = FilterKind::min;
  const ClockEstimate min_est = min_filter(data.samples, fc);

  nlohmann::json j;
  j["messages"] = count;
  j["leader_to_client"] = {{"mean_ns", std::llround(so.mean)}, {"min_ns", std::llround(so.min)}};
  j["client_to_leader"] = {{"mean_ns", std::llround(sb.mean)}, {"min_ns", std::llround(sb.min)}};
  j["abs_latency_difference"] = {
      {"mean_ns", std::llround(std::abs(sb.mean - so.mean))},
      {"min_ns", std::llround(std::abs(sb.min - so.min))}};
  j["round_trip"] = {{"mean_ns", std::llround(so.mean + sb.mean)},
                     {"min_ns", min_est.phi}};
  j["ntp_bias"] = {{"mean_filter_ns", mean_est.theta - data.true_theta},
                   {"min_filter_ns", min_est.theta - data.true_theta}};
  std::filesystem::create_directories(opts.out_dir);
  write_json(opts.out_dir + "/table3.json", j);
  std::cout << "wrote " << opts.out_dir << "/table3.json\n";
  return 0;
}

int cmd_fig5(const CommonOptions& opts) {
  const ExperimentConfig config = load_config(opts);
  const BatchResult batch = run_batch(config);
  const nlohmann::json j = summarize_batch(config, batch);
  std::filesystem::create_directories(opts.out_dir);
  for (const std::string component : {"phase", "clock", "total"}) {
    const auto& h = j["histograms"][component];
    std::ofstream csv(opts.out_dir + "/fig5_" + component + ".csv", std::ios::binary);
    csv << "bin_lo_ns,count\n";
    const auto origin = h["origin_ns"].get<std::int64_t>();
    const auto width = h["bin_width_ns"].get<std::int64_t>();
    const auto& counts = h["counts"];
    for (std::size_t i = 0; i < counts.size(); ++i)
      csv << origin + static_cast<std::int64_t>(i) * width << ',' << counts[i].get<std::int64_t>()
          << '\n';
  }
  std::cout << "wrote " << opts.out_dir << "/fig5_{phase,clock,total}.csv\n";
  return 0;
}

int cmd_fig6(const CommonOptions& opts) {
  const ExperimentConfig config = load_config(opts);
  const HandshakeDataset data = generate_handshake_dataset(config, 10'000, 0xf16);
  std::filesystem::create_directories(opts.out_dir);
  std::ofstream csv(opts.out_dir + "/fig6_one_way_latency.csv", std::ios::binary);
  csv << "latency_ns,direction\n";
  for (const SimLink::OneWayLog& l : data.latencies) {
    csv << l.out << ",leader_to_client\n";
    csv << l.back << ",client_to_leader\n";
  }
  std::cout << "wrote " << opts.out_dir << "/fig6_one_way_latency.csv\n";
  return 0;
}

int cmd_wedge(const CommonOptions& opts) {
  const ExperimentConfig config = load_config(opts);
  const HandshakeDataset data = generate_handshake_dataset(config, 10'000, 0x3ed6e);
  std::filesystem::create_directories(opts.out_dir);
  {
    std::ofstream csv(opts.out_dir + "/wedge.csv", std::ios::binary);
    write_wedge_csv(csv, data.samples);
  }
  std::ofstream bins_csv(opts.out_dir + "/wedge_bins.csv", std::ios::binary);
  bins_csv << "phi_lo_ns,phi_hi_ns,count,theta_variance_ns2\n";
  for (const WedgeBin& b : wedge_bins(data.samples, 4))
    bins_csv << b.phi_lo << ',' << b.phi_hi << ',' << b.count << ',' << b.theta_variance << '\n';
  std::cout << "wrote " << opts.out_dir << "/wedge.csv and wedge_bins.csv\n";
  return 0;
}

int cmd_convergence(const CommonOptions& opts) {
  const ExperimentConfig config = load_config(opts);
  const HandshakeDataset data = generate_handshake_dataset(config, 10'000, 0xc0471);
  FilterConfig fc = config.filter;
  fc.kind = FilterKind::mean;
  const auto mean_curve = convergence_curve(data.samples, fc);
  fc.kind = FilterKind::min;
  const auto min_curve = convergence_curve(data.samples, fc);
  std::filesystem::create_directories(opts.out_dir);
  std::ofstream csv(opts.out_dir + "/convergence.csv", std::ios::binary);
  write_convergence_csv(csv, mean_curve, min_curve);
  std::cout << "wrote " << opts.out_dir << "/convergence.csv\n";
  return 0;
}

// One standalone alignment session against a perturbed camera, with the full
// trace and frame log written out. Final errors are reported in both the raw
// [0, T) and the recentered conventions.
int cmd_align(const CommonOptions& opts, const std::string& method) {
  ExperimentConfig config = load_config(opts);
  config.align_method =
      method == "reset" ? AlignMethod::reset_sampling : AlignMethod::frame_injection;

  Rng rng(derive_seed(config.seed, 0, 1, 0xa116));
  SimCamera camera(config.camera, LocalClock(ClockDomain::client(1), 0));
  camera.start_stream(Timestamp{0, ClockDomain::reference()}, rng);

  AlignConfig align;
  align.tolerance = config.align_tolerance;
  align.random_sleep_bound = config.align_sleep_bound;
  align.max_iterations = config.align_max_iterations;
  align.method = config.align_method;
  align.goal_phase = Timestamp{0, ClockDomain::leader()};
  align.measure_frames = config.measure_frames;
  align.injection_latency = config.injection_latency;

  ClockEstimate estimate;
  estimate.theta = 0;
  estimate.client_domain = ClockDomain::client(1);

  const AlignResult result =
      config.align_method == AlignMethod::frame_injection
          ? frame_injection_align(camera, align, estimate, Timestamp{0, ClockDomain::reference()},
                                  rng)
          : reset_sampling_align(camera, align, estimate, Timestamp{0, ClockDomain::reference()},
                                 rng);

  std::filesystem::create_directories(opts.out_dir);
  {
    std::ofstream csv(opts.out_dir + "/align_trace.csv", std::ios::binary);
    write_align_trace_csv(csv, result.trace);
  }
  const auto frames = camera.next_frame(camera.clock().read(result.end_reference + 500_ms));
  {
    std::ofstream csv(opts.out_dir + "/frames.csv", std::ios::binary);
    write_frames_csv(csv, frames, estimate);
  }
  const Duration raw = floor_mod(result.final_phase_error, config.camera.period);
  std::cout << "method: " << to_string(config.align_method) << "\n"
            << "iterations: " << result.iterations << (result.converged ? "" : " (not converged)")
            << "\n"
            << "final error: raw " << raw << " ns, centered " << result.final_phase_error
            << " ns\n"
            << "simulated alignment time: " << result.sim_elapsed / 1'000'000 << " ms\n"
            << "wrote " << opts.out_dir << "/align_trace.csv and frames.csv\n";
  return 0;
}

int cmd_rig_timing(const CommonOptions& opts) {
  const ExperimentConfig config = load_config(opts);
  const RigTiming t = rig_timing_report(config);
  nlohmann::json j;
  j["clock_sync_total_ns"] = t.clock_sync_total;
  j["align_injection_total_ns"] = t.align_injection_total;
  j["align_reset_total_ns"] = t.align_reset_total;
  j["injection_iterations_mean"] = t.injection_iterations_mean;
  j["reset_iterations_mean"] = t.reset_iterations_mean;
  j["reset_per_iteration_ns"] = t.reset_per_iteration_mean;
  std::filesystem::create_directories(opts.out_dir);
  write_json(opts.out_dir + "/rig_timing.json", j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

bool split_endpoint(const std::string& endpoint, std::string& host, std::uint16_t& port) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos) return false;
  host = endpoint.substr(0, colon);
  const int p = std::stoi(endpoint.substr(colon + 1));
  if (p < 0 || p > 65535) return false;
  port = static_cast<std::uint16_t>(p);
  return true;
}

int cmd_sync_leader(const std::string& bind_endpoint) {
  std::string host;
  std::uint16_t port = 0;
  if (!split_endpoint(bind_endpoint, host, port)) {
    std::cerr << "expected --bind ADDR:PORT\n";
    return 2;
  }
  LeaderServer server(host, port, SteadyClock(ClockDomain::leader()));
  std::cout << "serving sync probes on " << host << ":" << server.port() << " (ctrl-c to stop)\n";
  for (;;) std::this_thread::sleep_for(std::chrono::seconds(3600));
}

int cmd_sync_client(const std::string& leader_endpoint, int samples, const std::string& filter,
                    double outlier_ms, double target_latency_ms, const std::string& samples_out) {
  std::string host;
  std::uint16_t port = 0;
  if (!split_endpoint(leader_endpoint, host, port)) {
    std::cerr << "expected --leader ADDR:PORT\n";
    return 2;
  }
  UdpClientTransport transport(host, port, SteadyClock(ClockDomain::client(1)), 1_s);
  FilterConfig config;
  config.kind = filter == "mean" ? FilterKind::mean : FilterKind::min;
  config.sample_count = samples;
  config.outlier_threshold = static_cast<Duration>(outlier_ms * 1e6);
  if (target_latency_ms > 0)
    config.target_latency_threshold = static_cast<Duration>(target_latency_ms * 1e6);

  const SyncResult result = sync_client(transport, config);
  // This endpoint initiates, so theta estimates the leader clock relative to
  // this device.
  std::cout << "samples: " << result.samples.size() << " (timeouts " << result.timeouts << ")\n"
            << "filter: " << to_string(config.kind) << "\n"
            << "theta (leader - local): " << result.estimate.theta << " ns\n"
            << "phi (supporting round trip): " << result.estimate.phi << " ns\n";
  if (!samples_out.empty()) {
    std::ofstream csv(samples_out, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + samples_out);
    write_samples_csv(csv, result.samples);
    std::cout << "wrote " << samples_out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-stage wireless camera synchronization simulator"};
  app.require_subcommand(1);

  CommonOptions sim_opts, t1_opts, t2_opts, t3_opts, f5_opts, f6_opts, wedge_opts, conv_opts,
      rig_opts;
  auto* simulate = app.add_subcommand("simulate", "run a trial batch from a config");
  add_common(simulate, sim_opts);
  auto* table1 = app.add_subcommand("table1", "naive trigger baselines vs our method");
  add_common(table1, t1_opts);
  auto* table2 = app.add_subcommand("table2", "error decomposition over a trial batch");
  add_common(table2, t2_opts);
  auto* table3 = app.add_subcommand("table3", "latency symmetry and filter bias");
  add_common(table3, t3_opts, false);
  auto* fig5 = app.add_subcommand("fig5", "error histograms as CSV");
  add_common(fig5, f5_opts);
  auto* fig6 = app.add_subcommand("fig6", "one-way latency samples as CSV");
  add_common(fig6, f6_opts, false);
  auto* wedge = app.add_subcommand("wedge", "offset-vs-delay scattergram");
  add_common(wedge, wedge_opts, false);
  auto* convergence = app.add_subcommand("convergence", "mean vs min filter convergence");
  add_common(convergence, conv_opts, false);
  auto* rig = app.add_subcommand("rig-timing", "simulated startup wall times");
  add_common(rig, rig_opts);

  CommonOptions align_opts;
  std::string align_method = "injection";
  auto* align = app.add_subcommand("align", "one alignment session with full trace");
  add_common(align, align_opts, false);
  align->add_option("--method", align_method, "injection or reset")
      ->check(CLI::IsMember({"injection", "reset"}))
      ->capture_default_str();

  std::string bind_endpoint = "0.0.0.0:9470";
  auto* leader = app.add_subcommand("sync-leader", "serve sync probes over UDP");
  leader->add_option("--bind", bind_endpoint, "ADDR:PORT to bind")->capture_default_str();

  std::string leader_endpoint;
  int samples = 300;
  std::string filter = "min";
  double outlier_ms = 10.0;
  double target_latency_ms = 0.0;
  std::string samples_out;
  auto* client = app.add_subcommand("sync-client", "estimate clock offset against a leader");
  client->add_option("--leader", leader_endpoint, "leader ADDR:PORT")->required();
  client->add_option("--samples", samples, "handshake count K")->capture_default_str();
  client->add_option("--filter", filter, "mean or min")
      ->check(CLI::IsMember({"mean", "min"}))
      ->capture_default_str();
  client->add_option("--outlier-ms", outlier_ms, "mean-filter round-trip cutoff")
      ->capture_default_str();
  client->add_option("--target-latency-ms", target_latency_ms,
                     "min-filter early stop round trip (0 = off)");
  client->add_option("--samples-out", samples_out, "write the sample log CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(sim_opts);
    if (table1->parsed()) return cmd_table1(t1_opts);
    if (table2->parsed()) return cmd_table2(t2_opts);
    if (table3->parsed()) return cmd_table3(t3_opts);
    if (fig5->parsed()) return cmd_fig5(f5_opts);
    if (fig6->parsed()) return cmd_fig6(f6_opts);
    if (wedge->parsed()) return cmd_wedge(wedge_opts);
    if (convergence->parsed()) return cmd_convergence(conv_opts);
    if (rig->parsed()) return cmd_rig_timing(rig_opts);
    if (align->parsed()) return cmd_align(align_opts, align_method);
    if (leader->parsed()) return cmd_sync_leader(bind_endpoint);
    if (client->parsed())
      return cmd_sync_client(leader_endpoint, samples, filter, outlier_ms, target_latency_ms,
                             samples_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
