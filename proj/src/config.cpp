#include "streamsync/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace streamsync {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& v) {
  std::size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters in number '" + v + "'");
  return d;
}

std::int64_t parse_int(const std::string& v) {
  std::size_t pos = 0;
  const long long n = std::stoll(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters in integer '" + v + "'");
  return n;
}

}  // namespace

Duration parse_duration(const std::string& text) {
  const std::string v = trim(text);
  if (v.empty()) throw std::invalid_argument("empty duration");
  double scale = 0.0;
  std::string number;
  if (v.size() > 2 && v.substr(v.size() - 2) == "ns") {
    scale = 1.0;
    number = v.substr(0, v.size() - 2);
  } else if (v.size() > 2 && v.substr(v.size() - 2) == "us") {
    scale = 1e3;
    number = v.substr(0, v.size() - 2);
  } else if (v.size() > 2 && v.substr(v.size() - 2) == "ms") {
    scale = 1e6;
    number = v.substr(0, v.size() - 2);
  } else if (v.size() > 1 && v.back() == 's') {
    scale = 1e9;
    number = v.substr(0, v.size() - 1);
  } else if (v == "0") {
    return 0;  // a bare zero needs no unit
  } else {
    throw std::invalid_argument("duration '" + v + "' needs a ns/us/ms/s suffix");
  }
  return static_cast<Duration>(std::llround(parse_double(trim(number)) * scale));
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.camera.period = 33_ms;
  c.camera.exposure = 100_us;
  c.camera.injection.gain = 2.0;            // modeled handset: e = T + delta/2
  c.camera.injection.period_multiple = 2;   // shifts by 2T + delta
  c.camera.injection.scanline_quantum = 11_us;  // period / 3000
  c.camera.quantization_sigma = 25_us;
  return c;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c = default_config();
  NaiveConfig naive;
  bool naive_set = false;

  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_number) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    try {
      if (key == "devices") c.devices = static_cast<int>(parse_int(value));
      else if (key == "trials") c.trials = static_cast<int>(parse_int(value));
      else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(value));
      else if (key == "threads") c.threads = static_cast<int>(parse_int(value));
      else if (key == "clock_offset_spread") c.clock_offset_spread = parse_duration(value);
      else if (key == "clock_drift_spread") c.clock_drift_spread = parse_double(value);
      else if (key == "processing_delay") c.processing_delay = parse_duration(value);
      else if (key == "camera.period") c.camera.period = parse_duration(value);
      else if (key == "camera.exposure") c.camera.exposure = parse_duration(value);
      else if (key == "camera.start_latency_min") c.camera.start_latency_min = parse_duration(value);
      else if (key == "camera.start_latency_max") c.camera.start_latency_max = parse_duration(value);
      else if (key == "camera.injection_gain") c.camera.injection.gain = parse_double(value);
      else if (key == "camera.injection_period_multiple")
        c.camera.injection.period_multiple = static_cast<int>(parse_int(value));
      else if (key == "camera.scanline_quantum")
        c.camera.injection.scanline_quantum = parse_duration(value);
      else if (key == "camera.quantization_sigma") c.camera.quantization_sigma = parse_duration(value);
      else if (key == "latency.leader_to_client.base")
        c.latency_leader_to_client.base = parse_duration(value);
      else if (key == "latency.leader_to_client.jitter")
        c.latency_leader_to_client.jitter_scale = parse_duration(value);
      else if (key == "latency.client_to_leader.base")
        c.latency_client_to_leader.base = parse_duration(value);
      else if (key == "latency.client_to_leader.jitter")
        c.latency_client_to_leader.jitter_scale = parse_duration(value);
      else if (key == "latency.spike_probability") c.spike_probability = parse_double(value);
      else if (key == "latency.spike_scale") c.spike_scale = parse_duration(value);
      else if (key == "filter.kind") {
        if (value == "mean") c.filter.kind = FilterKind::mean;
        else if (value == "min") c.filter.kind = FilterKind::min;
        else throw std::invalid_argument("filter.kind must be mean or min");
      } else if (key == "filter.samples")
        c.filter.sample_count = static_cast<int>(parse_int(value));
      else if (key == "filter.outlier_threshold") c.filter.outlier_threshold = parse_duration(value);
      else if (key == "filter.target_latency") {
        const Duration d = parse_duration(value);
        c.filter.target_latency_threshold = d > 0 ? std::optional<Duration>(d) : std::nullopt;
      } else if (key == "sync.interleaved") c.sync_interleaved = parse_bool(value);
      else if (key == "sync.resync_period") c.resync_period = parse_duration(value);
      else if (key == "align.method") {
        if (value == "injection") c.align_method = AlignMethod::frame_injection;
        else if (value == "reset") c.align_method = AlignMethod::reset_sampling;
        else throw std::invalid_argument("align.method must be injection or reset");
      } else if (key == "align.tolerance") c.align_tolerance = parse_duration(value);
      else if (key == "align.sleep_bound") c.align_sleep_bound = parse_duration(value);
      else if (key == "align.max_iterations")
        c.align_max_iterations = static_cast<int>(parse_int(value));
      else if (key == "align.injection_latency") c.injection_latency = parse_duration(value);
      else if (key == "align.measure_frames") c.measure_frames = static_cast<int>(parse_int(value));
      else if (key == "align.perturb_phase") c.perturb_phase = parse_bool(value);
      else if (key == "oracle.tau") c.oracle_tau = parse_duration(value);
      else if (key == "oracle.exposure") c.oracle_exposure = parse_duration(value);
      else if (key == "naive.mode") {
        if (value != "none") {
          naive.mode = value;
          naive_set = true;
        }
      } else if (key == "naive.mean") {
        naive.mean = parse_duration(value);
      } else if (key == "naive.stdev") {
        naive.stdev = parse_duration(value);
      } else if (key == "hist.phase_bin") c.phase_bin = parse_duration(value);
      else if (key == "hist.clock_bin") c.clock_bin = parse_duration(value);
      else if (key == "hist.total_bin") c.total_bin = parse_duration(value);
      else throw std::invalid_argument("unknown config key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(line_number) + ": " + e.what());
    }
  }

  if (naive_set) c.naive = naive;
  validate(c);
  return c;
}

ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

void validate(const ExperimentConfig& c) {
  if (c.devices < 2) throw std::invalid_argument("need at least a leader and one client");
  if (c.trials < 1) throw std::invalid_argument("trial count must be >= 1");
  if (c.threads < 1) throw std::invalid_argument("thread count must be >= 1");
  if (c.clock_offset_spread < 0) throw std::invalid_argument("clock offset spread must be >= 0");
  if (c.processing_delay < 0) throw std::invalid_argument("processing delay must be >= 0");
  if (c.camera.period <= 0) throw std::invalid_argument("camera period must be positive");
  if (c.align_tolerance <= 0 || c.align_tolerance >= c.camera.period / 2)
    throw std::invalid_argument("align tolerance must be in (0, period/2)");
  if (c.align_sleep_bound <= 0) throw std::invalid_argument("align sleep bound must be positive");
  if (c.filter.sample_count < 1) throw std::invalid_argument("filter sample count must be >= 1");
  if (c.oracle_tau <= 0) throw std::invalid_argument("oracle tau must be positive");
  if (c.oracle_exposure <= 0 || c.oracle_exposure >= c.oracle_tau)
    throw std::invalid_argument("oracle exposure must be in (0, tau)");
  if (c.naive && c.naive->mode != "wired" && c.naive->mode != "bluetooth" &&
      c.naive->mode != "wifi")
    throw std::invalid_argument("naive.mode must be wired, bluetooth, or wifi");
  c.latency_model();  // throws on invalid latency parameters
}

}  // namespace streamsync
