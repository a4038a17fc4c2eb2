#ifndef STREAMSYNC_TIMEBASE_HPP_
#define STREAMSYNC_TIMEBASE_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace streamsync {

// All simulation and protocol arithmetic is in signed nanoseconds.
using Duration = std::int64_t;

constexpr Duration operator""_ns(unsigned long long v) { return static_cast<Duration>(v); }
constexpr Duration operator""_us(unsigned long long v) { return static_cast<Duration>(v) * 1000; }
constexpr Duration operator""_ms(unsigned long long v) { return static_cast<Duration>(v) * 1000 * 1000; }
constexpr Duration operator""_s(unsigned long long v) { return static_cast<Duration>(v) * 1000 * 1000 * 1000; }

// Identity of one device's clock timeline. Timestamps are only comparable
// within a domain; cross-domain arithmetic throws DomainMismatch.
class ClockDomain {
 public:
  static constexpr ClockDomain reference() { return ClockDomain(-1); }
  static constexpr ClockDomain leader() { return ClockDomain(0); }
  static constexpr ClockDomain client(int index) {
    return index >= 1 ? ClockDomain(index)
                      : throw std::invalid_argument("client index must be >= 1");
  }

  constexpr bool operator==(const ClockDomain&) const = default;

  constexpr bool is_reference() const { return id_ == -1; }
  constexpr int id() const { return id_; }

  std::string name() const {
    if (id_ == -1) return "reference";
    if (id_ == 0) return "leader";
    return "client-" + std::to_string(id_);
  }

 private:
  explicit constexpr ClockDomain(int id) : id_(id) {}
  int id_;
};

class DomainMismatch : public std::logic_error {
 public:
  DomainMismatch(const ClockDomain& a, const ClockDomain& b)
      : std::logic_error("clock domain mismatch: " + a.name() + " vs " + b.name()) {}
  explicit DomainMismatch(const std::string& what) : std::logic_error(what) {}
};

struct Timestamp {
  Duration nanos = 0;
  ClockDomain domain = ClockDomain::reference();

  friend Duration operator-(const Timestamp& a, const Timestamp& b) {
    if (a.domain != b.domain) throw DomainMismatch(a.domain, b.domain);
    return a.nanos - b.nanos;
  }
  friend Timestamp operator+(const Timestamp& t, Duration d) {
    return Timestamp{t.nanos + d, t.domain};
  }
  friend Timestamp operator-(const Timestamp& t, Duration d) {
    return Timestamp{t.nanos - d, t.domain};
  }
  friend bool operator==(const Timestamp& a, const Timestamp& b) {
    if (a.domain != b.domain) throw DomainMismatch(a.domain, b.domain);
    return a.nanos == b.nanos;
  }
  friend bool operator<(const Timestamp& a, const Timestamp& b) {
    if (a.domain != b.domain) throw DomainMismatch(a.domain, b.domain);
    return a.nanos < b.nanos;
  }
  friend bool operator<=(const Timestamp& a, const Timestamp& b) {
    if (a.domain != b.domain) throw DomainMismatch(a.domain, b.domain);
    return a.nanos <= b.nanos;
  }
  friend bool operator>(const Timestamp& a, const Timestamp& b) { return b < a; }
  friend bool operator>=(const Timestamp& a, const Timestamp& b) { return b <= a; }
};

// Simulated device clock: local = reference + offset + drift_rate * reference.
// drift_rate is dimensionless (parts per unit); 0 means a pure translation.
class LocalClock {
 public:
  LocalClock() = default;
  LocalClock(ClockDomain domain, Duration offset_from_reference, double drift_rate = 0.0)
      : domain_(domain), offset_(offset_from_reference), drift_rate_(drift_rate) {
    if (domain.is_reference())
      throw std::invalid_argument("local clock cannot live in the reference domain");
    if (drift_rate <= -1.0)
      throw std::invalid_argument("drift_rate must be > -1 for a monotone clock");
  }

  Timestamp read(const Timestamp& reference_now) const {
    if (!reference_now.domain.is_reference())
      throw DomainMismatch("clock_read expects a reference-domain timestamp, got " +
                           reference_now.domain.name());
    Duration local = reference_now.nanos + offset_;
    if (drift_rate_ != 0.0)
      local += static_cast<Duration>(std::llround(drift_rate_ * static_cast<double>(reference_now.nanos)));
    return Timestamp{local, domain_};
  }

  Timestamp to_reference(const Timestamp& local) const {
    if (local.domain != domain_) throw DomainMismatch(local.domain, domain_);
    if (drift_rate_ == 0.0) return Timestamp{local.nanos - offset_, ClockDomain::reference()};
    double ref = static_cast<double>(local.nanos - offset_) / (1.0 + drift_rate_);
    return Timestamp{static_cast<Duration>(std::llround(ref)), ClockDomain::reference()};
  }

  ClockDomain domain() const { return domain_; }
  Duration offset() const { return offset_; }
  double drift_rate() const { return drift_rate_; }

 private:
  ClockDomain domain_ = ClockDomain::leader();
  Duration offset_ = 0;
  double drift_rate_ = 0.0;
};

enum class FilterKind { mean, min };

inline const char* to_string(FilterKind k) { return k == FilterKind::mean ? "mean" : "min"; }

// Output of a clock synchronization session: estimated offset of the client
// clock relative to the leader clock, and the round-trip delay backing it.
// client_domain is the responder end of the handshake (the holder of t1/t2)
// and leader_domain the initiator end; when the paper's roles are mirrored,
// as in the socket client that initiates its own probes, theta follows the
// same rule with the labels swapped.
struct ClockEstimate {
  Duration theta = 0;  // client - leader, ns
  Duration phi = 0;    // round-trip delay of the supporting sample(s), ns
  FilterKind filter = FilterKind::min;
  int samples_used = 0;
  double theta_variance = 0.0;  // ns^2, surviving-sample variance (mean filter)
  ClockDomain client_domain = ClockDomain::client(1);
  ClockDomain leader_domain = ClockDomain::leader();
};

// Maps a timestamp between the estimate's client and leader domains.
// client time minus theta is leader time; the round trip is exact.
inline Timestamp convert(const Timestamp& ts, const ClockEstimate& estimate,
                         ClockDomain target_domain) {
  if (ts.domain == target_domain) return ts;
  if (ts.domain == estimate.client_domain && target_domain == estimate.leader_domain)
    return Timestamp{ts.nanos - estimate.theta, target_domain};
  if (ts.domain == estimate.leader_domain && target_domain == estimate.client_domain)
    return Timestamp{ts.nanos + estimate.theta, target_domain};
  throw DomainMismatch("convert: estimate does not relate " + ts.domain.name() + " and " +
                       target_domain.name());
}

// Floor modulo/divide: result of floor_mod is always in [0, m).
constexpr Duration floor_mod(Duration a, Duration m) {
  Duration r = a % m;
  return r < 0 ? r + m : r;
}

constexpr Duration floor_div(Duration a, Duration m) {
  Duration q = a / m;
  return (a % m != 0 && ((a < 0) != (m < 0))) ? q - 1 : q;
}

// Integer halving with round-half-away-from-zero, used by the offset estimator.
constexpr Duration half_round_away(Duration v) {
  return v >= 0 ? (v + 1) / 2 : (v - 1) / 2;
}

}  // namespace streamsync

#endif  // STREAMSYNC_TIMEBASE_HPP_
