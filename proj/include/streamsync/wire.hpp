#ifndef STREAMSYNC_WIRE_HPP_
#define STREAMSYNC_WIRE_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "streamsync/timebase.hpp"

namespace streamsync {

// Datagram layout, little-endian payloads:
//   magic "SSYN" | version 0x01 | kind | timestamps (signed 64-bit ns)
// SyncProbe (kind 0x01) carries t0 and is exactly 14 bytes.
// SyncReply (kind 0x02) carries t0, t1, t2 and is exactly 30 bytes.

inline constexpr std::array<std::uint8_t, 4> kWireMagic = {0x53, 0x53, 0x59, 0x4E};
inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::size_t kProbeSize = 14;
inline constexpr std::size_t kReplySize = 30;

struct SyncProbe {
  Duration t0 = 0;
};

struct SyncReply {
  Duration t0 = 0;
  Duration t1 = 0;
  Duration t2 = 0;
};

using WireMessage = std::variant<SyncProbe, SyncReply>;

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> encode(const WireMessage& message);

// Rejects truncated buffers, bad magic, and unknown version or kind with
// WireError; callers count and skip such datagrams.
WireMessage decode(std::span<const std::uint8_t> bytes);

}  // namespace streamsync

#endif  // STREAMSYNC_WIRE_HPP_
