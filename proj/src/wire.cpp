#include "streamsync/wire.hpp"

#include <cstring>

namespace streamsync {

namespace {

constexpr std::uint8_t kKindProbe = 0x01;
constexpr std::uint8_t kKindReply = 0x02;

void put_i64le(std::vector<std::uint8_t>& out, Duration v) {
  auto u = static_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

Duration get_i64le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  return static_cast<Duration>(u);
}

}  // namespace

std::vector<std::uint8_t> encode(const WireMessage& message) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kWireMagic.begin(), kWireMagic.end());
  out.push_back(kWireVersion);
  if (const auto* probe = std::get_if<SyncProbe>(&message)) {
    out.push_back(kKindProbe);
    put_i64le(out, probe->t0);
  } else {
    const auto& reply = std::get<SyncReply>(message);
    out.push_back(kKindReply);
    put_i64le(out, reply.t0);
    put_i64le(out, reply.t1);
    put_i64le(out, reply.t2);
  }
  return out;
}

WireMessage decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6) throw WireError("truncated datagram");
  if (std::memcmp(bytes.data(), kWireMagic.data(), kWireMagic.size()) != 0)
    throw WireError("bad magic");
  if (bytes[4] != kWireVersion) throw WireError("unknown version");
  switch (bytes[5]) {
    case kKindProbe:
      if (bytes.size() != kProbeSize) throw WireError("bad probe length");
      return SyncProbe{get_i64le(bytes, 6)};
    case kKindReply:
      if (bytes.size() != kReplySize) throw WireError("bad reply length");
      return SyncReply{get_i64le(bytes, 6), get_i64le(bytes, 14), get_i64le(bytes, 22)};
    default:
      throw WireError("unknown message kind");
  }
}

}  // namespace streamsync
