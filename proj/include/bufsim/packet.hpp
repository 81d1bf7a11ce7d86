#pragma once

#include <cstdint>

namespace bufsim {

enum class PacketKind : std::uint8_t { TcpData, TcpAck, TcpSyn, TcpSynAck, Udp };

/// A network-layer packet. `station` names the WLAN station at the wireless
/// end of the flow; `uplink` is true while the packet travels from that
/// station towards the wired side.
struct Packet {
  std::uint32_t flow = 0;
  PacketKind kind = PacketKind::TcpData;
  bool uplink = false;
  bool retransmission = false;
  int station = 0;
  std::uint32_t bytes = 0;
  std::int64_t seq = 0;
  std::int64_t cum_ack = 0;
  /// Sender timestamp for data; echoed sender timestamp for ACKs.
  double timestamp = 0.0;
};

inline bool is_ack_class(PacketKind k) { return k == PacketKind::TcpAck || k == PacketKind::TcpSynAck; }

}  // namespace bufsim
