#pragma once

#include <cstdint>
#include <functional>

#include "bufsim/packet.hpp"
#include "bufsim/sim/rng.hpp"
#include "bufsim/sim/simulator.hpp"
#include "bufsim/transport/tcp.hpp"

namespace bufsim::transport {

struct UdpConfig {
  std::uint32_t packet_bytes = 64;
  double interval = 1.0;  // mean inter-packet gap, seconds
  bool poisson = true;    // exponential gaps; false gives a constant bit rate
  void validate() const;
};

struct UdpStats {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t delivered_bytes = 0;
  std::uint64_t drops = 0;
};

/// Open-loop datagram source. Generation does not react to loss.
class UdpFlow {
 public:
  using Emit = std::function<void(const Packet&)>;

  UdpFlow(std::uint32_t id, Direction dir, int station, UdpConfig cfg, sim::Simulator& sim, sim::RngStream rng,
          Emit send);
  UdpFlow(const UdpFlow&) = delete;
  UdpFlow& operator=(const UdpFlow&) = delete;

  void start();
  void on_receive(const Packet& p);
  void on_dropped(const Packet&) { ++stats_.drops; }

  std::uint32_t id() const { return id_; }
  Direction direction() const { return dir_; }
  int station() const { return station_; }
  const UdpConfig& config() const { return cfg_; }
  const UdpStats& stats() const { return stats_; }

 private:
  void emit_next();
  double gap();

  std::uint32_t id_;
  Direction dir_;
  int station_;
  UdpConfig cfg_;
  sim::Simulator& sim_;
  sim::RngStream rng_;
  Emit send_;
  std::int64_t seq_ = 0;
  UdpStats stats_;
};

}  // namespace bufsim::transport
