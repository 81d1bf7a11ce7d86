#pragma once

#include <cstdint>

#include "bufsim/sim/simulator.hpp"

namespace bufsim::transport {

using sim::SimTime;

/// One direction of the wired backhaul: a FIFO serialiser followed by half
/// the round-trip propagation delay.
class WiredLink {
 public:
  WiredLink(double bandwidth_bps = 100e6, double rtt = 0.200);

  double bandwidth() const { return bandwidth_; }
  double rtt() const { return rtt_; }

  /// Arrival time at the far end of a packet handed to the link at `now`.
  /// An idle link gives now + rtt/2 + 8*bytes/bandwidth; a busy one queues
  /// behind earlier packets, so arrivals keep their send order.
  SimTime transit(std::uint32_t bytes, SimTime now);

 private:
  double bandwidth_;
  double rtt_;
  SimTime free_at_ = 0.0;
};

}  // namespace bufsim::transport
