#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bufsim/mac/phy.hpp"
#include "bufsim/sim/rng.hpp"
#include "bufsim/sim/simulator.hpp"

namespace bufsim::mac {

using sim::SimTime;

/// Backoff state of one contending transmit queue.
struct StationMac {
  int id = 0;
  MacClassParams cls{};
  int backoff = 0;
  int cw = 0;
  int retries = 0;
  SimTime head_since = 0.0;

  StationMac() = default;
  StationMac(int station_id, MacClassParams params) : id(station_id), cls(params), cw(params.cw_min) {}

  void draw_backoff(sim::RngStream& rng) { backoff = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cw))); }

  /// MAC ACK received: window back to cw_min, fresh countdown.
  void on_success(sim::RngStream& rng);
  /// Collision or corrupted frame. Doubles cw (capped) and redraws; when the
  /// retry count passes retry_limit the frame is abandoned, the counters are
  /// reset and true is returned.
  bool on_failure(sim::RngStream& rng, int retry_limit);
};

enum class SlotKind { Idle, Success, Collision };

struct SlotOutcome {
  SlotKind kind = SlotKind::Idle;
  std::vector<std::size_t> transmitters;  // indices into the station span
};

/// One slot of DCF contention among backlogged stations of a common class.
/// No counter at zero: idle slot, every counter decrements. Exactly one at
/// zero: that station transmits (its state is updated by transmit_attempt).
/// Two or more: collision, each collider backs off via on_failure.
SlotOutcome contention_step(std::span<StationMac> stations, sim::RngStream& rng, int retry_limit);

/// Jumps over idle slots to the next transmission. Station i starts counting
/// down at slot start_slots[i] of the current idle period; the earliest
/// expiring counters transmit and everyone else is decremented by the slots
/// they actually counted. Returns the transmitters and sets tx_slot.
/// Collision bookkeeping is left to the caller.
std::vector<std::size_t> skip_to_access(std::span<StationMac*> stations, std::span<const int> start_slots, int& tx_slot);

enum class TxResult { Success, FrameError, RetryExhausted };

/// Sends the winner's frame through the error channel and updates its
/// backoff state according to the outcome.
TxResult transmit_attempt(StationMac& winner, const ChannelModel& channel, int frame_bytes, int retry_limit,
                          sim::RngStream& rng);

}  // namespace bufsim::mac
