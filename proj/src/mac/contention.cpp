#include "bufsim/mac/contention.hpp"

#include <algorithm>
#include <climits>
#include <stdexcept>

namespace bufsim::mac {

void StationMac::on_success(sim::RngStream& rng) {
  cw = cls.cw_min;
  retries = 0;
  draw_backoff(rng);
}

bool StationMac::on_failure(sim::RngStream& rng, int retry_limit) {
  ++retries;
  if (retries > retry_limit) {
    retries = 0;
    cw = cls.cw_min;
    draw_backoff(rng);
    return true;
  }
  cw = std::min(cw * 2, cls.cw_max);
  draw_backoff(rng);
  return false;
}

SlotOutcome contention_step(std::span<StationMac> stations, sim::RngStream& rng, int retry_limit) {
  SlotOutcome out;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (stations[i].backoff == 0) out.transmitters.push_back(i);
  }
  if (out.transmitters.empty()) {
    out.kind = SlotKind::Idle;
    for (auto& s : stations) --s.backoff;
  } else if (out.transmitters.size() == 1) {
    out.kind = SlotKind::Success;
  } else {
    out.kind = SlotKind::Collision;
    for (std::size_t i : out.transmitters) stations[i].on_failure(rng, retry_limit);
  }
  return out;
}

std::vector<std::size_t> skip_to_access(std::span<StationMac*> stations, std::span<const int> start_slots, int& tx_slot) {
  if (stations.size() != start_slots.size()) throw std::invalid_argument("skip_to_access: size mismatch");
  std::vector<std::size_t> winners;
  tx_slot = INT_MAX;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    int expiry = start_slots[i] + stations[i]->backoff;
    if (expiry < tx_slot) {
      tx_slot = expiry;
      winners.clear();
    }
    if (expiry == tx_slot) winners.push_back(i);
  }
  for (std::size_t i = 0; i < stations.size(); ++i) {
    int counted = tx_slot - start_slots[i];
    if (counted > 0) stations[i]->backoff -= counted;
  }
  return winners;
}

TxResult transmit_attempt(StationMac& winner, const ChannelModel& channel, int frame_bytes, int retry_limit,
                          sim::RngStream& rng) {
  double p_err = channel.frame_error_probability(frame_bytes);
  if (p_err > 0.0 && rng.bernoulli(p_err)) {
    return winner.on_failure(rng, retry_limit) ? TxResult::RetryExhausted : TxResult::FrameError;
  }
  winner.on_success(rng);
  return TxResult::Success;
}

}  // namespace bufsim::mac
