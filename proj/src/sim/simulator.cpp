#include "bufsim/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bufsim::sim {

std::uint32_t Simulator::acquire_slot() {
  if (!free_slots_.empty()) {
    std::uint32_t s = free_slots_.back();
    free_slots_.pop_back();
    return s;
  }
  slots_.emplace_back();
  return static_cast<std::uint32_t>(slots_.size() - 1);
}

void Simulator::release_slot(std::uint32_t slot) {
  Slot& s = slots_[slot];
  s.action = nullptr;
  s.live = false;
  ++s.generation;
  free_slots_.push_back(slot);
}

EventHandle Simulator::schedule(SimTime at, Action action) {
  if (!(at >= now_)) {
    throw std::invalid_argument("cannot schedule event at t=" + std::to_string(at) +
                                " before current clock t=" + std::to_string(now_));
  }
  std::uint32_t slot = acquire_slot();
  Slot& s = slots_[slot];
  s.action = std::move(action);
  s.live = true;
  heap_.push_back(Key{at, next_sequence_++, slot, s.generation});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  ++scheduled_;
  return EventHandle{slot, s.generation};
}

bool Simulator::is_pending(EventHandle handle) const {
  if (!handle.valid() || handle.slot >= slots_.size()) return false;
  const Slot& s = slots_[handle.slot];
  return s.live && s.generation == handle.generation;
}

bool Simulator::cancel(EventHandle handle) {
  if (!is_pending(handle)) return false;
  // The heap key stays behind; its generation no longer matches once the
  // slot is recycled, and an unrecycled dead slot is skipped on pop.
  Slot& s = slots_[handle.slot];
  s.action = nullptr;
  s.live = false;
  ++cancelled_;
  return true;
}

SimulationSummary Simulator::run_until(SimTime t_end) {
  if (!(t_end >= now_)) {
    throw std::invalid_argument("run_until target lies before current clock");
  }
  SimulationSummary summary;
  while (!heap_.empty() && heap_.front().time <= t_end) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Key key = heap_.back();
    heap_.pop_back();
    Slot& s = slots_[key.slot];
    if (s.generation != key.generation) continue;
    if (!s.live) {
      // cancelled; the slot can be recycled now that its key is gone
      release_slot(key.slot);
      continue;
    }
    now_ = key.time;
    Action action = std::move(s.action);
    release_slot(key.slot);
    ++dispatched_;
    ++summary.dispatched;
    action();
  }
  now_ = t_end;
  summary.clock = now_;
  summary.pending = pending_count();
  return summary;
}

}  // namespace bufsim::sim
