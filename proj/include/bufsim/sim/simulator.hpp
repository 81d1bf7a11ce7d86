#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace bufsim::sim {

/// Simulated time in seconds.
using SimTime = double;

/// Refers to a scheduled event; stays valid (but inert) after the event fires.
struct EventHandle {
  std::uint32_t slot = UINT32_MAX;
  std::uint32_t generation = 0;

  bool valid() const { return slot != UINT32_MAX; }
};

struct SimulationSummary {
  SimTime clock = 0.0;
  std::uint64_t dispatched = 0;  // during this run_until call
  std::uint64_t pending = 0;
};

/// Single-threaded discrete-event kernel.
///
/// Events are ordered by (time, insertion sequence), so two events at the
/// same instant fire in the order they were scheduled. Callbacks live in a
/// slab of reusable slots; the heap itself only carries 24-byte keys.
class Simulator {
 public:
  using Action = std::function<void()>;

  Simulator() = default;
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  SimTime now() const { return now_; }

  /// Throws std::invalid_argument if `at` lies before the current clock.
  EventHandle schedule(SimTime at, Action action);
  EventHandle schedule_in(SimTime delay, Action action) { return schedule(now_ + delay, std::move(action)); }

  /// Returns false if the event already fired or was already cancelled.
  bool cancel(EventHandle handle);
  bool is_pending(EventHandle handle) const;

  /// Dispatches every event with time <= t_end, then sets the clock to t_end.
  SimulationSummary run_until(SimTime t_end);

  std::uint64_t scheduled_count() const { return scheduled_; }
  std::uint64_t dispatched_count() const { return dispatched_; }
  std::uint64_t cancelled_count() const { return cancelled_; }
  std::uint64_t pending_count() const { return scheduled_ - dispatched_ - cancelled_; }

 private:
  struct Key {
    SimTime time;
    std::uint64_t sequence;
    std::uint32_t slot;
    std::uint32_t generation;
  };
  struct Later {
    bool operator()(const Key& a, const Key& b) const {
      return a.time > b.time || (a.time == b.time && a.sequence > b.sequence);
    }
  };
  struct Slot {
    Action action;
    std::uint32_t generation = 0;
    bool live = false;
  };

  std::uint32_t acquire_slot();
  void release_slot(std::uint32_t slot);

  SimTime now_ = 0.0;
  std::uint64_t next_sequence_ = 0;
  std::vector<Key> heap_;
  std::vector<Slot> slots_;
  std::vector<std::uint32_t> free_slots_;
  std::uint64_t scheduled_ = 0;
  std::uint64_t dispatched_ = 0;
  std::uint64_t cancelled_ = 0;
};

}  // namespace bufsim::sim
