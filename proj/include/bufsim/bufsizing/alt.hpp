#pragma once

#include "bufsim/sim/simulator.hpp"

namespace bufsim::bufsizing {

using sim::SimTime;

struct AltParams {
  double a1 = 10.0;        // increase gain, packets per idle second
  double b1 = 1.0;         // decrease gain, packets per busy second
  double interval = 1.0;   // observation interval t, seconds
  double q_thr = 0.0;      // occupancy at or below this counts as idle
  double q_min = 5.0;
  double q_max = 1600.0;
  double q_init = 30.0;

  void validate() const;
};

/// Adaptive Limit Tuning: an integrator that grows the limit while the queue
/// sits at or below q_thr and shrinks it while the queue is above q_thr.
///
/// Occupancy is reported on every change through observe(), so idle and busy
/// time are accumulated exactly rather than by polling.
class AltController {
 public:
  explicit AltController(AltParams params = {}, SimTime start = 0.0);

  const AltParams& params() const { return params_; }
  double limit() const { return q_alt_; }
  double idle_time() const { return t_idle_; }
  double busy_time() const { return t_busy_; }
  /// Idle and busy time of the most recently closed interval.
  double last_idle_time() const { return last_idle_; }
  double last_busy_time() const { return last_busy_; }

  /// Credits dt seconds spent at `occupancy` to the idle or busy accumulator.
  void accumulate(double occupancy, double dt);

  /// Event-driven form: closes the sojourn at the previous occupancy and
  /// starts a new one at `occupancy`.
  void observe(SimTime now, double occupancy);

  /// Applies q += a1*t_i - b1*t_b, clamps to [q_min, q_max], resets the
  /// accumulators and returns the new limit.
  double close_interval();
  /// Event-driven form: first credits the tail of the current sojourn up to `now`.
  double close_interval(SimTime now);

 private:
  AltParams params_;
  double q_alt_;
  double t_idle_ = 0.0;
  double t_busy_ = 0.0;
  double last_idle_ = 0.0;
  double last_busy_ = 0.0;
  SimTime last_change_;
  double last_occupancy_ = 0.0;
};

}  // namespace bufsim::bufsizing
