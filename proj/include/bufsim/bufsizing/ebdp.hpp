#pragma once

#include <cstddef>

#include "bufsim/sim/simulator.hpp"

namespace bufsim::bufsizing {

using sim::SimTime;

struct EbdpParams {
  double t_max = 0.200;    // target queuing delay, seconds
  double c = 5.0;          // over-provisioning, packets
  double w = 0.001;        // smoothing weight
  double q_max = 1600.0;   // upper limit, packets

  void validate() const;
};

/// Emulated-BDP controller: tracks a smoothed per-packet MAC service time
/// and sizes the buffer to drain in roughly t_max.
class EbdpController {
 public:
  explicit EbdpController(EbdpParams params = {});

  const EbdpParams& params() const { return params_; }
  bool initialized() const { return samples_ > 0; }
  /// Smoothed mean service time; 0 before the first sample.
  double t_serv() const { return t_serv_; }
  std::size_t samples() const { return samples_; }

  /// Folds one head-of-queue to MAC-ACK interval into T_serv. The first
  /// sample initialises T_serv directly. Throws on t_e <= t_s.
  void update_service_time(SimTime t_s, SimTime t_e);
  /// Same, for a frame carrying several packets: the per-packet share of
  /// the interval enters the average.
  void update_service_time(SimTime t_s, SimTime t_e, int packets);

  /// min(T_max/T_serv + c, Q_max); Q_max before any sample has been seen.
  double limit() const;

 private:
  void fold(double sample);

  EbdpParams params_;
  double t_serv_ = 0.0;
  std::size_t samples_ = 0;
};

/// Fraction of the estimate contributed by the last `updates` samples of an
/// exponential average with weight w: 1 - (1-w)^updates.
double smoothing_coverage(double w, double updates);

}  // namespace bufsim::bufsizing
