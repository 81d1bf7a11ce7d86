#include "bufsim/bufsizing/alt.hpp"

#include <algorithm>
#include <stdexcept>

namespace bufsim::bufsizing {

void AltParams::validate() const {
  if (!(a1 > 0)) throw std::invalid_argument("alt.a1 must be positive");
  if (!(b1 > 0)) throw std::invalid_argument("alt.b1 must be positive");
  if (!(interval > 0)) throw std::invalid_argument("alt.interval must be positive");
  if (!(q_thr >= 0)) throw std::invalid_argument("alt.q_thr must be non-negative");
  if (!(q_min > 0 && q_min <= q_max)) throw std::invalid_argument("alt.q_min must lie in (0, alt.q_max]");
  if (!(q_init >= q_min && q_init <= q_max)) throw std::invalid_argument("alt.q_init must lie in [alt.q_min, alt.q_max]");
}

AltController::AltController(AltParams params, SimTime start)
    : params_(params), q_alt_(params.q_init), last_change_(start) {
  params_.validate();
}

void AltController::accumulate(double occupancy, double dt) {
  if (dt < 0) throw std::invalid_argument("negative sojourn");
  if (occupancy <= params_.q_thr) {
    t_idle_ += dt;
  } else {
    t_busy_ += dt;
  }
}

void AltController::observe(SimTime now, double occupancy) {
  accumulate(last_occupancy_, now - last_change_);
  last_change_ = now;
  last_occupancy_ = occupancy;
}

double AltController::close_interval() {
  q_alt_ = std::clamp(q_alt_ + params_.a1 * t_idle_ - params_.b1 * t_busy_, params_.q_min, params_.q_max);
  last_idle_ = t_idle_;
  last_busy_ = t_busy_;
  t_idle_ = 0.0;
  t_busy_ = 0.0;
  return q_alt_;
}

double AltController::close_interval(SimTime now) {
  observe(now, last_occupancy_);
  return close_interval();
}

}  // namespace bufsim::bufsizing
