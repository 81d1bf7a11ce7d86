#include "bufsim/bufsizing/ebdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bufsim::bufsizing {

void EbdpParams::validate() const {
  if (!(t_max > 0)) throw std::invalid_argument("ebdp.t_max must be positive");
  if (!(c >= 0)) throw std::invalid_argument("ebdp.c must be non-negative");
  if (!(w > 0 && w < 1)) throw std::invalid_argument("ebdp.w must lie in (0,1)");
  if (!(q_max >= c)) throw std::invalid_argument("ebdp.q_max must be at least ebdp.c");
}

EbdpController::EbdpController(EbdpParams params) : params_(params) { params_.validate(); }

void EbdpController::fold(double sample) {
  if (samples_ == 0) {
    t_serv_ = sample;
  } else {
    t_serv_ = (1.0 - params_.w) * t_serv_ + params_.w * sample;
  }
  ++samples_;
}

void EbdpController::update_service_time(SimTime t_s, SimTime t_e) { update_service_time(t_s, t_e, 1); }

void EbdpController::update_service_time(SimTime t_s, SimTime t_e, int packets) {
  if (!(t_e > t_s)) throw std::invalid_argument("service time sample must be positive");
  if (packets < 1) throw std::invalid_argument("service sample must cover at least one packet");
  fold((t_e - t_s) / packets);
}

double EbdpController::limit() const {
  if (samples_ == 0) return params_.q_max;
  return std::min(params_.t_max / t_serv_ + params_.c, params_.q_max);
}

double smoothing_coverage(double w, double updates) { return 1.0 - std::pow(1.0 - w, updates); }

}  // namespace bufsim::bufsizing
