#include "bufsim/transport/wired.hpp"

#include <algorithm>
#include <stdexcept>

namespace bufsim::transport {

WiredLink::WiredLink(double bandwidth_bps, double rtt) : bandwidth_(bandwidth_bps), rtt_(rtt) {
  if (!(bandwidth_ > 0)) throw std::invalid_argument("wired bandwidth must be positive");
  if (!(rtt_ >= 0)) throw std::invalid_argument("wired rtt must be non-negative");
}

SimTime WiredLink::transit(std::uint32_t bytes, SimTime now) {
  SimTime start = std::max(now, free_at_);
  free_at_ = start + 8.0 * bytes / bandwidth_;
  return free_at_ + rtt_ / 2.0;
}

}  // namespace bufsim::transport
