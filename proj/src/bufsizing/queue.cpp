#include "bufsim/bufsizing/queue.hpp"

#include <stdexcept>

namespace bufsim::bufsizing {

bool Queue::offer(const Packet& p, SimTime now) {
  if (packets_.size() >= frame_ && !admit(static_cast<double>(occupancy()), sizer_.limit())) {
    ++drops_;
    return false;
  }
  packets_.push_back(p);
  ++admitted_;
  sizer_.on_occupancy(now, static_cast<double>(occupancy()));
  return true;
}

void Queue::set_frame(std::size_t packets) {
  if (packets == 0) throw std::invalid_argument("frame must hold at least one packet");
  frame_ = packets;
}

void Queue::pop(std::size_t n, SimTime now) {
  if (n > packets_.size()) throw std::logic_error("pop beyond queue occupancy");
  packets_.erase(packets_.begin(), packets_.begin() + static_cast<std::ptrdiff_t>(n));
  sizer_.on_occupancy(now, static_cast<double>(occupancy()));
}

}  // namespace bufsim::bufsizing
