#pragma once

#include <cstdint>
#include <deque>

#include "bufsim/bufsizing/sizer.hpp"
#include "bufsim/packet.hpp"

namespace bufsim::bufsizing {

enum class QueueClass : std::uint8_t { Data, Ack, Shared };

/// Drop-tail interface queue whose capacity is set by a BufferSizer.
///
/// The first frame() packets are the frame handed to the MAC: they stay in
/// the container until the frame is acknowledged or abandoned, but they are
/// not part of the occupancy that admission, the controllers and the metrics
/// see. A limit that falls below the current occupancy blocks admissions but
/// never evicts.
class Queue {
 public:
  explicit Queue(BufferSizer sizer = {}, QueueClass cls = QueueClass::Shared) : sizer_(std::move(sizer)), class_(cls) {}

  /// Enqueues `p` if occupancy < limit (a packet that still fits in the
  /// frame in service is always admitted); otherwise counts a drop.
  bool offer(const Packet& p, SimTime now);
  /// Removes the first n packets (n <= size()).
  void pop(std::size_t n, SimTime now);

  /// Packets waiting behind the frame in service.
  std::size_t occupancy() const { return packets_.size() > frame_ ? packets_.size() - frame_ : 0; }
  /// Packets per MAC frame (the aggregation size); at least 1.
  std::size_t frame() const { return frame_; }
  void set_frame(std::size_t packets);
  /// All stored packets, the frame in service included.
  std::size_t size() const { return packets_.size(); }
  bool empty() const { return packets_.empty(); }
  const Packet& at(std::size_t i) const { return packets_[i]; }
  const Packet& front() const { return packets_.front(); }

  double limit() const { return sizer_.limit(); }
  BufferSizer& sizer() { return sizer_; }
  const BufferSizer& sizer() const { return sizer_; }
  QueueClass queue_class() const { return class_; }

  std::uint64_t drops() const { return drops_; }
  std::uint64_t admitted() const { return admitted_; }

 private:
  std::deque<Packet> packets_;
  BufferSizer sizer_;
  QueueClass class_;
  std::size_t frame_ = 1;
  std::uint64_t drops_ = 0;
  std::uint64_t admitted_ = 0;
};

}  // namespace bufsim::bufsizing
