#pragma once

#include <optional>
#include <string>
#include <variant>

#include "bufsim/bufsizing/alt.hpp"
#include "bufsim/bufsizing/ebdp.hpp"

namespace bufsim::bufsizing {

struct FixedLimit {
  double packets = 400.0;
};

/// A*: eBDP reacts to service-rate changes, ALT trims the limit down to what
/// the traffic actually needs; the effective limit is the smaller of the two.
class AStarController {
 public:
  AStarController(EbdpParams ebdp, AltParams alt, SimTime start = 0.0) : ebdp_(ebdp), alt_(alt, start) {}

  double limit() const;
  EbdpController& ebdp() { return ebdp_; }
  const EbdpController& ebdp() const { return ebdp_; }
  AltController& alt() { return alt_; }
  const AltController& alt() const { return alt_; }

 private:
  EbdpController ebdp_;
  AltController alt_;
};

/// Admission rule shared by every policy: admit iff occupancy < limit.
inline bool admit(double occupancy, double limit) { return occupancy < limit; }

/// One MAC-acknowledged frame: head-of-queue time, ACK time, packets carried
/// and the most the frame could have carried. eBDP charges the frame time to
/// `capacity` packets, the per-packet cost of a backlogged queue.
struct ServiceSample {
  SimTime t_s = 0.0;
  SimTime t_e = 0.0;
  int packets = 1;
  int capacity = 1;
};

/// Buffer-sizing policy attached to a queue.
class BufferSizer {
 public:
  using Policy = std::variant<FixedLimit, EbdpController, AltController, AStarController>;

  BufferSizer() : policy_(FixedLimit{}) {}
  explicit BufferSizer(Policy policy) : policy_(std::move(policy)) {}

  static BufferSizer fixed(double packets) { return BufferSizer(FixedLimit{packets}); }
  static BufferSizer ebdp(EbdpParams p) { return BufferSizer(EbdpController(p)); }
  static BufferSizer alt(AltParams p) { return BufferSizer(AltController(p)); }
  static BufferSizer astar(EbdpParams e, AltParams a) { return BufferSizer(AStarController(e, a)); }

  double limit() const;
  std::string name() const;

  void on_service(const ServiceSample& s);
  void on_occupancy(SimTime now, double occupancy);

  /// ALT-based policies need close_interval() every interval() seconds.
  std::optional<double> interval() const;
  void close_interval(SimTime now);

  const Policy& policy() const { return policy_; }
  Policy& policy() { return policy_; }

 private:
  Policy policy_;
};

}  // namespace bufsim::bufsizing
