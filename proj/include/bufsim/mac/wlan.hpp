#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bufsim/bufsizing/queue.hpp"
#include "bufsim/mac/contention.hpp"
#include "bufsim/packet.hpp"
#include "bufsim/sim/rng.hpp"
#include "bufsim/sim/simulator.hpp"
#include "bufsim/sim/trace.hpp"

namespace bufsim::mac {

using EntityId = std::size_t;

/// Node id of the access point; stations are numbered from 1.
inline constexpr int kApNode = 0;

struct WlanHooks {
  /// Packet decoded by node `to` at the instant its MAC ACK completes.
  std::function<void(int to, const Packet&)> deliver;
  /// Packet abandoned after the retry limit.
  std::function<void(const Packet&)> mac_drop;
  /// One sample per MAC-ACKed frame.
  std::function<void(EntityId, const bufsizing::ServiceSample&)> service;
  /// Called after packets left the entity's queue (delivered or abandoned).
  std::function<void(EntityId)> dequeued;
};

struct AirtimeStats {
  double busy = 0.0;
  double idle = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t collisions = 0;
  std::uint64_t frame_errors = 0;
  std::uint64_t retry_drops = 0;
};

/// Slot-synchronous CSMA/CA channel shared by every transmit queue in the BSS.
///
/// Channel time alternates between idle periods and busy periods. In an idle
/// period each backlogged entity waits SIFS + aifs slots and then counts its
/// backoff down one slot at a time; the first counter to expire starts a busy
/// period. A single transmitter holds the medium for T_data + SIFS + T_ack
/// (or T_data if the frame is corrupted); concurrent transmitters collide for
/// the longest T_data among them. Countdowns resume at the next idle period.
/// When several queues of the same node expire together, the highest
/// priority one transmits and the others treat it as a collision.
class Wlan {
 public:
  Wlan(sim::Simulator& sim, PhyParams phy, ChannelModel channel, WlanHooks hooks, std::uint64_t seed,
       sim::TraceSink* trace = nullptr);
  Wlan(const Wlan&) = delete;
  Wlan& operator=(const Wlan&) = delete;

  EntityId add_entity(int node, MacClassParams cls, int priority, bufsizing::Queue& queue);

  /// To be called after a packet has been admitted to the entity's queue.
  void notify_enqueue(EntityId id);

  const PhyParams& phy() const { return phy_; }
  const ChannelModel& channel() const { return channel_; }
  const StationMac& mac_state(EntityId id) const { return entities_[id].mac; }
  int node_of(EntityId id) const { return entities_[id].node; }
  std::size_t entity_count() const { return entities_.size(); }
  std::uint64_t entity_successes(EntityId id) const { return entities_[id].successes; }

  /// Busy and idle channel time up to `now`; busy + idle == now.
  AirtimeStats airtime(SimTime now) const;

 private:
  struct Entity {
    int node = 0;
    int priority = 0;
    StationMac mac;
    bufsizing::Queue* queue = nullptr;
    sim::RngStream rng;
    bool contending = false;
    int start_slot = 0;
    std::uint64_t successes = 0;
  };

  enum class Outcome { Success, FrameError, Collision };

  int frame_packets(const Entity& e) const;
  int frame_payload_bytes(const Entity& e, int packets) const;
  void schedule_access();
  void on_access();
  void finish_busy(std::vector<EntityId> transmitters, std::vector<int> packets, Outcome outcome);
  void trace(int station, sim::TraceKind kind, double value);

  sim::Simulator& sim_;
  PhyParams phy_;
  ChannelModel channel_;
  WlanHooks hooks_;
  std::uint64_t seed_;
  sim::TraceSink* trace_;
  sim::RngStream channel_rng_;

  std::vector<Entity> entities_;
  bool busy_ = false;
  SimTime idle_since_ = 0.0;
  SimTime busy_until_ = 0.0;
  sim::EventHandle access_event_;
  int scheduled_slot_ = 0;
  AirtimeStats stats_;

  std::vector<StationMac*> scratch_macs_;
  std::vector<int> scratch_starts_;
  std::vector<EntityId> scratch_ids_;
};

}  // namespace bufsim::mac
