#include "bufsim/mac/wlan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bufsim::mac {

Wlan::Wlan(sim::Simulator& sim, PhyParams phy, ChannelModel channel, WlanHooks hooks, std::uint64_t seed,
           sim::TraceSink* trace)
    : sim_(sim),
      phy_(phy),
      channel_(channel),
      hooks_(std::move(hooks)),
      seed_(seed),
      trace_(trace),
      channel_rng_(seed, 0xC4A77E1ULL),
      idle_since_(sim.now()) {
  phy_.validate();
  channel_.validate();
}

EntityId Wlan::add_entity(int node, MacClassParams cls, int priority, bufsizing::Queue& queue) {
  cls.validate();
  queue.set_frame(static_cast<std::size_t>(channel_.aggregation_k));
  Entity e{node, priority, StationMac(node, cls), &queue, sim::RngStream(seed_, 1000 + entities_.size()), false, 0, 0};
  entities_.push_back(std::move(e));
  return entities_.size() - 1;
}

void Wlan::trace(int station, sim::TraceKind kind, double value) {
  if (trace_) trace_->record({sim_.now(), station, kind, value});
}

int Wlan::frame_packets(const Entity& e) const {
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(channel_.aggregation_k), e.queue->size()));
}

int Wlan::frame_payload_bytes(const Entity& e, int packets) const {
  int bytes = 0;
  for (int i = 0; i < packets; ++i) bytes += static_cast<int>(e.queue->at(static_cast<std::size_t>(i)).bytes);
  return bytes;
}

void Wlan::notify_enqueue(EntityId id) {
  Entity& e = entities_.at(id);
  if (e.contending || e.queue->empty()) return;
  e.contending = true;
  e.mac.head_since = sim_.now();
  e.mac.draw_backoff(e.rng);
  if (busy_) return;  // counting starts when the medium goes idle again

  double elapsed_slots = (sim_.now() - idle_since_ - phy_.sifs) / phy_.slot;
  int first = elapsed_slots <= 0 ? 0 : static_cast<int>(std::ceil(elapsed_slots - 1e-9));
  e.start_slot = std::max(e.mac.cls.aifs, first);
  int expiry = e.start_slot + e.mac.backoff;
  if (!sim_.is_pending(access_event_) || expiry < scheduled_slot_) {
    sim_.cancel(access_event_);
    scheduled_slot_ = expiry;
    SimTime at = std::max(sim_.now(), idle_since_ + phy_.sifs + expiry * phy_.slot);
    access_event_ = sim_.schedule(at, [this] { on_access(); });
  }
}

void Wlan::schedule_access() {
  sim_.cancel(access_event_);
  int best = -1;
  for (const Entity& e : entities_) {
    if (!e.contending) continue;
    int expiry = e.start_slot + e.mac.backoff;
    if (best < 0 || expiry < best) best = expiry;
  }
  if (best < 0) return;
  scheduled_slot_ = best;
  SimTime at = std::max(sim_.now(), idle_since_ + phy_.sifs + best * phy_.slot);
  access_event_ = sim_.schedule(at, [this] { on_access(); });
}

void Wlan::on_access() {
  scratch_macs_.clear();
  scratch_starts_.clear();
  scratch_ids_.clear();
  for (EntityId i = 0; i < entities_.size(); ++i) {
    Entity& e = entities_[i];
    if (!e.contending) continue;
    scratch_macs_.push_back(&e.mac);
    scratch_starts_.push_back(e.start_slot);
    scratch_ids_.push_back(i);
  }
  if (scratch_ids_.empty()) return;
  int tx_slot = 0;
  std::vector<std::size_t> winners = skip_to_access(scratch_macs_, scratch_starts_, tx_slot);

  stats_.idle += sim_.now() - idle_since_;

  // Resolve simultaneous expiries inside one node: highest priority goes.
  std::vector<EntityId> transmitters;
  std::vector<EntityId> internal_losers;
  for (std::size_t w : winners) {
    EntityId id = scratch_ids_[w];
    auto same_node = std::find_if(transmitters.begin(), transmitters.end(),
                                  [&](EntityId t) { return entities_[t].node == entities_[id].node; });
    if (same_node == transmitters.end()) {
      transmitters.push_back(id);
    } else if (entities_[id].priority > entities_[*same_node].priority) {
      internal_losers.push_back(*same_node);
      *same_node = id;
    } else {
      internal_losers.push_back(id);
    }
  }

  std::vector<Packet> abandoned;
  auto abandon = [&](Entity& e, int packets) {
    for (int i = 0; i < packets; ++i) abandoned.push_back(e.queue->at(static_cast<std::size_t>(i)));
    e.queue->pop(static_cast<std::size_t>(packets), sim_.now());
    e.mac.head_since = sim_.now();
    ++stats_.retry_drops;
  };
  std::vector<EntityId> emptied;
  for (EntityId id : internal_losers) {
    Entity& e = entities_[id];
    if (e.mac.on_failure(e.rng, phy_.retry_limit)) {
      abandon(e, frame_packets(e));
      emptied.push_back(id);
    }
  }

  std::vector<int> packets;
  double busy = 0.0;
  Outcome outcome;
  for (EntityId id : transmitters) {
    const Entity& e = entities_[id];
    int n = frame_packets(e);
    packets.push_back(n);
    busy = std::max(busy, data_duration(frame_payload_bytes(e, n), phy_));
    trace(e.node, sim::TraceKind::TxStart, n);
  }
  if (transmitters.size() == 1) {
    Entity& e = entities_[transmitters.front()];
    int frame_bytes = kMacHeaderBytes + frame_payload_bytes(e, packets.front());
    double p_err = channel_.frame_error_probability(frame_bytes);
    if (p_err > 0.0 && e.rng.bernoulli(p_err)) {
      outcome = Outcome::FrameError;
    } else {
      outcome = Outcome::Success;
      busy += phy_.sifs + ack_duration(phy_);
    }
  } else {
    outcome = Outcome::Collision;
  }

  busy_ = true;
  busy_until_ = sim_.now() + busy;
  stats_.busy += busy;
  sim_.schedule(busy_until_, [this, transmitters = std::move(transmitters), packets = std::move(packets), outcome] {
    finish_busy(transmitters, packets, outcome);
  });

  for (auto& p : abandoned) {
    if (hooks_.mac_drop) hooks_.mac_drop(p);
  }
  for (EntityId id : emptied) {
    if (hooks_.dequeued) hooks_.dequeued(id);
  }
}

void Wlan::finish_busy(std::vector<EntityId> transmitters, std::vector<int> packets, Outcome outcome) {
  busy_ = false;
  idle_since_ = sim_.now();

  struct Delivery {
    int to;
    Packet packet;
  };
  std::vector<Delivery> deliveries;
  std::vector<Packet> abandoned;
  std::vector<EntityId> dequeued;
  bufsizing::ServiceSample sample;
  EntityId sample_entity = 0;
  bool have_sample = false;

  auto take = [&](Entity& e, int n, bool delivered) {
    for (int i = 0; i < n; ++i) {
      const Packet& p = e.queue->at(static_cast<std::size_t>(i));
      if (delivered) {
        int to = e.node == kApNode ? p.station : kApNode;
        deliveries.push_back({to, p});
      } else {
        abandoned.push_back(p);
      }
    }
    e.queue->pop(static_cast<std::size_t>(n), sim_.now());
    e.mac.head_since = sim_.now();
  };

  if (outcome == Outcome::Success) {
    EntityId id = transmitters.front();
    Entity& e = entities_[id];
    int n = packets.front();
    double data_bytes = 0.0;
    for (int i = 0; i < n; ++i) {
      const Packet& p = e.queue->at(static_cast<std::size_t>(i));
      if (p.kind == PacketKind::TcpData) data_bytes += p.bytes;
    }
    sample = {e.mac.head_since, sim_.now(), n, channel_.aggregation_k};
    sample_entity = id;
    have_sample = true;
    e.mac.on_success(e.rng);
    ++e.successes;
    ++stats_.successes;
    take(e, n, true);
    dequeued.push_back(id);
    e.queue->sizer().on_service(sample);
    trace(e.node, sim::TraceKind::TxSuccess, data_bytes);
  } else {
    if (outcome == Outcome::Collision) {
      ++stats_.collisions;
    } else {
      ++stats_.frame_errors;
    }
    for (std::size_t k = 0; k < transmitters.size(); ++k) {
      Entity& e = entities_[transmitters[k]];
      if (outcome == Outcome::Collision) {
        trace(e.node, sim::TraceKind::Collision, static_cast<double>(transmitters.size()));
      }
      if (e.mac.on_failure(e.rng, phy_.retry_limit)) {
        ++stats_.retry_drops;
        take(e, packets[k], false);
        dequeued.push_back(transmitters[k]);
      }
    }
  }

  for (Entity& e : entities_) {
    if (e.contending && e.queue->empty()) e.contending = false;
    if (e.contending) e.start_slot = e.mac.cls.aifs;
  }

  if (have_sample && hooks_.service) hooks_.service(sample_entity, sample);
  for (auto& p : abandoned) {
    if (hooks_.mac_drop) hooks_.mac_drop(p);
  }
  for (auto& d : deliveries) {
    if (hooks_.deliver) hooks_.deliver(d.to, d.packet);
  }
  for (EntityId id : dequeued) {
    if (hooks_.dequeued) hooks_.dequeued(id);
  }
  schedule_access();
}

AirtimeStats Wlan::airtime(SimTime now) const {
  AirtimeStats s = stats_;
  if (busy_) {
    s.busy -= busy_until_ - now;
  } else {
    s.idle += now - idle_since_;
  }
  return s;
}

}  // namespace bufsim::mac
