#pragma once

#include <memory>
#include <vector>

#include "bufsim/bufsizing/queue.hpp"
#include "bufsim/mac/wlan.hpp"
#include "bufsim/sim/simulator.hpp"

namespace bufsim::testing {

/// A BSS of `n` nodes, each with one saturated data queue kept at `backlog`
/// packets; node 0 is the AP and sends to station 1, stations send to the AP.
struct SaturatedBss {
  sim::Simulator sim;
  std::vector<std::unique_ptr<bufsizing::Queue>> queues;
  std::unique_ptr<mac::Wlan> wlan;
  std::vector<std::uint64_t> delivered;
  std::vector<double> service_sum;
  std::vector<std::uint64_t> service_n;
  std::uint64_t mac_drops = 0;
  int backlog;

  SaturatedBss(int n, mac::PhyParams phy, mac::ChannelModel ch, mac::MacClassParams cls, std::uint64_t seed,
               int backlog_packets = 4)
      : delivered(static_cast<std::size_t>(n), 0),
        service_sum(static_cast<std::size_t>(n), 0.0),
        service_n(static_cast<std::size_t>(n), 0),
        backlog(backlog_packets) {
    mac::WlanHooks h;
    h.deliver = [this](int, const Packet& p) { ++delivered[static_cast<std::size_t>(p.flow)]; };
    h.mac_drop = [this](const Packet&) { ++mac_drops; };
    h.service = [this](mac::EntityId e, const bufsizing::ServiceSample& s) {
      service_sum[e] += s.t_e - s.t_s;
      ++service_n[e];
    };
    h.dequeued = [this](mac::EntityId e) { refill(e); };
    wlan = std::make_unique<mac::Wlan>(sim, phy, ch, h, seed);
    for (int i = 0; i < n; ++i) {
      queues.push_back(std::make_unique<bufsizing::Queue>(bufsizing::BufferSizer::fixed(1e9)));
      wlan->add_entity(i, cls, 0, *queues.back());
    }
    for (int i = 0; i < n; ++i) refill(static_cast<mac::EntityId>(i));
  }

  void refill(mac::EntityId e) {
    auto& q = *queues[e];
    while (q.size() < static_cast<std::size_t>(backlog)) {
      Packet p;
      p.flow = static_cast<std::uint32_t>(e);
      p.kind = PacketKind::Udp;
      p.uplink = e != 0;
      p.station = e == 0 ? 1 : static_cast<int>(e);
      p.bytes = 1000;
      q.offer(p, sim.now());
      wlan->notify_enqueue(e);
    }
  }

  double mean_service(std::size_t e) const { return service_n[e] ? service_sum[e] / service_n[e] : 0.0; }
};

}  // namespace bufsim::testing
