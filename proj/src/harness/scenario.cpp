#include "bufsim/harness/scenario.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <unordered_map>
#include <variant>

#include "bufsim/mac/wlan.hpp"
#include "bufsim/sim/rng.hpp"
#include "bufsim/sim/simulator.hpp"
#include "bufsim/transport/tcp.hpp"
#include "bufsim/transport/udp.hpp"
#include "bufsim/transport/wired.hpp"

namespace bufsim::harness {

namespace {

using bufsizing::BufferSizer;
using bufsizing::Queue;
using bufsizing::QueueClass;
using transport::Direction;
using transport::TcpFlow;
using transport::UdpFlow;

constexpr std::uint32_t kAckBytes = 40;
constexpr int kSaturatedBacklog = 2;

struct Node {
  int id = 0;
  std::unique_ptr<Queue> data;
  std::unique_ptr<Queue> ack;  // EDCA only
  mac::EntityId data_entity = 0;
  mac::EntityId ack_entity = 0;
  bool saturated = false;
  std::uint32_t saturated_flow = 0;
  std::uint64_t saturated_delivered = 0;
  std::int64_t saturated_seq = 0;
};

struct Endpoint {
  TcpFlow* tcp = nullptr;
  UdpFlow* udp = nullptr;
  Node* saturated = nullptr;
  FlowClass cls = FlowClass::LongDownload;
};

struct Snapshot {
  std::uint64_t delivered_bytes = 0;
  std::uint64_t drops = 0;
  std::uint64_t rtos = 0;
  std::uint64_t loss_events = 0;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
};

const bufsizing::AltController* alt_of(const BufferSizer& s) {
  if (auto* a = std::get_if<bufsizing::AltController>(&s.policy())) return a;
  if (auto* a = std::get_if<bufsizing::AStarController>(&s.policy())) return &a->alt();
  return nullptr;
}

class Scenario {
 public:
  Scenario(const ScenarioConfig& cfg, sim::TraceSink* trace)
      : cfg_(cfg),
        trace_(trace),
        channel_{cfg.ber, cfg.aggregation_k},
        wlan_(sim_, cfg.phy, channel_, hooks(), cfg.seed, trace),
        wired_up_(cfg.wired_bandwidth, cfg.wired_rtt),
        wired_down_(cfg.wired_bandwidth, cfg.wired_rtt),
        jitter_(cfg.seed, 0x51A7ULL) {
    build();
  }

  MetricsReport run();

 private:
  mac::WlanHooks hooks();
  void build();
  Node& add_node(const BufferSpec& data_spec);
  TcpFlow& add_tcp(Direction dir, int station, FlowClass cls, transport::TcpConfig tcp);
  void add_udp(Direction dir, int station, FlowClass cls);

  void emit_from_server(const Packet& p);
  void enqueue(Node& node, const Packet& p);
  void dispatch(const Packet& p);
  void on_network_drop(const Packet& p);
  void on_backoff(const TcpFlow& flow);
  void on_service(mac::EntityId entity, const bufsizing::ServiceSample& s);
  void refill(Node& node);

  void start_warmup();
  void sample_limits();
  void schedule_alt(Queue& q, int node);
  void alt_tick(Queue& q, int node);
  void launch_short_flows();

  void record(int station, sim::TraceKind kind, double value) {
    if (trace_) trace_->record({sim_.now(), station, kind, value});
  }
  bool measuring() const { return measuring_; }

  ScenarioConfig cfg_;
  sim::TraceSink* trace_;
  sim::Simulator sim_;
  mac::ChannelModel channel_;
  mac::Wlan wlan_;
  transport::WiredLink wired_up_;
  transport::WiredLink wired_down_;
  sim::RngStream jitter_;

  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<std::unique_ptr<TcpFlow>> tcp_;
  std::vector<FlowClass> tcp_class_;
  std::vector<std::unique_ptr<UdpFlow>> udp_;
  std::vector<FlowClass> udp_class_;
  std::unordered_map<std::uint32_t, Endpoint> endpoints_;
  std::uint32_t next_flow_ = 0;
  int short_station_ = -1;

  bool measuring_ = false;
  std::vector<Snapshot> tcp_snap_;
  std::vector<Snapshot> udp_snap_;
  std::vector<std::uint64_t> sat_snap_;
  std::vector<std::uint64_t> drop_snap_;
  mac::AirtimeStats air_snap_;
  std::uint64_t mac_drops_ = 0;
  double service_sum_ = 0.0;
  std::uint64_t service_packets_ = 0;
  double alt_idle_ = 0.0;
  double alt_busy_ = 0.0;

  MetricsReport report_;
};

mac::WlanHooks Scenario::hooks() {
  mac::WlanHooks h;
  h.deliver = [this](int to, const Packet& p) {
    if (to == mac::kApNode) {
      sim_.schedule(wired_up_.transit(p.bytes, sim_.now()), [this, p] { dispatch(p); });
    } else {
      dispatch(p);
    }
  };
  h.mac_drop = [this](const Packet& p) {
    if (measuring()) ++mac_drops_;
    on_network_drop(p);
  };
  h.service = [this](mac::EntityId e, const bufsizing::ServiceSample& s) { on_service(e, s); };
  h.dequeued = [this](mac::EntityId e) {
    for (auto& n : nodes_) {
      if (n->saturated && n->data_entity == e) refill(*n);
    }
  };
  return h;
}

Node& Scenario::add_node(const BufferSpec& data_spec) {
  auto node = std::make_unique<Node>();
  node->id = static_cast<int>(nodes_.size());
  bool edca = cfg_.mac_mode == MacMode::Edca;
  node->data = std::make_unique<Queue>(data_spec.make(cfg_.ebdp, cfg_.alt), edca ? QueueClass::Data : QueueClass::Shared);
  node->data_entity = wlan_.add_entity(node->id, edca ? cfg_.edca_data : mac::kDcfClass, 0, *node->data);
  schedule_alt(*node->data, node->id);
  if (edca) {
    node->ack = std::make_unique<Queue>(cfg_.buffer_ack.make(cfg_.ebdp, cfg_.alt), QueueClass::Ack);
    node->ack_entity = wlan_.add_entity(node->id, cfg_.edca_ack, 1, *node->ack);
    schedule_alt(*node->ack, node->id);
  }
  nodes_.push_back(std::move(node));
  return *nodes_.back();
}

void Scenario::schedule_alt(Queue& q, int node) {
  if (auto interval = q.sizer().interval()) {
    sim_.schedule_in(*interval, [this, &q, node] { alt_tick(q, node); });
  }
}

void Scenario::alt_tick(Queue& q, int node) {
  q.sizer().close_interval(sim_.now());
  // only intervals lying wholly inside the measured window count
  bool inside = measuring() && sim_.now() - *q.sizer().interval() >= cfg_.warmup - 1e-9;
  if (node == mac::kApNode && q.queue_class() != QueueClass::Ack && inside) {
    if (const bufsizing::AltController* a = alt_of(q.sizer())) {
      alt_idle_ += a->last_idle_time();
      alt_busy_ += a->last_busy_time();
    }
  }
  record(node, sim::TraceKind::LimitUpdate, q.limit());
  sim_.schedule_in(*q.sizer().interval(), [this, &q, node] { alt_tick(q, node); });
}

TcpFlow& Scenario::add_tcp(Direction dir, int station, FlowClass cls, transport::TcpConfig tcp) {
  std::uint32_t id = next_flow_++;
  Node* st = nodes_.at(static_cast<std::size_t>(station)).get();
  auto from_station = [this, st](const Packet& p) { enqueue(*st, p); };
  auto from_server = [this](const Packet& p) { emit_from_server(p); };
  auto flow = dir == Direction::Download
                  ? std::make_unique<TcpFlow>(id, dir, station, tcp, sim_, from_server, from_station)
                  : std::make_unique<TcpFlow>(id, dir, station, tcp, sim_, from_station, from_server);
  flow->set_backoff_hook([this](const TcpFlow& f) { on_backoff(f); });
  TcpFlow& ref = *flow;
  endpoints_[id] = Endpoint{&ref, nullptr, nullptr, cls};
  tcp_.push_back(std::move(flow));
  tcp_class_.push_back(cls);
  return ref;
}

void Scenario::add_udp(Direction dir, int station, FlowClass cls) {
  std::uint32_t id = next_flow_++;
  Node* st = nodes_.at(static_cast<std::size_t>(station)).get();
  if (cfg_.udp_saturated && dir == Direction::Upload) {
    st->saturated = true;
    st->saturated_flow = id;
    endpoints_[id] = Endpoint{nullptr, nullptr, st, cls};
    return;
  }
  transport::UdpConfig uc{cfg_.udp_bytes, cfg_.udp_interval, cfg_.udp_poisson};
  UdpFlow::Emit emit;
  if (dir == Direction::Download) {
    emit = [this](const Packet& p) { emit_from_server(p); };
  } else {
    emit = [this, st](const Packet& p) { enqueue(*st, p); };
  }
  auto flow = std::make_unique<UdpFlow>(id, dir, station, uc, sim_, sim::RngStream(cfg_.seed, 5000 + id), emit);
  endpoints_[id] = Endpoint{nullptr, flow.get(), nullptr, cls};
  udp_.push_back(std::move(flow));
  udp_class_.push_back(cls);
}

void Scenario::build() {
  add_node(cfg_.buffer_ap);

  transport::TcpConfig tcp;
  tcp.awnd = cfg_.tcp_awnd;
  tcp.beta = cfg_.tcp_beta;
  tcp.packet_bytes = static_cast<std::uint32_t>(cfg_.phy.payload_default);
  tcp.ack_bytes = kAckBytes;
  if (!cfg_.slow_start) tcp.initial_ssthresh = tcp.initial_cwnd;

  for (int i = 0; i < cfg_.n_downloads; ++i) {
    int st = add_node(cfg_.buffer_sta).id;
    TcpFlow& f = add_tcp(Direction::Download, st, FlowClass::LongDownload, tcp);
    sim_.schedule(cfg_.download_start + 0.5 * jitter_.uniform01(), [&f] { f.start(); });
  }
  for (int i = 0; i < cfg_.n_uploads; ++i) {
    int st = add_node(cfg_.buffer_sta).id;
    TcpFlow& f = add_tcp(Direction::Upload, st, FlowClass::LongUpload, tcp);
    sim_.schedule(cfg_.upload_start + 0.5 * jitter_.uniform01(), [&f] { f.start(); });
  }
  for (int i = 0; i < cfg_.udp_downloads; ++i) add_udp(Direction::Download, add_node(cfg_.buffer_sta).id, FlowClass::UdpDownload);
  for (int i = 0; i < cfg_.udp_uploads; ++i) add_udp(Direction::Upload, add_node(cfg_.buffer_sta).id, FlowClass::UdpUpload);
  if (cfg_.short_enabled) short_station_ = add_node(cfg_.buffer_sta).id;

  for (auto& f : udp_) f->start();
  for (auto& n : nodes_) {
    if (n->saturated) sim_.schedule(0.0, [this, node = n.get()] { refill(*node); });
  }
  if (cfg_.short_enabled) sim_.schedule(cfg_.warmup, [this] { launch_short_flows(); });
  sim_.schedule(cfg_.warmup, [this] { start_warmup(); });
}

void Scenario::launch_short_flows() {
  transport::TcpConfig tcp;
  tcp.awnd = cfg_.tcp_awnd;
  tcp.beta = cfg_.tcp_beta;
  tcp.packet_bytes = static_cast<std::uint32_t>(cfg_.phy.payload_default);
  tcp.ack_bytes = kAckBytes;
  tcp.handshake = true;
  if (!cfg_.slow_start) tcp.initial_ssthresh = tcp.initial_cwnd;
  for (double kb : cfg_.short_sizes_kb) {
    tcp.total_packets = static_cast<std::int64_t>(std::ceil(kb * 1024.0 / tcp.packet_bytes));
    TcpFlow& f = add_tcp(Direction::Download, short_station_, FlowClass::ShortDownload, tcp);
    std::size_t index = report_.short_flows.size();
    report_.short_flows.push_back({kb, sim_.now(), -1.0});
    f.set_completion_hook([this, index](const TcpFlow& done) {
      report_.short_flows[index].completion = done.completion_time();
    });
    f.start();
  }
  if (sim_.now() + cfg_.short_interval < cfg_.duration) {
    sim_.schedule_in(cfg_.short_interval, [this] { launch_short_flows(); });
  }
}

void Scenario::emit_from_server(const Packet& p) {
  Node* ap = nodes_.front().get();
  sim_.schedule(wired_down_.transit(p.bytes, sim_.now()), [this, ap, p] { enqueue(*ap, p); });
}

void Scenario::enqueue(Node& node, const Packet& p) {
  bool ack_class = node.ack && is_ack_class(p.kind);
  Queue& q = ack_class ? *node.ack : *node.data;
  if (q.offer(p, sim_.now())) {
    record(node.id, sim::TraceKind::Enqueue, static_cast<double>(q.occupancy()));
    wlan_.notify_enqueue(ack_class ? node.ack_entity : node.data_entity);
  } else {
    record(node.id, sim::TraceKind::Drop, q.limit());
    on_network_drop(p);
  }
}

void Scenario::refill(Node& node) {
  while (node.data->size() < static_cast<std::size_t>(kSaturatedBacklog)) {
    Packet p;
    p.flow = node.saturated_flow;
    p.kind = PacketKind::Udp;
    p.uplink = true;
    p.station = node.id;
    p.bytes = static_cast<std::uint32_t>(cfg_.phy.payload_default);
    p.seq = node.saturated_seq++;
    p.timestamp = sim_.now();
    std::size_t before = node.data->size();
    enqueue(node, p);
    if (node.data->size() == before) break;  // limit below the backlog target
  }
}

void Scenario::dispatch(const Packet& p) {
  auto it = endpoints_.find(p.flow);
  if (it == endpoints_.end()) return;
  Endpoint& ep = it->second;
  if (ep.tcp) {
    if (p.kind == PacketKind::TcpData || p.kind == PacketKind::TcpSyn) {
      ep.tcp->on_data(p);
    } else {
      ep.tcp->on_ack(p);
    }
  } else if (ep.udp) {
    ep.udp->on_receive(p);
  } else if (ep.saturated) {
    ++ep.saturated->saturated_delivered;
  }
}

void Scenario::on_network_drop(const Packet& p) {
  auto it = endpoints_.find(p.flow);
  if (it == endpoints_.end()) return;
  Endpoint& ep = it->second;
  if (ep.tcp) {
    ep.tcp->on_dropped(p);  // ACK losses are absorbed by later cumulative ACKs
  } else if (ep.udp) {
    ep.udp->on_dropped(p);
  }
}

void Scenario::on_backoff(const TcpFlow& flow) {
  record(flow.station(), sim::TraceKind::CwndUpdate, flow.cwnd());
  if (!measuring()) return;
  if (endpoints_[flow.id()].cls == FlowClass::ShortDownload) return;
  double window = std::max(cfg_.wired_rtt, flow.srtt());
  auto& events = report_.congestion;
  if (!events.empty() && sim_.now() - events.back().time <= window) {
    ++events.back().backoffs;
    return;
  }
  const Queue& ap = *nodes_.front()->data;
  events.push_back({sim_.now(), ap.limit(), static_cast<double>(ap.occupancy()), 1});
}

void Scenario::on_service(mac::EntityId entity, const bufsizing::ServiceSample& s) {
  if (!measuring()) return;
  const Node& ap = *nodes_.front();
  double per_packet = (s.t_e - s.t_s) / s.packets;
  if (entity == ap.data_entity) {
    service_sum_ += s.t_e - s.t_s;
    service_packets_ += static_cast<std::uint64_t>(s.packets);
  }
  if (cfg_.service_hist) {
    int node = wlan_.node_of(entity);
    bool data_entity = false;
    for (const auto& n : nodes_) data_entity = data_entity || (n->id == node && n->data_entity == entity);
    if (data_entity) {
      auto bin = static_cast<std::int64_t>(std::floor(per_packet / cfg_.hist_bin));
      ++report_.service_hist.counts[node][bin];
    }
  }
}

void Scenario::start_warmup() {
  measuring_ = true;
  tcp_snap_.clear();
  for (auto& f : tcp_) {
    const auto& st = f->stats();
    tcp_snap_.push_back({st.delivered_bytes, st.drops, st.rtos, st.loss_events, st.transmissions, st.delivered});
    f->reset_max_srtt();
  }
  udp_snap_.clear();
  for (auto& f : udp_) {
    const auto& st = f->stats();
    udp_snap_.push_back({st.delivered_bytes, st.drops, 0, 0, st.sent, st.delivered});
  }
  sat_snap_.clear();
  drop_snap_.clear();
  for (auto& n : nodes_) {
    sat_snap_.push_back(n->saturated_delivered);
    drop_snap_.push_back(n->data->drops() + (n->ack ? n->ack->drops() : 0));
  }
  air_snap_ = wlan_.airtime(sim_.now());
  sample_limits();
}

void Scenario::sample_limits() {
  for (auto& n : nodes_) {
    double limit = n->data->limit();
    report_.limits.push_back({sim_.now(), n->id, limit, static_cast<double>(n->data->occupancy())});
  }
  record(mac::kApNode, sim::TraceKind::LimitUpdate, nodes_.front()->data->limit());
  if (sim_.now() + cfg_.sample_interval <= cfg_.duration + 1e-12) {
    sim_.schedule_in(cfg_.sample_interval, [this] { sample_limits(); });
  }
}

MetricsReport Scenario::run() {
  auto wall_start = std::chrono::steady_clock::now();
  sim_.run_until(cfg_.duration);
  if (!measuring_) start_warmup();

  MetricsReport& r = report_;
  r.config_hash = cfg_.source.hash();
  r.traffic_hash = cfg_.source.traffic_hash();
  r.seed = cfg_.seed;
  r.buffer_ap = cfg_.buffer_ap.to_string();
  r.measured = cfg_.duration - cfg_.warmup;
  const double scale = 8.0 / r.measured;

  double down_bytes = 0.0;
  double up_bytes = 0.0;
  for (std::size_t i = 0; i < tcp_.size(); ++i) {
    const TcpFlow& f = *tcp_[i];
    const auto& st = f.stats();
    Snapshot base = i < tcp_snap_.size() ? tcp_snap_[i] : Snapshot{};
    FlowReport fr;
    fr.id = f.id();
    fr.cls = tcp_class_[i];
    fr.station = f.station();
    fr.goodput_bps = static_cast<double>(st.delivered_bytes - base.delivered_bytes) * scale;
    fr.max_srtt = f.max_srtt();
    fr.drops = st.drops - base.drops;
    fr.rtos = st.rtos - base.rtos;
    fr.loss_events = st.loss_events - base.loss_events;
    fr.sent = st.transmissions - base.sent;
    fr.delivered = st.delivered - base.delivered;
    if (fr.cls == FlowClass::LongDownload) {
      down_bytes += static_cast<double>(st.delivered_bytes - base.delivered_bytes);
      r.max_srtt_download = std::max(r.max_srtt_download, fr.max_srtt);
    } else if (fr.cls == FlowClass::LongUpload) {
      up_bytes += static_cast<double>(st.delivered_bytes - base.delivered_bytes);
      r.max_srtt_upload = std::max(r.max_srtt_upload, fr.max_srtt);
    }
    if (fr.cls != FlowClass::ShortDownload) {
      r.rtos += fr.rtos;
      r.loss_events += fr.loss_events;
      r.flows.push_back(fr);
    }
  }
  double udp_bytes = 0.0;
  for (std::size_t i = 0; i < udp_.size(); ++i) {
    const auto& st = udp_[i]->stats();
    FlowReport fr;
    fr.id = udp_[i]->id();
    fr.cls = udp_class_[i];
    fr.station = udp_[i]->station();
    fr.goodput_bps = static_cast<double>(st.delivered_bytes - udp_snap_[i].delivered_bytes) * scale;
    fr.drops = st.drops - udp_snap_[i].drops;
    fr.sent = st.sent - udp_snap_[i].sent;
    fr.delivered = st.delivered - udp_snap_[i].delivered;
    udp_bytes += static_cast<double>(st.delivered_bytes - udp_snap_[i].delivered_bytes);
    r.flows.push_back(fr);
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = *nodes_[i];
    if (!n.saturated) continue;
    FlowReport fr;
    fr.id = n.saturated_flow;
    fr.cls = FlowClass::UdpUpload;
    fr.station = n.id;
    fr.delivered = n.saturated_delivered - sat_snap_[i];
    fr.goodput_bps = static_cast<double>(fr.delivered) * cfg_.phy.payload_default * scale;
    udp_bytes += static_cast<double>(fr.delivered) * cfg_.phy.payload_default;
    r.flows.push_back(fr);
  }
  r.download_goodput_bps = down_bytes * scale;
  r.upload_goodput_bps = up_bytes * scale;
  r.udp_goodput_bps = udp_bytes * scale;
  r.ap_goodput_bps = cfg_.n_downloads > 0 ? r.download_goodput_bps : r.download_goodput_bps + r.upload_goodput_bps;
  r.max_srtt = std::max(r.max_srtt_download, r.max_srtt_upload);

  double limit_sum = 0.0;
  double occ_sum = 0.0;
  std::size_t count = 0;
  for (const LimitSample& s : r.limits) {
    if (s.node != mac::kApNode) continue;
    limit_sum += s.limit;
    occ_sum += s.occupancy;
    r.max_occupancy = std::max(r.max_occupancy, s.occupancy);
    ++count;
  }
  if (count > 0) {
    r.mean_limit = limit_sum / static_cast<double>(count);
    r.mean_occupancy = occ_sum / static_cast<double>(count);
  }
  if (service_packets_ > 0) r.mean_service_time = service_sum_ / static_cast<double>(service_packets_);

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = *nodes_[i];
    std::uint64_t d = n.data->drops() + (n.ack ? n.ack->drops() : 0) - drop_snap_[i];
    r.drops += d;
    if (i == 0) r.ap_drops = d;
  }
  r.mac_drops = mac_drops_;
  mac::AirtimeStats air = wlan_.airtime(sim_.now());
  r.airtime.busy = air.busy - air_snap_.busy;
  r.airtime.idle = air.idle - air_snap_.idle;
  r.airtime.successes = air.successes - air_snap_.successes;
  r.airtime.collisions = air.collisions - air_snap_.collisions;
  r.airtime.frame_errors = air.frame_errors - air_snap_.frame_errors;
  r.airtime.retry_drops = air.retry_drops - air_snap_.retry_drops;
  r.alt_idle = alt_idle_;
  r.alt_busy = alt_busy_;
  r.service_hist.bin = cfg_.hist_bin;
  r.events = sim_.dispatched_count();
  r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return std::move(report_);
}

}  // namespace

MetricsReport run_scenario(const ScenarioConfig& cfg, sim::TraceSink* trace) {
  Scenario s(cfg, trace);
  return s.run();
}

MetricsReport run_with_reference(const ScenarioConfig& cfg, sim::TraceSink* trace,
                                 std::vector<MetricsReport>* references) {
  MetricsReport main = run_scenario(cfg, trace);
  if (cfg.reference_buffers.empty()) {
    main.efficiency = efficiency(main, main);
    return main;
  }
  const MetricsReport* best = nullptr;
  std::vector<MetricsReport> refs;
  refs.reserve(cfg.reference_buffers.size());
  for (double b : cfg.reference_buffers) {
    Config c = cfg.source;
    c.set("buffer.ap", BufferSpec{BufferMode::Fixed, b}.to_string());
    c.set("reference.buffers", "");
    refs.push_back(run_scenario(ScenarioConfig::from(c)));
  }
  for (const MetricsReport& r : refs) {
    if (!best || r.ap_goodput_bps > best->ap_goodput_bps) best = &r;
  }
  main.efficiency = efficiency(main, *best);
  if (references) {
    for (MetricsReport& r : refs) r.efficiency = efficiency(r, *best);
    *references = std::move(refs);
  }
  return main;
}

}  // namespace bufsim::harness
