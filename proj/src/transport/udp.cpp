#include "bufsim/transport/udp.hpp"

#include <stdexcept>

namespace bufsim::transport {

void UdpConfig::validate() const {
  if (!(interval > 0)) throw std::invalid_argument("udp interval must be positive");
  if (packet_bytes == 0) throw std::invalid_argument("udp packet size must be positive");
}

UdpFlow::UdpFlow(std::uint32_t id, Direction dir, int station, UdpConfig cfg, sim::Simulator& sim,
                 sim::RngStream rng, Emit send)
    : id_(id), dir_(dir), station_(station), cfg_(cfg), sim_(sim), rng_(rng), send_(std::move(send)) {
  cfg_.validate();
}

double UdpFlow::gap() { return cfg_.poisson ? rng_.exponential(cfg_.interval) : cfg_.interval; }

void UdpFlow::start() { sim_.schedule_in(gap(), [this] { emit_next(); }); }

void UdpFlow::emit_next() {
  Packet p;
  p.flow = id_;
  p.kind = PacketKind::Udp;
  p.uplink = dir_ == Direction::Upload;
  p.station = station_;
  p.bytes = cfg_.packet_bytes;
  p.seq = seq_++;
  p.timestamp = sim_.now();
  ++stats_.sent;
  send_(p);
  sim_.schedule_in(gap(), [this] { emit_next(); });
}

void UdpFlow::on_receive(const Packet& p) {
  ++stats_.delivered;
  stats_.delivered_bytes += p.bytes;
}

}  // namespace bufsim::transport
