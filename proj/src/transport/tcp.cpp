#include "bufsim/transport/tcp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bufsim::transport {

void TcpConfig::validate() const {
  if (!(awnd >= 1)) throw std::invalid_argument("tcp awnd must be at least 1");
  if (!(beta > 0 && beta <= 1)) throw std::invalid_argument("tcp beta must lie in (0,1]");
  if (!(initial_cwnd >= 1 && initial_cwnd <= awnd)) throw std::invalid_argument("tcp initial cwnd must lie in [1, awnd]");
  if (!(srtt_gain > 0 && srtt_gain <= 1)) throw std::invalid_argument("tcp srtt gain must lie in (0,1]");
  if (!(rto_min > 0 && rto_max >= rto_min)) throw std::invalid_argument("tcp rto bounds invalid");
  if (packet_bytes == 0 || ack_bytes == 0) throw std::invalid_argument("tcp packet sizes must be positive");
}

TcpFlow::TcpFlow(std::uint32_t id, Direction dir, int station, TcpConfig cfg, sim::Simulator& sim, Emit send_data,
                 Emit send_ack)
    : id_(id),
      dir_(dir),
      station_(station),
      cfg_(cfg),
      sim_(sim),
      send_data_(std::move(send_data)),
      send_ack_(std::move(send_ack)),
      cwnd_(cfg.initial_cwnd),
      ssthresh_(cfg.initial_ssthresh) {
  cfg_.validate();
}

double TcpFlow::rto() const {
  double base = std::max(cfg_.rto_min, 2.0 * srtt_);
  return std::min(cfg_.rto_max, base * rto_backoff_);
}

std::int64_t TcpFlow::outstanding() const {
  std::int64_t n = 0;
  for (const Segment& s : segments_) n += s.state != SegState::Acked;
  return n;
}

TcpFlow::Segment* TcpFlow::segment(std::int64_t seq) {
  if (seq < base_ || seq >= base_ + static_cast<std::int64_t>(segments_.size())) return nullptr;
  return &segments_[static_cast<std::size_t>(seq - base_)];
}

void TcpFlow::start() {
  start_time_ = sim_.now();
  last_progress_ = sim_.now();
  if (cfg_.handshake) {
    syn_timeout_ = cfg_.rto_min;
    send_syn();
  } else {
    established_ = true;
    try_send();
  }
}

void TcpFlow::send_syn() {
  if (established_) return;
  Packet syn;
  syn.flow = id_;
  syn.kind = PacketKind::TcpSyn;
  syn.uplink = dir_ == Direction::Upload;
  syn.station = station_;
  syn.bytes = cfg_.ack_bytes;
  syn.seq = -1;
  syn.timestamp = sim_.now();
  send_data_(syn);
  double timeout = syn_timeout_;
  syn_timeout_ = std::min(cfg_.rto_max, syn_timeout_ * 2.0);
  sim_.schedule_in(timeout, [this] { send_syn(); });
}

void TcpFlow::transmit(std::int64_t seq, bool retx) {
  Packet p;
  p.flow = id_;
  p.kind = PacketKind::TcpData;
  p.uplink = dir_ == Direction::Upload;
  p.retransmission = retx;
  p.station = station_;
  p.bytes = cfg_.packet_bytes;
  p.seq = seq;
  p.timestamp = sim_.now();
  ++stats_.transmissions;
  if (retx) ++stats_.retransmissions;
  ++in_flight_;
  send_data_(p);
}

void TcpFlow::try_send() {
  if (!established_ || completed_) return;
  double window = std::min(cwnd_, cfg_.awnd);
  while (static_cast<double>(in_flight_) < window) {
    if (!pending_.empty()) {
      std::int64_t seq = *pending_.begin();
      pending_.erase(pending_.begin());
      Segment* s = segment(seq);
      s->state = SegState::InFlight;
      s->sent_at = sim_.now();
      transmit(seq, true);
    } else if (cfg_.total_packets < 0 || next_seq_ < cfg_.total_packets) {
      segments_.push_back({sim_.now(), SegState::InFlight});
      transmit(next_seq_++, false);
    } else {
      break;
    }
  }
  arm_rto();
}

std::int64_t TcpFlow::acknowledge(std::int64_t seq) {
  Segment* s = segment(seq);
  if (!s || s->state == SegState::Acked) return 0;
  if (s->state == SegState::InFlight) {
    --in_flight_;
  } else {
    pending_.erase(seq);
  }
  s->state = SegState::Acked;
  ++stats_.acked;
  return 1;
}

void TcpFlow::update_rtt(double sample) {
  if (srtt_ == 0.0) {
    srtt_ = sample;
  } else {
    srtt_ = (1.0 - cfg_.srtt_gain) * srtt_ + cfg_.srtt_gain * sample;
  }
  max_srtt_ = std::max(max_srtt_, srtt_);
}

void TcpFlow::on_ack(const Packet& ack) {
  if (ack.kind == PacketKind::TcpSynAck) {
    if (established_) return;
    established_ = true;
    update_rtt(sim_.now() - ack.timestamp);
    last_progress_ = sim_.now();
    try_send();
    return;
  }
  std::int64_t newly = 0;
  std::int64_t cum = std::min(ack.cum_ack, next_seq_);
  for (std::int64_t seq = base_; seq < cum; ++seq) newly += acknowledge(seq);
  newly += acknowledge(ack.seq);
  while (!segments_.empty() && segments_.front().state == SegState::Acked) {
    segments_.pop_front();
    ++base_;
  }

  update_rtt(sim_.now() - ack.timestamp);
  if (newly > 0) {
    last_progress_ = sim_.now();
    rto_backoff_ = 1.0;
    for (std::int64_t i = 0; i < newly; ++i) {
      if (cwnd_ < ssthresh_) {
        cwnd_ += 1.0;
      } else {
        cwnd_ += 1.0 / cwnd_;
      }
    }
    cwnd_ = std::min(cwnd_, cfg_.awnd);
  }
  check_complete();
  try_send();
}

void TcpFlow::check_complete() {
  if (completed_ || cfg_.total_packets < 0) return;
  if (base_ >= cfg_.total_packets) {
    completed_ = true;
    completion_time_ = sim_.now();
    if (on_complete_) on_complete_(*this);
  }
}

void TcpFlow::on_dropped(const Packet& data) {
  if (data.kind != PacketKind::TcpData) return;  // SYN loss is handled by its own timer
  ++stats_.drops;
  SimTime seen = std::max(sim_.now(), data.timestamp + srtt_);
  std::int64_t seq = data.seq;
  double sent_at = data.timestamp;
  sim_.schedule(seen, [this, seq, sent_at] { detect_loss(seq, sent_at); });
}

void TcpFlow::detect_loss(std::int64_t seq, double sent_at) {
  Segment* s = segment(seq);
  // stale notice: already acked, already timed out, or retransmitted since
  if (!s || s->state != SegState::InFlight || s->sent_at != sent_at) return;
  s->state = SegState::Lost;
  --in_flight_;
  pending_.insert(seq);
  if (seq >= recovery_point_) {
    on_loss_event();
    recovery_point_ = next_seq_;
  }
  try_send();
}

void TcpFlow::on_loss_event() {
  cwnd_ = std::max(1.0, cfg_.beta * cwnd_);
  ssthresh_ = cwnd_;
  ++stats_.loss_events;
  if (on_backoff_) on_backoff_(*this);
}

void TcpFlow::arm_rto() {
  if (rto_armed_ || segments_.empty()) return;
  rto_armed_ = true;
  sim_.schedule(std::max(sim_.now(), last_progress_ + rto()), [this] { on_rto_timer(); });
}

void TcpFlow::on_rto_timer() {
  rto_armed_ = false;
  rto_check();
  arm_rto();
}

void TcpFlow::rto_check() {
  if (segments_.empty() || completed_) return;
  if (sim_.now() < last_progress_ + rto()) return;
  ++stats_.rtos;
  ssthresh_ = std::max(2.0, cfg_.beta * cwnd_);
  cwnd_ = 1.0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    Segment& s = segments_[i];
    if (s.state == SegState::InFlight) {
      s.state = SegState::Lost;
      pending_.insert(base_ + static_cast<std::int64_t>(i));
    }
  }
  in_flight_ = 0;
  recovery_point_ = next_seq_;
  rto_backoff_ = std::min(rto_backoff_ * 2.0, cfg_.rto_max);
  last_progress_ = sim_.now();
  if (on_backoff_) on_backoff_(*this);
  try_send();
}

void TcpFlow::on_data(const Packet& data) {
  Packet ack;
  ack.flow = id_;
  ack.uplink = dir_ == Direction::Download;
  ack.station = station_;
  ack.bytes = cfg_.ack_bytes;
  ack.timestamp = data.timestamp;
  if (data.kind == PacketKind::TcpSyn) {
    ack.kind = PacketKind::TcpSynAck;
    ack.seq = -1;
    send_ack_(ack);
    return;
  }
  bool fresh = false;
  if (data.seq == rcv_next_) {
    fresh = true;
    ++rcv_next_;
    while (!out_of_order_.empty() && *out_of_order_.begin() == rcv_next_) {
      out_of_order_.erase(out_of_order_.begin());
      ++rcv_next_;
    }
  } else if (data.seq > rcv_next_) {
    fresh = out_of_order_.insert(data.seq).second;
  }
  if (fresh) {
    ++stats_.delivered;
    stats_.delivered_bytes += data.bytes;
  } else {
    ++stats_.duplicates;
  }
  ack.kind = PacketKind::TcpAck;
  ack.seq = data.seq;
  ack.cum_ack = rcv_next_;
  send_ack_(ack);
}

}  // namespace bufsim::transport
