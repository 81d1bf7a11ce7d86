#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <set>

#include "bufsim/packet.hpp"
#include "bufsim/sim/simulator.hpp"

namespace bufsim::transport {

using sim::SimTime;

enum class Direction : std::uint8_t { Upload, Download };

struct TcpConfig {
  double awnd = 4096.0;     // advertised window, packets
  double beta = 0.5;        // multiplicative decrease factor
  double initial_cwnd = 2.0;
  /// Slow start runs until cwnd reaches ssthresh; the default lets a new
  /// flow probe up to its first loss. Set <= initial_cwnd for pure AIMD.
  double initial_ssthresh = std::numeric_limits<double>::infinity();
  double srtt_gain = 0.125;
  double rto_min = 1.0;
  double rto_max = 64.0;
  std::uint32_t packet_bytes = 1000;
  std::uint32_t ack_bytes = 40;
  std::int64_t total_packets = -1;  // < 0: unlimited (long-lived flow)
  bool handshake = false;           // one SYN / SYN-ACK round trip before data

  void validate() const;
};

struct TcpStats {
  std::uint64_t transmissions = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t acked = 0;          // distinct sequence numbers acknowledged
  std::uint64_t drops = 0;          // network drops of this flow's data
  std::uint64_t loss_events = 0;    // multiplicative decreases
  std::uint64_t rtos = 0;
  std::uint64_t delivered = 0;      // distinct packets received
  std::uint64_t delivered_bytes = 0;
  std::uint64_t duplicates = 0;
};

/// TCP-like AIMD sender and receiver for one flow.
///
/// The receiver acknowledges every data packet with a cumulative ACK plus the
/// sequence number just received, so lost ACKs are covered by later ones.
/// Loss detection is idealised: a network drop becomes visible to the sender
/// one smoothed RTT after the dropped packet was sent. Losses of packets sent
/// before the previous decrease are folded into that decrease, giving at most
/// one backoff per window of data.
class TcpFlow {
 public:
  using Emit = std::function<void(const Packet&)>;
  using Notify = std::function<void(const TcpFlow&)>;

  TcpFlow(std::uint32_t id, Direction dir, int station, TcpConfig cfg, sim::Simulator& sim, Emit send_data,
          Emit send_ack);
  TcpFlow(const TcpFlow&) = delete;
  TcpFlow& operator=(const TcpFlow&) = delete;

  /// Called after every multiplicative decrease (loss event or timeout).
  void set_backoff_hook(Notify hook) { on_backoff_ = std::move(hook); }
  void set_completion_hook(Notify hook) { on_complete_ = std::move(hook); }

  void start();

  // sender side
  void on_ack(const Packet& ack);
  void on_dropped(const Packet& data);
  void on_loss_event();
  void rto_check();

  // receiver side
  void on_data(const Packet& data);

  std::uint32_t id() const { return id_; }
  Direction direction() const { return dir_; }
  int station() const { return station_; }
  const TcpConfig& config() const { return cfg_; }
  double cwnd() const { return cwnd_; }
  double ssthresh() const { return ssthresh_; }
  double srtt() const { return srtt_; }
  double max_srtt() const { return max_srtt_; }
  double rto() const;
  std::int64_t in_flight() const { return in_flight_; }
  std::int64_t next_seq() const { return next_seq_; }
  /// Sent but not yet acknowledged, whether in flight or awaiting retransmission.
  std::int64_t outstanding() const;
  std::size_t retransmit_pending() const { return pending_.size(); }
  const TcpStats& stats() const { return stats_; }
  bool completed() const { return completed_; }
  SimTime start_time() const { return start_time_; }
  SimTime completion_time() const { return completion_time_; }

  /// Restarts max-sRTT tracking from the current sRTT (used at end of warmup).
  void reset_max_srtt() { max_srtt_ = srtt_; }

 private:
  enum class SegState : std::uint8_t { InFlight, Lost, Acked };
  struct Segment {
    double sent_at = 0.0;
    SegState state = SegState::InFlight;
  };

  Segment* segment(std::int64_t seq);
  std::int64_t acknowledge(std::int64_t seq);
  void detect_loss(std::int64_t seq, double sent_at);
  void try_send();
  void transmit(std::int64_t seq, bool retx);
  void arm_rto();
  void on_rto_timer();
  void send_syn();
  void update_rtt(double sample);
  void check_complete();

  std::uint32_t id_;
  Direction dir_;
  int station_;
  TcpConfig cfg_;
  sim::Simulator& sim_;
  Emit send_data_;
  Emit send_ack_;
  Notify on_backoff_;
  Notify on_complete_;

  // sender
  bool established_ = false;
  double cwnd_;
  double ssthresh_;
  double srtt_ = 0.0;
  double max_srtt_ = 0.0;
  std::int64_t base_ = 0;       // sequence number of segments_.front()
  std::int64_t next_seq_ = 0;
  std::int64_t in_flight_ = 0;
  std::int64_t recovery_point_ = 0;
  std::deque<Segment> segments_;
  std::set<std::int64_t> pending_;
  double rto_backoff_ = 1.0;
  SimTime last_progress_ = 0.0;
  bool rto_armed_ = false;
  double syn_timeout_ = 0.0;
  SimTime start_time_ = 0.0;
  SimTime completion_time_ = 0.0;
  bool completed_ = false;

  // receiver
  std::int64_t rcv_next_ = 0;
  std::set<std::int64_t> out_of_order_;

  TcpStats stats_;
};

}  // namespace bufsim::transport
