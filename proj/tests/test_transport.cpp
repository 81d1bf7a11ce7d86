#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "bufsim/sim/rng.hpp"
#include "bufsim/sim/simulator.hpp"
#include "bufsim/transport/tcp.hpp"
#include "bufsim/transport/udp.hpp"
#include "bufsim/transport/wired.hpp"

using namespace bufsim;
using namespace bufsim::transport;

namespace {

/// Sender and receiver joined by two fixed-delay pipes with independent loss.
struct Loop {
  sim::Simulator sim;
  sim::RngStream rng{17, 0};
  double one_way = 0.1;
  double data_loss = 0.0;
  double ack_loss = 0.0;
  bool blackhole = false;
  std::vector<Packet> sent;
  bool window_ok = true;
  std::unique_ptr<TcpFlow> flow;

  explicit Loop(TcpConfig cfg) {
    flow = std::make_unique<TcpFlow>(
        1, Direction::Download, 1, cfg, sim,
        [this](const Packet& p) {
          sent.push_back(p);
          if (p.kind == PacketKind::TcpData) {
            window_ok = window_ok && flow->in_flight() <= std::ceil(std::min(flow->cwnd(), flow->config().awnd));
          }
          if (blackhole) return;
          if (p.kind == PacketKind::TcpData && rng.bernoulli(data_loss)) {
            sim.schedule_in(0.01, [this, p] { flow->on_dropped(p); });
            return;
          }
          sim.schedule_in(one_way, [this, p] { flow->on_data(p); });
        },
        [this](const Packet& a) {
          if (blackhole || rng.bernoulli(ack_loss)) return;
          sim.schedule_in(one_way, [this, a] { flow->on_ack(a); });
        });
  }
};

TcpConfig avoidance(double cwnd) {
  TcpConfig c;
  c.initial_cwnd = cwnd;
  c.initial_ssthresh = cwnd;
  return c;
}

}  // namespace

TEST_CASE("srtt smoothing with gain 1/8") {
  sim::Simulator sim;
  std::vector<Packet> data, acks;
  TcpFlow f(1, Direction::Download, 1, avoidance(1), sim, [&](const Packet& p) { data.push_back(p); },
            [&](const Packet& a) { acks.push_back(a); });
  f.start();
  REQUIRE(data.size() == 1);
  sim.run_until(0.2);
  f.on_data(data[0]);
  f.on_ack(acks.back());
  CHECK(f.srtt() == doctest::Approx(0.200));
  REQUIRE(data.size() >= 2);
  double sent_at = data[1].timestamp;
  sim.run_until(sent_at + 0.280);
  f.on_data(data[1]);
  f.on_ack(acks.back());
  CHECK(f.srtt() == doctest::Approx(0.875 * 0.200 + 0.125 * 0.280));
  CHECK(f.srtt() == doctest::Approx(0.210));
  CHECK(f.max_srtt() == doctest::Approx(0.210));
}

TEST_CASE("one RTT of acks grows cwnd by about one packet") {
  Loop l(avoidance(10));
  l.flow->start();
  l.sim.run_until(0.2 + 1e-9);
  double oracle = 10.0;
  for (int i = 0; i < 10; ++i) oracle += 1.0 / oracle;
  CHECK(l.flow->cwnd() == doctest::Approx(oracle));
  CHECK(l.flow->cwnd() == doctest::Approx(11.0).epsilon(0.01));
}

TEST_CASE("advertised window clamps cwnd") {
  TcpConfig c = avoidance(4096);
  c.awnd = 4096;
  Loop l(c);
  l.flow->start();
  l.sim.run_until(1.0);
  CHECK(l.flow->cwnd() == 4096);
  CHECK(l.flow->in_flight() <= 4096);
}

TEST_CASE("slow start doubles per round trip until ssthresh") {
  TcpConfig c;
  c.initial_ssthresh = 16;
  Loop l(c);
  l.flow->start();
  l.sim.run_until(0.2 + 1e-9);
  CHECK(l.flow->cwnd() == doctest::Approx(4));
  l.sim.run_until(0.4 + 1e-9);
  CHECK(l.flow->cwnd() == doctest::Approx(8));
  l.sim.run_until(0.8 + 1e-9);
  CHECK(l.flow->cwnd() < 18);
}

TEST_CASE("a loss halves cwnd") {
  sim::Simulator sim;
  TcpFlow f(1, Direction::Download, 1, avoidance(100), sim, [](const Packet&) {}, [](const Packet&) {});
  f.on_loss_event();
  CHECK(f.cwnd() == 50);
  CHECK(f.stats().loss_events == 1);
}

TEST_CASE("drops within one window collapse into one congestion event") {
  sim::Simulator sim;
  std::vector<Packet> data;
  int backoffs = 0;
  TcpFlow f(1, Direction::Download, 1, avoidance(100), sim, [&](const Packet& p) { data.push_back(p); },
            [](const Packet&) {});
  f.set_backoff_hook([&](const TcpFlow&) { ++backoffs; });
  f.start();
  REQUIRE(data.size() == 100);
  sim.run_until(0.01);
  f.on_dropped(data[5]);
  f.on_dropped(data[7]);
  sim.run_until(0.05);
  CHECK(f.cwnd() == 50);
  CHECK(f.stats().loss_events == 1);
  CHECK(f.stats().drops == 2);
  CHECK(backoffs == 1);
  CHECK(f.retransmit_pending() == 2);
}

TEST_CASE("cwnd never falls below one") {
  sim::Simulator sim;
  TcpFlow f(1, Direction::Download, 1, avoidance(1), sim, [](const Packet&) {}, [](const Packet&) {});
  f.on_loss_event();
  CHECK(f.cwnd() == 1);
}

TEST_CASE("retransmission timeout after one second of silence") {
  Loop l(avoidance(2));
  l.flow->start();
  l.sim.run_until(0.2 + 1e-9);
  CHECK(l.flow->srtt() == doctest::Approx(0.2));
  l.blackhole = true;
  // RTO = max(1 s, 2 * srtt) counted from the last progress at t = 0.2
  l.sim.run_until(1.19);
  CHECK(l.flow->stats().rtos == 0);
  CHECK(l.flow->cwnd() > 1);
  l.sim.run_until(1.21);
  CHECK(l.flow->stats().rtos == 1);
  CHECK(l.flow->cwnd() == 1);
}

TEST_CASE("an ack before the timeout prevents it") {
  sim::Simulator sim;
  std::vector<Packet> data, acks;
  TcpFlow f(1, Direction::Download, 1, avoidance(2), sim, [&](const Packet& p) { data.push_back(p); },
            [&](const Packet& a) { acks.push_back(a); });
  f.start();
  sim.run_until(0.2);
  f.on_data(data[0]);
  f.on_ack(acks.back());
  double rto = f.rto();
  CHECK(rto == doctest::Approx(1.0));
  sim.run_until(0.2 + 0.9 * rto);
  f.on_data(data[1]);
  f.on_ack(acks.back());
  sim.run_until(0.2 + 1.05 * rto);
  CHECK(f.stats().rtos == 0);
}

TEST_CASE("repeated timeouts double the RTO up to 64 s") {
  Loop l(avoidance(2));
  l.flow->start();
  l.sim.run_until(0.2 + 1e-9);
  l.blackhole = true;
  std::vector<double> rtos;
  double t = 0.2;
  for (int i = 0; i < 8; ++i) {
    t += l.flow->rto();
    l.sim.run_until(t + 1e-6);
    REQUIRE(l.flow->stats().rtos == static_cast<std::uint64_t>(i + 1));
    rtos.push_back(l.flow->rto());
  }
  CHECK(rtos == std::vector<double>{2, 4, 8, 16, 32, 64, 64, 64});
}

TEST_CASE("wired transit: propagation plus serialisation, in order") {
  WiredLink link(100e6, 0.200);
  CHECK(link.transit(1000, 0.0) == doctest::Approx(0.100080));
  WiredLink bare(100e6, 0.0);
  CHECK(bare.transit(1000, 1.0) == doctest::Approx(1.0 + 80e-6));
  WiredLink fifo(100e6, 0.2);
  double a = fifo.transit(1000, 5.0);
  double b = fifo.transit(40, 5.0);
  CHECK(b > a);
  CHECK(b == doctest::Approx(a + 8.0 * 40 / 100e6));
  CHECK_THROWS(WiredLink(0.0, 0.2));
}

TEST_CASE("packet conservation under random loss") {
  Loop l(TcpConfig{});
  l.data_loss = 0.02;
  l.ack_loss = 0.05;
  l.flow->start();
  double last_max = 0.0;
  bool max_monotone = true, srtt_floor = true, conserved = true;
  for (int step = 1; step <= 600; ++step) {
    l.sim.run_until(step * 0.1);
    const TcpFlow& f = *l.flow;
    const TcpStats& s = f.stats();
    conserved = conserved && f.next_seq() == static_cast<std::int64_t>(s.acked) + f.outstanding();
    conserved = conserved && f.outstanding() == f.in_flight() + static_cast<std::int64_t>(f.retransmit_pending());
    conserved = conserved && s.transmissions == static_cast<std::uint64_t>(f.next_seq()) + s.retransmissions;
    max_monotone = max_monotone && f.max_srtt() >= last_max;
    last_max = f.max_srtt();
    srtt_floor = srtt_floor && (f.srtt() == 0.0 || f.srtt() >= 0.2 - 1e-12);
  }
  CHECK(conserved);
  CHECK(max_monotone);
  CHECK(srtt_floor);
  CHECK(l.window_ok);
  CHECK(l.flow->stats().loss_events > 0);
  // the sender learns of a delivery only through an ACK
  CHECK(l.flow->stats().acked <= l.flow->stats().delivered);
}

TEST_CASE("cwnd is a sawtooth: it only falls at congestion events") {
  Loop l(avoidance(10));
  l.data_loss = 0.01;
  l.flow->start();
  double prev = l.flow->cwnd();
  std::uint64_t prev_events = 0;
  bool sawtooth = true;
  for (int step = 1; step <= 20000; ++step) {
    l.sim.run_until(step * 0.005);
    const TcpFlow& f = *l.flow;
    std::uint64_t events = f.stats().loss_events + f.stats().rtos;
    if (f.cwnd() < prev - 1e-12 && events == prev_events) sawtooth = false;
    prev = f.cwnd();
    prev_events = events;
  }
  CHECK(sawtooth);
  CHECK(prev_events > 5);
}

TEST_CASE("receiver acknowledges cumulatively and tolerates reordering") {
  sim::Simulator sim;
  std::vector<Packet> acks;
  TcpFlow f(1, Direction::Upload, 2, TcpConfig{}, sim, [](const Packet&) {}, [&](const Packet& a) { acks.push_back(a); });
  auto data = [](std::int64_t seq) {
    Packet p;
    p.kind = PacketKind::TcpData;
    p.seq = seq;
    p.bytes = 1000;
    return p;
  };
  f.on_data(data(0));
  f.on_data(data(2));
  CHECK(acks.back().cum_ack == 1);
  CHECK(acks.back().seq == 2);
  f.on_data(data(1));
  CHECK(acks.back().cum_ack == 3);
  f.on_data(data(1));
  CHECK(f.stats().duplicates == 1);
  CHECK(f.stats().delivered == 3);
  CHECK(acks.back().uplink == false);
}

TEST_CASE("finite transfer with handshake completes") {
  TcpConfig c;
  c.total_packets = 30;
  c.handshake = true;
  Loop l(c);
  bool done = false;
  l.flow->set_completion_hook([&](const TcpFlow&) { done = true; });
  l.flow->start();
  l.sim.run_until(10.0);
  CHECK(done);
  CHECK(l.flow->completed());
  // one RTT of handshake, then slow start from 2: 2+4+8+16 >= 30 takes 4 RTTs
  CHECK(l.flow->completion_time() == doctest::Approx(5 * 0.2).epsilon(0.01));
}

TEST_CASE("tcp configuration is validated") {
  sim::Simulator sim;
  TcpConfig c;
  c.beta = 0.0;
  CHECK_THROWS(TcpFlow(1, Direction::Upload, 1, c, sim, {}, {}));
  c = TcpConfig{};
  c.awnd = 0.5;
  CHECK_THROWS(TcpFlow(1, Direction::Upload, 1, c, sim, {}, {}));
}

TEST_CASE("udp source: mean gap, open loop, validated interval") {
  sim::Simulator sim;
  std::uint64_t n = 0;
  UdpConfig c{64, 0.5, true};
  UdpFlow u(3, Direction::Upload, 4, c, sim, sim::RngStream(1, 9), [&](const Packet& p) {
    ++n;
    CHECK(p.bytes == 64);
  });
  u.start();
  sim.run_until(5000.0);
  CHECK(static_cast<double>(n) == doctest::Approx(10000.0).epsilon(0.03));
  CHECK(u.stats().sent == n);
  CHECK_THROWS(UdpFlow(3, Direction::Upload, 4, UdpConfig{64, 0.0, true}, sim, sim::RngStream(1, 9), {}));

  sim::Simulator cbr_sim;
  std::vector<double> times;
  UdpFlow cbr(4, Direction::Download, 2, UdpConfig{64, 1.0, false}, cbr_sim, sim::RngStream(1, 10),
              [&](const Packet&) { times.push_back(cbr_sim.now()); });
  cbr.start();
  cbr_sim.run_until(5.5);
  CHECK(times == std::vector<double>{1, 2, 3, 4, 5});
}
