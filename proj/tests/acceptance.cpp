#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <initializer_list>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "bufsim/analysis/model.hpp"
#include "bufsim/harness/config.hpp"
#include "bufsim/harness/scenario.hpp"
#include "bufsim/sim/trace.hpp"

using namespace bufsim;
using namespace bufsim::harness;

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

Config make(const Overrides& kv) {
  Config c;
  for (const auto& [k, v] : kv) c.set(k, v);
  return c;
}

MetricsReport run(const Overrides& kv, sim::TraceSink* trace = nullptr) {
  return run_with_reference(ScenarioConfig::from(make(kv)), trace);
}

/// Collects sub-check outcomes; a criterion passes only when every check does.
struct Verdict {
  bool ok = true;
  void check(bool cond, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    std::va_list ap;
    va_start(ap, fmt);
    std::printf("  [%s] ", cond ? "ok" : "miss");
    std::vprintf(fmt, ap);
    std::printf("\n");
    va_end(ap);
    ok = ok && cond;
  }
};

void note(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void note(const char* fmt, ...) {
  std::va_list ap;
  va_start(ap, fmt);
  std::printf("  ");
  std::vprintf(fmt, ap);
  std::printf("\n");
  va_end(ap);
}

std::vector<double> ap_limits_between(const MetricsReport& r, double from, double to, std::vector<double>* times) {
  std::vector<double> out;
  for (const LimitSample& s : r.limits) {
    if (s.node != 0 || s.time < from - 1e-9 || s.time > to + 1e-9) continue;
    out.push_back(s.limit);
    if (times) times->push_back(s.time);
  }
  return out;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double cv(const std::vector<double>& v) {
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / v.size()) / m;
}

std::vector<double> last_congestion_limits(const MetricsReport& r, std::size_t n) {
  std::vector<double> q;
  for (const CongestionEvent& e : r.congestion) q.push_back(e.ap_limit);
  if (q.size() > n) q.erase(q.begin(), q.end() - static_cast<long>(n));
  return q;
}

// 1: fixed-buffer tradeoff
bool criterion1() {
  Verdict v;
  const std::vector<int> grid{2, 5, 10, 20, 50, 80, 100, 200, 330, 380, 400, 800, 1600};
  std::vector<double> goodput;
  for (int b : grid) {
    MetricsReport r = run({{"buffer.ap", "fixed:" + std::to_string(b)}});
    goodput.push_back(r.ap_goodput_bps);
    note("fixed(%d): %.3f Mb/s, max sRTT %.0f ms", b, r.ap_goodput_bps / 1e6, r.max_srtt_download * 1e3);
  }
  double plateau = *std::max_element(goodput.begin(), goodput.end());
  bool monotone = true;
  for (std::size_t i = 1; i < goodput.size(); ++i) monotone = monotone && goodput[i] >= goodput[i - 1];
  v.check(monotone, "efficiency non-decreasing in buffer size");
  std::size_t at380 = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), 380) - grid.begin());
  v.check(goodput[at380] / plateau >= 0.99, "efficiency at 380 (330 + 15%%) = %.4f >= 0.99", goodput[at380] / plateau);

  MetricsReport slow = run({{"phy.preset", "11/1"}, {"traffic.uploads", "10"}, {"buffer.ap", "fixed:50"}});
  v.check(slow.max_srtt > 0.85, "11/1, 10 uploads, fixed(50): max sRTT %.0f ms > 850 ms", slow.max_srtt * 1e3);
  return v.ok;
}

// 2: eBDP steady limits and efficiency
bool criterion2() {
  Verdict v;
  for (int d : {1, 10}) {
    for (int u : {0, 2, 5, 10}) {
      MetricsReport r = run({{"buffer.ap", "ebdp"},
                             {"traffic.downloads", std::to_string(d)},
                             {"traffic.uploads", std::to_string(u)},
                             {"reference.buffers", "400"}});
      if (d == 1 && u == 0) {
        v.check(r.mean_limit >= 330 * 0.8 && r.mean_limit <= 350 * 1.2, "1 down / 0 up: limit %.1f in [264, 420]",
                r.mean_limit);
      }
      if (d == 1 && u == 10) {
        v.check(std::abs(r.mean_limit - 70) <= 14, "1 down / 10 up: limit %.1f in [56, 84]", r.mean_limit);
      }
      v.check(r.efficiency >= 0.9, "%d down / %d up: efficiency vs fixed(400) %.3f >= 0.9", d, u, r.efficiency);
      v.check(std::abs(r.max_srtt_download - 0.4) <= 0.1, "%d down / %d up: max download sRTT %.0f ms in [300, 500]", d,
              u, r.max_srtt_download * 1e3);
    }
  }
  return v.ok;
}

// 3: eBDP convergence after an upload step
bool criterion3() {
  Verdict v;
  const double step = 200.0;
  MetricsReport r = run({{"buffer.ap", "ebdp"}, {"traffic.uploads", "10"}, {"traffic.upload_start", "200"}});
  std::vector<double> before = ap_limits_between(r, 150.0, step, nullptr);
  std::vector<double> after = ap_limits_between(r, 250.0, 300.0, nullptr);
  double target = mean(after);
  std::vector<double> times;
  std::vector<double> series = ap_limits_between(r, step, 300.0, &times);
  // first instant after which the limit stays inside +-20% of the new steady mean
  double settled = times.back();
  for (std::size_t i = series.size(); i-- > 0;) {
    if (std::abs(series[i] - target) > 0.2 * target) break;
    settled = times[i];
  }
  note("limit before step %.1f, after %.1f packets", mean(before), target);
  v.check(settled - step <= 5.0, "limit settles within %.2f s of the step (<= 5 s)", settled - step);
  return v.ok;
}

// 4: ALT stability dichotomy
bool criterion4() {
  Verdict v;
  MetricsReport calm = run({{"buffer.ap", "alt"}, {"alt.a1", "10"}, {"sim.duration", "8000"}, {"sim.sample_interval", "10"}});
  std::vector<double> q = last_congestion_limits(calm, 50);
  note("a=10: %zu congestion events, last-50 mean %.1f", calm.congestion.size(), mean(q));
  v.check(q.size() == 50 && cv(q) < 0.1, "a=10, b=1: CV over last 50 events %.3f < 0.1", cv(q));

  MetricsReport wild = run({{"buffer.ap", "alt"},
                            {"alt.a1", "100"},
                            {"alt.q_max", "50000"},
                            {"sim.duration", "8000"},
                            {"sim.sample_interval", "10"}});
  std::vector<double> w = last_congestion_limits(wild, 50);
  note("a=100: %zu congestion events, last-50 mean %.1f", wild.congestion.size(), mean(w));
  v.check(w.size() == 50 && cv(w) > 0.2, "a=100, b=1: CV over last 50 events %.3f > 0.2", cv(w));
  std::vector<double> early(wild.congestion.size() / 2);
  for (std::size_t i = 0; i < early.size(); ++i) early[i] = wild.congestion[i].ap_limit;
  v.check(early.size() >= 25 && cv(early) > 0.2, "a=100: first-half CV %.3f > 0.2 (no settling)", cv(early));
  return v.ok;
}

// 5: utilization lower bound
bool criterion5() {
  Verdict v;
  for (double ratio : {0.01, 0.05, 0.1}) {
    for (int u : {0, 2}) {
      char b1[32];
      std::snprintf(b1, sizeof b1, "%g", 10.0 * ratio);
      MetricsReport r = run({{"buffer.ap", "alt"},
                             {"alt.b1", b1},
                             {"traffic.uploads", std::to_string(u)},
                             {"reference.buffers", "200,400,800"}});
      double bound = 1.0 / (1.0 + ratio) - 0.05;
      v.check(r.efficiency >= bound, "b/a=%.2f, %d up: efficiency %.3f >= %.3f (RTOs %llu)", ratio, u, r.efficiency,
              bound, static_cast<unsigned long long>(r.rtos));
    }
  }
  for (double ratio : {0.5, 1.0}) {
    char b1[32];
    std::snprintf(b1, sizeof b1, "%g", 10.0 * ratio);
    MetricsReport r =
        run({{"buffer.ap", "alt"}, {"alt.b1", b1}, {"traffic.uploads", "10"}, {"reference.buffers", "200,400,800"}});
    note("b/a=%.2f, 10 up: efficiency %.3f vs bound %.3f, RTOs %llu (violation permitted)", ratio, r.efficiency,
         1.0 / (1.0 + ratio), static_cast<unsigned long long>(r.rtos));
  }
  return v.ok;
}

// 6: A* statistical multiplexing and PHY sweep
bool criterion6() {
  Verdict v;
  const std::string refs = "20,50,100,200,400,800,1600";
  MetricsReport ten = run({{"buffer.ap", "astar"}, {"traffic.downloads", "10"}, {"reference.buffers", refs}});
  v.check(std::abs(ten.mean_limit - 100) <= 30, "10 downloads: A* mean limit %.1f in [70, 130]", ten.mean_limit);
  v.check(ten.efficiency >= 0.9, "10 downloads: efficiency %.3f >= 0.9", ten.efficiency);

  for (const char* preset : {"1/1", "11/1", "54/6", "216/54"}) {
    for (int u : {0, 10}) {
      Overrides kv{{"phy.preset", preset}, {"traffic.uploads", std::to_string(u)}, {"reference.buffers", refs}};
      kv.push_back({"buffer.ap", "astar"});
      MetricsReport a = run(kv);
      v.check(a.efficiency >= 0.85, "%s, %d up: efficiency %.3f >= 0.85", preset, u, a.efficiency);
      bool high_rate = std::string(preset) == "54/6" || std::string(preset) == "216/54";
      if (high_rate) {
        kv.back().second = "fixed:400";
        MetricsReport f = run(kv);
        v.check(a.max_srtt_download < f.max_srtt_download, "%s, %d up: A* max sRTT %.0f ms < fixed(400) %.0f ms",
                preset, u, a.max_srtt_download * 1e3, f.max_srtt_download * 1e3);
      }
    }
  }
  return v.ok;
}

// 7: simulated fixed point and oracle equivalence
bool criterion7() {
  Verdict v;
  MetricsReport r = run({{"buffer.ap", "alt"}, {"sim.duration", "8000"}, {"sim.sample_interval", "10"}});
  std::vector<double> q;
  for (const CongestionEvent& e : r.congestion) q.push_back(e.ap_limit);
  if (q.size() < 20) {
    v.check(false, "only %zu congestion events", q.size());
    return false;
  }
  q.erase(q.begin(), q.begin() + 10);
  double simulated = mean(q);
  analysis::FlowEnsemble ens = analysis::FlowEnsemble::identical(1, 0.2, 0.5);
  analysis::ModelParams mp = analysis::ModelParams::from_ensemble(ens, 10.0, 1.0, 1.0 / r.mean_service_time);
  double fp = analysis::fixed_point(mp);
  note("E[B] = %.0f packets/s from the AP service time, %zu events", mp.service_rate, q.size());
  v.check(std::abs(simulated - fp) <= 0.25 * fp, "simulated mean Q(k) %.1f within 25%% of fixed point %.1f", simulated,
          fp);

  for (double q0 : {0.0, fp, 3.0 * fp}) {
    analysis::OracleResult o = analysis::epoch_oracle(ens, mp, q0, 100, 10000, 7);
    std::vector<double> rec = analysis::recursion_trajectory(mp, ens, q0, o.moments);
    double worst = 0.0;
    for (std::size_t k = 1; k < rec.size(); ++k) {
      worst = std::max(worst, std::abs(rec[k] - o.mean[k]) / std::max(o.mean[k], 1e-12));
    }
    v.check(worst < 0.02, "q0=%.0f: recursion vs oracle worst relative gap %.2e < 0.02", q0, worst);
  }
  return v.ok;
}

// 8: property suite
bool criterion8() {
  Verdict v;
  Overrides kv{{"traffic.uploads", "2"}, {"buffer.ap", "alt"}, {"sim.duration", "120"}};
  sim::VectorTraceSink t1, t2;
  MetricsReport r1 = run(kv, &t1);
  MetricsReport r2 = run(kv, &t2);
  v.check(t1.records == t2.records && !t1.records.empty(), "identical traces per seed (%zu records)",
          t1.records.size());

  double elapsed = r1.airtime.busy + r1.airtime.idle;
  v.check(std::abs(elapsed - r1.measured) <= 1e-6 * r1.measured, "airtime busy + idle = %.6f s over %.1f s", elapsed,
          r1.measured);

  bool conserved = true;
  for (const FlowReport& f : r1.flows) {
    double inflight = static_cast<double>(f.sent) - static_cast<double>(f.delivered) - static_cast<double>(f.drops);
    conserved = conserved && std::abs(inflight) <= 800.0;
  }
  v.check(conserved, "per-flow sent - delivered - dropped bounded by buffer plus pipe");
  v.check(std::abs(r1.alt_idle + r1.alt_busy - r1.measured) <= 1e-6 * r1.measured,
          "ALT t_i + t_b = %.6f s over %.0f intervals", r1.alt_idle + r1.alt_busy, r1.measured);

  sim::RngStream rng(8, 0);
  bool lf_ok = true;
  bool bound_ok = true;
  for (int i = 0; i < 1000; ++i) {
    analysis::FlowEnsemble e;
    std::size_t n = 1 + rng.uniform_int(20);
    for (std::size_t j = 0; j < n; ++j) {
      e.rtts.push_back(0.01 + 0.5 * rng.uniform01());
      e.betas.push_back(0.1 + 0.9 * rng.uniform01());
    }
    analysis::ModelParams mp =
        analysis::ModelParams::from_ensemble(e, 0.1 + 50.0 * rng.uniform01(), 1e-3 + 5.0 * rng.uniform01(), 1000.0);
    mp.delta = 0.999 * rng.uniform01();
    double lf = analysis::lambda_gamma(mp).lambda_f;
    lf_ok = lf_ok && lf > 0.0 && lf < 1.0;
    analysis::UtilizationBounds u = analysis::utilization_bounds(mp);
    bound_ok = bound_ok && u.tight >= u.loose;
  }
  v.check(lf_ok, "lambda_f in (0,1) for b > 0 over 1000 random parameter sets");
  v.check(bound_ok, "tight >= loose utilization bound over 1000 random ensembles");

  analysis::ModelParams mp;
  mp.a = 10.0;
  mp.b = 0.0;
  mp.beta_t = 0.5;
  mp.service_rate = 1500.0;
  v.check(analysis::fixed_point(mp) == mp.service_rate * mp.t_t, "fixed point at b/a=0, beta_t=0.5 equals E[B] T_T");
  return v.ok;
}

// 9: BER robustness of the A* vs fixed ordering
bool criterion9() {
  Verdict v;
  const std::vector<int> fixed{20, 50, 100, 200, 400, 800};
  std::map<std::string, std::pair<MetricsReport, std::vector<MetricsReport>>> runs;
  for (const char* ber : {"0", "1e-5"}) {
    auto& [a, f] = runs[ber];
    a = run({{"phy.ber", ber}, {"buffer.ap", "astar"}});
    for (int b : fixed) f.push_back(run({{"phy.ber", ber}, {"buffer.ap", "fixed:" + std::to_string(b)}}));
    note("ber %s: A* %.2f Mb/s, %.0f ms", ber, a.ap_goodput_bps / 1e6, a.max_srtt_download * 1e3);
  }
  auto sign = [](double x, double ref) { return std::abs(x - ref) <= 0.02 * ref ? 0 : (x > ref ? 1 : -1); };
  int compared = 0;
  bool same = true;
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    const MetricsReport& f0 = runs["0"].second[i];
    const MetricsReport& f1 = runs["1e-5"].second[i];
    const MetricsReport& a0 = runs["0"].first;
    const MetricsReport& a1 = runs["1e-5"].first;
    for (auto metric : {&MetricsReport::ap_goodput_bps, &MetricsReport::max_srtt_download}) {
      int s0 = sign(a0.*metric, f0.*metric);
      int s1 = sign(a1.*metric, f1.*metric);
      if (s0 == 0 || s1 == 0) continue;
      ++compared;
      same = same && s0 == s1;
    }
  }
  v.check(same && compared >= 6, "A* vs fixed ordering preserved in %d separable comparisons", compared);
  return v.ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> which;
  app.add_option("--criterion,-c", which, "criteria to run (default: all)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  const std::vector<std::function<bool()>> table{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                 criterion6, criterion7, criterion8, criterion9};
  bool all = true;
  for (int c : which) {
    std::printf("criterion %d\n", c);
    std::fflush(stdout);
    bool ok = table[static_cast<std::size_t>(c - 1)]();
    std::printf("%s criterion %d\n", ok ? "PASS" : "FAIL", c);
    std::fflush(stdout);
    all = all && ok;
  }
  return all ? 0 : 1;
}
