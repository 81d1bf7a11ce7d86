#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "bufsim/mac/wlan.hpp"

namespace bufsim::harness {

enum class FlowClass { LongDownload, LongUpload, ShortDownload, UdpDownload, UdpUpload };

const char* flow_class_name(FlowClass c);

struct FlowReport {
  std::uint32_t id = 0;
  FlowClass cls = FlowClass::LongDownload;
  int station = 0;
  double goodput_bps = 0.0;
  double max_srtt = 0.0;
  std::uint64_t drops = 0;
  std::uint64_t rtos = 0;
  std::uint64_t loss_events = 0;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
};

struct LimitSample {
  double time = 0.0;
  int node = 0;
  double limit = 0.0;
  double occupancy = 0.0;
};

/// Cwnd decreases collapsed within one wired RTT, with the AP state at the first one.
struct CongestionEvent {
  double time = 0.0;
  double ap_limit = 0.0;
  double ap_occupancy = 0.0;
  int backoffs = 0;
};

struct ShortFlowRecord {
  double size_kb = 0.0;
  double start = 0.0;
  double completion = -1.0;  // < 0 while unfinished
};

struct ServiceHistogram {
  double bin = 1e-4;
  std::map<int, std::map<std::int64_t, std::uint64_t>> counts;  // node -> bin index -> count
};

struct MetricsReport {
  std::uint64_t config_hash = 0;
  std::uint64_t traffic_hash = 0;
  std::uint64_t seed = 0;
  std::string label;
  std::string buffer_ap;
  double measured = 0.0;  // seconds after warmup

  double download_goodput_bps = 0.0;
  double upload_goodput_bps = 0.0;
  double udp_goodput_bps = 0.0;
  /// Goodput through the AP used for efficiency: long downloads if any, else all long flows.
  double ap_goodput_bps = 0.0;
  double efficiency = std::numeric_limits<double>::quiet_NaN();

  double max_srtt_download = 0.0;
  double max_srtt_upload = 0.0;
  double max_srtt = 0.0;

  double mean_limit = 0.0;
  double mean_occupancy = 0.0;
  double max_occupancy = 0.0;
  double mean_service_time = 0.0;  // AP data queue, per packet

  std::uint64_t ap_drops = 0;
  std::uint64_t drops = 0;  // all queues
  std::uint64_t mac_drops = 0;
  std::uint64_t rtos = 0;
  std::uint64_t loss_events = 0;
  mac::AirtimeStats airtime;
  double elapsed = 0.0;
  std::uint64_t events = 0;
  double alt_idle = 0.0;  // AP ALT idle/busy seconds accumulated after warmup
  double alt_busy = 0.0;

  std::vector<FlowReport> flows;
  std::vector<LimitSample> limits;
  std::vector<CongestionEvent> congestion;
  std::vector<ShortFlowRecord> short_flows;
  ServiceHistogram service_hist;
};

/// AP goodput ratio. Throws std::invalid_argument when the two reports do not
/// share the same traffic and channel configuration.
double efficiency(const MetricsReport& report, const MetricsReport& reference);

struct ShortFlowSummary {
  double size_kb = 0.0;
  std::size_t started = 0;
  std::size_t completed = 0;
  double mean_completion = 0.0;
};

/// One entry per size with at least one completed flow, ordered by size.
std::vector<ShortFlowSummary> short_flow_stats(const MetricsReport& report);

void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const MetricsReport& r);
void write_flows_header(std::ostream& out);
void write_flows_rows(std::ostream& out, const MetricsReport& r);
void write_limits(std::ostream& out, const MetricsReport& r);
void write_service_hist(std::ostream& out, const MetricsReport& r);
void write_short_flows(std::ostream& out, const MetricsReport& r);
void write_congestion(std::ostream& out, const MetricsReport& r);

}  // namespace bufsim::harness
