#include "bufsim/harness/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

namespace bufsim::harness {

const char* flow_class_name(FlowClass c) {
  switch (c) {
    case FlowClass::LongDownload:
      return "download";
    case FlowClass::LongUpload:
      return "upload";
    case FlowClass::ShortDownload:
      return "short";
    case FlowClass::UdpDownload:
      return "udp-down";
    case FlowClass::UdpUpload:
      return "udp-up";
  }
  return "?";
}

double efficiency(const MetricsReport& report, const MetricsReport& reference) {
  if (report.traffic_hash != reference.traffic_hash) {
    throw std::invalid_argument("efficiency needs runs with identical traffic and channel configuration");
  }
  if (!(reference.ap_goodput_bps > 0)) throw std::invalid_argument("reference run carried no AP traffic");
  return report.ap_goodput_bps / reference.ap_goodput_bps;
}

std::vector<ShortFlowSummary> short_flow_stats(const MetricsReport& report) {
  std::map<double, ShortFlowSummary> by_size;
  for (const ShortFlowRecord& s : report.short_flows) {
    ShortFlowSummary& b = by_size[s.size_kb];
    b.size_kb = s.size_kb;
    ++b.started;
    if (s.completion >= 0) {
      ++b.completed;
      b.mean_completion += s.completion - s.start;
    }
  }
  std::vector<ShortFlowSummary> out;
  for (auto& [size, b] : by_size) {
    if (b.completed == 0) continue;
    b.mean_completion /= static_cast<double>(b.completed);
    out.push_back(b);
  }
  return out;
}

namespace {

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_summary_header(std::ostream& out) {
  out << "config_hash,seed,label,buffer_ap,download_goodput_bps,upload_goodput_bps,udp_goodput_bps,"
         "ap_goodput_bps,efficiency,max_srtt_download_s,max_srtt_upload_s,max_srtt_s,mean_limit,"
         "mean_occupancy,max_occupancy,ap_drops,drops,mac_drops,rtos,loss_events,congestion_events,"
         "airtime_busy_s,airtime_idle_s,collisions,mean_service_time_s\n";
}

void write_summary_row(std::ostream& out, const MetricsReport& r) {
  out << hex(r.config_hash) << ',' << r.seed << ',' << r.label << ',' << r.buffer_ap << ','
      << num(r.download_goodput_bps) << ',' << num(r.upload_goodput_bps) << ',' << num(r.udp_goodput_bps) << ','
      << num(r.ap_goodput_bps) << ',' << num(r.efficiency) << ',' << num(r.max_srtt_download) << ','
      << num(r.max_srtt_upload) << ',' << num(r.max_srtt) << ',' << num(r.mean_limit) << ','
      << num(r.mean_occupancy) << ',' << num(r.max_occupancy) << ',' << r.ap_drops << ',' << r.drops << ','
      << r.mac_drops << ',' << r.rtos << ',' << r.loss_events << ',' << r.congestion.size() << ','
      << num(r.airtime.busy) << ',' << num(r.airtime.idle) << ',' << r.airtime.collisions << ','
      << num(r.mean_service_time) << '\n';
}

void write_flows_header(std::ostream& out) {
  out << "config_hash,seed,label,flow,direction,station,goodput_bps,max_srtt_s,drops,rtos\n";
}

void write_flows_rows(std::ostream& out, const MetricsReport& r) {
  for (const FlowReport& f : r.flows) {
    out << hex(r.config_hash) << ',' << r.seed << ',' << r.label << ',' << f.id << ',' << flow_class_name(f.cls)
        << ',' << f.station << ',' << num(f.goodput_bps) << ',' << num(f.max_srtt) << ',' << f.drops << ','
        << f.rtos << '\n';
  }
}

void write_limits(std::ostream& out, const MetricsReport& r) {
  out << "time,node,limit,occupancy\n";
  char buf[96];
  for (const LimitSample& s : r.limits) {
    std::snprintf(buf, sizeof buf, "%.6f,%d,%.6g,%.0f\n", s.time, s.node, s.limit, s.occupancy);
    out << buf;
  }
}

void write_service_hist(std::ostream& out, const MetricsReport& r) {
  out << "node,bin_start_s,count\n";
  for (const auto& [node, bins] : r.service_hist.counts) {
    for (const auto& [bin, count] : bins) {
      out << node << ',' << num(static_cast<double>(bin) * r.service_hist.bin) << ',' << count << '\n';
    }
  }
}

void write_short_flows(std::ostream& out, const MetricsReport& r) {
  out << "size_kb,started,completed,mean_completion_s\n";
  for (const ShortFlowSummary& s : short_flow_stats(r)) {
    out << num(s.size_kb) << ',' << s.started << ',' << s.completed << ',' << num(s.mean_completion) << '\n';
  }
}

void write_congestion(std::ostream& out, const MetricsReport& r) {
  out << "time,ap_limit,ap_occupancy,backoffs\n";
  for (const CongestionEvent& e : r.congestion) {
    out << num(e.time) << ',' << num(e.ap_limit) << ',' << num(e.ap_occupancy) << ',' << e.backoffs << '\n';
  }
}

}  // namespace bufsim::harness
