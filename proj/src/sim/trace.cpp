#include "bufsim/sim/trace.hpp"

#include <cstdio>

namespace bufsim::sim {

std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::Enqueue: return "enqueue";
    case TraceKind::Drop: return "drop";
    case TraceKind::TxStart: return "tx-start";
    case TraceKind::TxSuccess: return "tx-success";
    case TraceKind::Collision: return "collision";
    case TraceKind::LimitUpdate: return "limit-update";
    case TraceKind::CwndUpdate: return "cwnd-update";
  }
  return "unknown";
}

CsvTraceSink::CsvTraceSink(std::ostream& out) : out_(out) { out_ << "time,station,kind,value\n"; }

void CsvTraceSink::record(const TraceRecord& r) {
  // printf formatting is locale-independent for these conversions under the C locale
  char line[128];
  int n = std::snprintf(line, sizeof line, "%.9f,%d,%s,%.10g\n", r.time, r.station, to_string(r.kind).data(), r.value);
  out_.write(line, n);
}

}  // namespace bufsim::sim
