#pragma once

#include <cstdint>
#include <ostream>
#include <string_view>
#include <vector>

#include "bufsim/sim/simulator.hpp"

namespace bufsim::sim {

enum class TraceKind : std::uint8_t { Enqueue, Drop, TxStart, TxSuccess, Collision, LimitUpdate, CwndUpdate };

std::string_view to_string(TraceKind kind);

struct TraceRecord {
  SimTime time = 0.0;
  int station = 0;
  TraceKind kind = TraceKind::Enqueue;
  double value = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void record(const TraceRecord& r) = 0;
};

/// Writes `time,station,kind,value` rows with a header line and LF endings.
class CsvTraceSink final : public TraceSink {
 public:
  explicit CsvTraceSink(std::ostream& out);
  void record(const TraceRecord& r) override;

 private:
  std::ostream& out_;
};

class VectorTraceSink final : public TraceSink {
 public:
  void record(const TraceRecord& r) override { records.push_back(r); }
  std::vector<TraceRecord> records;
};

}  // namespace bufsim::sim
