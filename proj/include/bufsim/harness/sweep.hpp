#pragma once

#include <string>
#include <vector>

#include "bufsim/harness/config.hpp"
#include "bufsim/harness/metrics.hpp"

namespace bufsim::harness {

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;

  /// Parses `section.key=v1,v2,...`.
  static SweepAxis parse(const std::string& text);
};

/// Seed of replicate r; replicate 0 keeps the base seed.
std::uint64_t replicate_seed(std::uint64_t base, int replicate);

/// One report per (axis value, replicate), ordered by value then replicate.
/// An empty axis runs the template once per replicate. Runs are independent
/// and spread over `workers` threads (0 picks the hardware concurrency).
std::vector<MetricsReport> sweep(const Config& base, const SweepAxis& axis, int replicates, unsigned workers = 0);

}  // namespace bufsim::harness
