#pragma once

#include "bufsim/harness/config.hpp"
#include "bufsim/harness/metrics.hpp"
#include "bufsim/sim/trace.hpp"

namespace bufsim::harness {

/// Builds the WLAN of the configuration, runs it to sim.duration and reports
/// steady-state metrics gathered after sim.warmup. Deterministic for a given
/// configuration and seed.
MetricsReport run_scenario(const ScenarioConfig& cfg, sim::TraceSink* trace = nullptr);

/// run_scenario plus efficiency against the best of the reference buffers
/// (`reference.buffers`, applied to the AP), or against the run itself when
/// none are listed.
MetricsReport run_with_reference(const ScenarioConfig& cfg, sim::TraceSink* trace = nullptr,
                                 std::vector<MetricsReport>* references = nullptr);

}  // namespace bufsim::harness
