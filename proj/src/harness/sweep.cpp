#include "bufsim/harness/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "bufsim/harness/scenario.hpp"
#include "bufsim/sim/rng.hpp"

namespace bufsim::harness {

SweepAxis SweepAxis::parse(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError(text, "axis must be key=v1,v2,...");
  SweepAxis axis;
  axis.key = text.substr(0, eq);
  if (!Config::known(axis.key)) throw ConfigError(axis.key, "unknown key");
  std::istringstream in(text.substr(eq + 1));
  std::string v;
  while (std::getline(in, v, ',')) {
    if (!v.empty()) axis.values.push_back(v);
  }
  return axis;
}

std::uint64_t replicate_seed(std::uint64_t base, int replicate) {
  if (replicate == 0) return base;
  return sim::splitmix64(base ^ sim::splitmix64(static_cast<std::uint64_t>(replicate))) & 0xFFFFFFFFFFFFULL;
}

std::vector<MetricsReport> sweep(const Config& base, const SweepAxis& axis, int replicates, unsigned workers) {
  if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
  struct Job {
    ScenarioConfig cfg;
    std::string label;
  };
  std::vector<Job> jobs;
  std::vector<std::string> values = axis.values.empty() ? std::vector<std::string>{""} : axis.values;
  std::uint64_t base_seed = ScenarioConfig::from(base).seed;
  for (const std::string& v : values) {
    Config c = base;
    if (!axis.key.empty() && !v.empty()) c.set(axis.key, v);
    for (int r = 0; r < replicates; ++r) {
      c.set("sim.seed", std::to_string(replicate_seed(base_seed, r)));
      jobs.push_back({ScenarioConfig::from(c), axis.key.empty() ? "" : axis.key + "=" + v});
    }
  }

  std::vector<MetricsReport> out(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        out[i] = run_with_reference(jobs[i].cfg);
        out[i].label = jobs[i].label;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, jobs.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace bufsim::harness
