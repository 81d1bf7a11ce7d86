#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "bufsim/analysis/model.hpp"
#include "bufsim/harness/config.hpp"
#include "bufsim/harness/scenario.hpp"
#include "bufsim/harness/sweep.hpp"
#include "bufsim/sim/trace.hpp"

namespace fs = std::filesystem;
using namespace bufsim;

namespace {

harness::Config load_config(const std::string& path, const std::vector<std::string>& overrides, long long seed) {
  harness::Config cfg = harness::Config::load(path);
  for (const auto& o : overrides) cfg.apply_override(o);
  if (seed >= 0) cfg.set("sim.seed", std::to_string(seed));
  return cfg;
}

std::ofstream open_out(const fs::path& dir, const char* name) {
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

void write_reports(const fs::path& dir, const std::vector<harness::MetricsReport>& reports, bool limits) {
  fs::create_directories(dir);
  auto summary = open_out(dir, "summary.csv");
  auto flows = open_out(dir, "flows.csv");
  harness::write_summary_header(summary);
  harness::write_flows_header(flows);
  for (const auto& r : reports) {
    harness::write_summary_row(summary, r);
    harness::write_flows_rows(flows, r);
  }
  if (limits && !reports.empty()) {
    auto l = open_out(dir, "limits.csv");
    harness::write_limits(l, reports.front());
  }
}

void print_report(const harness::MetricsReport& r) {
  std::printf("buffer.ap           %s\n", r.buffer_ap.c_str());
  std::printf("download goodput    %.3f Mb/s\n", r.download_goodput_bps / 1e6);
  std::printf("upload goodput      %.3f Mb/s\n", r.upload_goodput_bps / 1e6);
  if (r.udp_goodput_bps > 0) std::printf("udp goodput         %.3f Mb/s\n", r.udp_goodput_bps / 1e6);
  std::printf("efficiency          %.4f\n", r.efficiency);
  std::printf("max sRTT down/up    %.1f / %.1f ms\n", r.max_srtt_download * 1e3, r.max_srtt_upload * 1e3);
  std::printf("AP limit mean       %.1f packets\n", r.mean_limit);
  std::printf("AP occupancy mean   %.1f (max %.0f)\n", r.mean_occupancy, r.max_occupancy);
  std::printf("drops ap/all/mac    %llu / %llu / %llu\n", static_cast<unsigned long long>(r.ap_drops),
              static_cast<unsigned long long>(r.drops), static_cast<unsigned long long>(r.mac_drops));
  std::printf("rtos                %llu\n", static_cast<unsigned long long>(r.rtos));
  std::printf("congestion events   %zu\n", r.congestion.size());
  std::printf("events / wall time  %llu / %.2f s\n", static_cast<unsigned long long>(r.events), r.elapsed);
  for (const auto& s : harness::short_flow_stats(r)) {
    std::printf("short %5.0f KB      %.3f s mean over %zu\n", s.size_kb, s.mean_completion, s.completed);
  }
}

// Model parameters use the same `key = value` format as scenarios.
analysis::ModelParams load_model(const std::string& path, analysis::FlowEnsemble& ens, double& q0, int& steps) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto take = [&](const std::string& k, double def) {
    auto it = kv.find(k);
    if (it == kv.end()) return def;
    double v = std::stod(it->second);
    kv.erase(it);
    return v;
  };
  int n = static_cast<int>(take("flows", 1));
  double rtt = take("rtt", 0.2);
  double beta = take("beta", 0.5);
  ens = analysis::FlowEnsemble::identical(static_cast<std::size_t>(n), rtt, beta);
  analysis::ModelParams mp =
      analysis::ModelParams::from_ensemble(ens, take("a", 10), take("b", 1), take("service_rate", 1800));
  mp.delta = take("delta", 0.0);
  mp.p_e = take("p_e", 1.0);
  q0 = take("q0", 0.0);
  steps = static_cast<int>(take("steps", 50));
  if (!kv.empty()) throw std::invalid_argument("unknown model key '" + kv.begin()->first + "'");
  mp.validate();
  return mp;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WLAN buffer sizing simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  long long seed = -1;
  std::string out_dir = "out";
  bool trace = false;

  auto* run = app.add_subcommand("run", "run one scenario");
  run->add_option("config", config_path, "scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", overrides, "override section.key=value");
  run->add_option("--seed", seed, "override sim.seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--trace", trace, "write trace.csv");

  std::string axis_text;
  int replicates = 1;
  unsigned workers = 0;
  auto* sw = app.add_subcommand("sweep", "sweep one configuration key");
  sw->add_option("config", config_path, "scenario file")->required()->check(CLI::ExistingFile);
  sw->add_option("--axis", axis_text, "key=v1,v2,...");
  sw->add_option("--replicates", replicates, "runs per axis value")->check(CLI::PositiveNumber);
  sw->add_option("--workers", workers, "parallel runs (0: all cores)");
  sw->add_option("--set", overrides, "override section.key=value");
  sw->add_option("--seed", seed, "base seed");
  sw->add_option("--out", out_dir, "output directory");

  std::string model_path;
  bool trajectory = false;
  auto* an = app.add_subcommand("analyze", "evaluate the congestion-epoch model");
  an->add_option("model", model_path, "model parameter file")->required()->check(CLI::ExistingFile);
  an->add_flag("--trajectory", trajectory, "print k,EQ rows");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      harness::Config cfg = load_config(config_path, overrides, seed);
      harness::ScenarioConfig sc = harness::ScenarioConfig::from(cfg);
      fs::path dir(out_dir);
      fs::create_directories(dir);
      std::unique_ptr<std::ofstream> trace_file;
      std::unique_ptr<sim::CsvTraceSink> sink;
      if (trace) {
        trace_file = std::make_unique<std::ofstream>(open_out(dir, "trace.csv"));
        sink = std::make_unique<sim::CsvTraceSink>(*trace_file);
      }
      std::vector<harness::MetricsReport> refs;
      harness::MetricsReport r = harness::run_with_reference(sc, sink.get(), &refs);
      std::vector<harness::MetricsReport> all{r};
      all.insert(all.end(), refs.begin(), refs.end());
      write_reports(dir, all, true);
      {
        auto c = open_out(dir, "congestion.csv");
        harness::write_congestion(c, r);
      }
      if (sc.service_hist) {
        auto h = open_out(dir, "service_hist.csv");
        harness::write_service_hist(h, r);
      }
      if (sc.short_enabled) {
        auto s = open_out(dir, "short_flows.csv");
        harness::write_short_flows(s, r);
      }
      print_report(r);
    } else if (*sw) {
      harness::Config cfg = load_config(config_path, overrides, seed);
      harness::SweepAxis axis;
      if (!axis_text.empty()) axis = harness::SweepAxis::parse(axis_text);
      auto reports = harness::sweep(cfg, axis, replicates, workers);
      write_reports(fs::path(out_dir), reports, false);
      for (const auto& r : reports) {
        std::printf("%-28s seed %-20llu eff %.4f  goodput %.3f Mb/s  max sRTT %.0f ms  limit %.1f\n",
                    r.label.c_str(), static_cast<unsigned long long>(r.seed), r.efficiency,
                    r.ap_goodput_bps / 1e6, r.max_srtt * 1e3, r.mean_limit);
      }
    } else if (*an) {
      analysis::FlowEnsemble ens;
      double q0 = 0.0;
      int steps = 0;
      analysis::ModelParams mp = load_model(model_path, ens, q0, steps);
      auto c = analysis::lambda_gamma(mp);
      auto st = analysis::is_stable(mp);
      auto ub = analysis::utilization_bounds(mp);
      std::printf("lambda_e        %.6f\n", c.lambda_e);
      std::printf("lambda_f        %.6f\n", c.lambda_f);
      std::printf("gamma_e         %.6f\n", c.gamma_e);
      std::printf("stable          %s (margin %.3f packets/s, a < 10 + b: %s)\n", st.stable ? "yes" : "no",
                  st.margin, st.practical ? "yes" : "no");
      try {
        std::printf("fixed point     %.3f packets\n", analysis::fixed_point(mp));
      } catch (const std::invalid_argument& e) {
        std::printf("fixed point     undefined (%s)\n", e.what());
      }
      std::printf("utilization     tight %.6f  loose %.6f\n", ub.tight, ub.loose);
      if (trajectory) {
        std::printf("k,EQ\n");
        auto traj = analysis::recursion_trajectory(mp, ens, q0, steps);
        for (std::size_t k = 0; k < traj.size(); ++k) std::printf("%zu,%.6f\n", k, traj[k]);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
