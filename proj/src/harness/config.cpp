#include "bufsim/harness/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bufsim::harness {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d{
      {"phy.preset", "54/6"},
      {"phy.ber", "0"},
      {"phy.aggregation", "preset"},
      {"mac.mode", "edca"},
      {"edca.data_cw_min", "32"},
      {"edca.data_cw_max", "1024"},
      {"edca.data_aifs", "6"},
      {"edca.ack_cw_min", "4"},
      {"edca.ack_cw_max", "8"},
      {"edca.ack_aifs", "2"},
      {"traffic.downloads", "1"},
      {"traffic.uploads", "0"},
      {"traffic.download_start", "0"},
      {"traffic.upload_start", "0"},
      {"tcp.beta", "0.5"},
      {"tcp.awnd", "4096"},
      {"tcp.slow_start", "true"},
      {"wired.rtt", "0.2"},
      {"wired.bandwidth", "100e6"},
      {"udp.downloads", "0"},
      {"udp.uploads", "0"},
      {"udp.size", "64"},
      {"udp.interval", "1"},
      {"udp.poisson", "true"},
      {"udp.saturated", "false"},
      {"short.enabled", "false"},
      {"short.sizes", "5,20,30,100"},
      {"short.interval", "10"},
      {"buffer.ap", "fixed:400"},
      {"buffer.sta", "fixed:400"},
      {"buffer.ack", "fixed:400"},
      {"ebdp.t_max", "0.2"},
      {"ebdp.c", "5"},
      {"ebdp.w", "0.001"},
      {"ebdp.q_max", "1600"},
      {"alt.a1", "10"},
      {"alt.b1", "1"},
      {"alt.interval", "1"},
      {"alt.q_thr", "0"},
      {"alt.q_min", "5"},
      {"alt.q_max", "1600"},
      {"alt.q_init", "30"},
      {"sim.duration", "300"},
      {"sim.warmup", "20"},
      {"sim.seed", "1"},
      {"sim.sample_interval", "0.1"},
      {"reference.buffers", ""},
      {"output.service_hist", "false"},
      {"output.hist_bin", "0.0001"},
  };
  return d;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool is_traffic_key(const std::string& key) {
  for (const char* p : {"buffer.", "ebdp.", "alt.", "reference.", "output.", "sim.seed", "sim.sample_interval"}) {
    if (key.rfind(p, 0) == 0) return false;
  }
  return true;
}

double parse_number(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  return v;
}

}  // namespace

Config::Config() : values_(defaults()) {}

bool Config::known(const std::string& key) { return defaults().count(key) != 0; }

void Config::set(const std::string& key, const std::string& value) {
  if (!known(key)) throw ConfigError(key, "unknown key");
  values_[key] = value;
}

void Config::apply_override(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(trim(assignment), "expected key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(line, "line " + std::to_string(lineno) + " is not of the form key = value");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "unknown key");
  return it->second;
}

double Config::number(const std::string& key) const { return parse_number(key, get(key)); }

std::int64_t Config::integer(const std::string& key) const {
  double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError(key, "expected an integer, got '" + get(key) + "'");
  return static_cast<std::int64_t>(v);
}

bool Config::boolean(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, "expected a boolean, got '" + v + "'");
}

std::vector<double> Config::numbers(const std::string& key) const {
  std::vector<double> out;
  std::string item;
  std::istringstream in(get(key));
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number(key, item));
  }
  return out;
}

std::uint64_t Config::hash() const {
  std::string canon;
  for (const auto& [k, v] : values_) canon += k + "=" + v + "\n";
  return fnv1a(canon);
}

std::uint64_t Config::traffic_hash() const {
  std::string canon;
  for (const auto& [k, v] : values_) {
    if (is_traffic_key(k)) canon += k + "=" + v + "\n";
  }
  return fnv1a(canon);
}

BufferSpec BufferSpec::parse(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  if (t == "ebdp") return {BufferMode::Ebdp, 0.0};
  if (t == "alt") return {BufferMode::Alt, 0.0};
  if (t == "astar") return {BufferMode::AStar, 0.0};
  std::string n = t.rfind("fixed:", 0) == 0 ? t.substr(6) : t;
  double v = 0.0;
  try {
    v = parse_number(key, n);
  } catch (const ConfigError&) {
    throw ConfigError(key, "expected fixed:N, ebdp, alt or astar, got '" + text + "'");
  }
  if (!(v >= 1)) throw ConfigError(key, "fixed buffer must hold at least one packet");
  return {BufferMode::Fixed, v};
}

std::string BufferSpec::to_string() const {
  switch (mode) {
    case BufferMode::Ebdp:
      return "ebdp";
    case BufferMode::Alt:
      return "alt";
    case BufferMode::AStar:
      return "astar";
    case BufferMode::Fixed:
      break;
  }
  std::ostringstream ss;
  ss << "fixed:" << packets;
  return ss.str();
}

bufsizing::BufferSizer BufferSpec::make(const bufsizing::EbdpParams& e, const bufsizing::AltParams& a) const {
  switch (mode) {
    case BufferMode::Ebdp:
      return bufsizing::BufferSizer::ebdp(e);
    case BufferMode::Alt:
      return bufsizing::BufferSizer::alt(a);
    case BufferMode::AStar:
      return bufsizing::BufferSizer::astar(e, a);
    case BufferMode::Fixed:
      break;
  }
  return bufsizing::BufferSizer::fixed(packets);
}

ScenarioConfig ScenarioConfig::from(const Config& cfg) {
  ScenarioConfig s;
  s.source = cfg;

  s.phy_preset = cfg.get("phy.preset");
  try {
    mac::PhyPreset preset = mac::phy_preset(s.phy_preset);
    s.phy = preset.phy;
    s.aggregation_k = preset.aggregation_k;
  } catch (const std::invalid_argument&) {
    throw ConfigError("phy.preset", "unknown preset '" + s.phy_preset + "' (use 1/1, 11/1, 54/6 or 216/54)");
  }
  if (cfg.get("phy.aggregation") != "preset") {
    auto k = cfg.integer("phy.aggregation");
    if (k < 1) throw ConfigError("phy.aggregation", "must be at least 1");
    s.aggregation_k = static_cast<int>(k);
  }
  s.ber = cfg.number("phy.ber");
  if (!(s.ber >= 0 && s.ber < 1)) throw ConfigError("phy.ber", "must lie in [0,1)");

  const std::string& mode = cfg.get("mac.mode");
  if (mode == "dcf") {
    s.mac_mode = MacMode::Dcf;
  } else if (mode == "edca") {
    s.mac_mode = MacMode::Edca;
  } else {
    throw ConfigError("mac.mode", "expected dcf or edca, got '" + mode + "'");
  }

  auto mac_class = [&](const std::string& prefix) {
    mac::MacClassParams c;
    c.cw_min = static_cast<int>(cfg.integer(prefix + "_cw_min"));
    c.cw_max = static_cast<int>(cfg.integer(prefix + "_cw_max"));
    c.aifs = static_cast<int>(cfg.integer(prefix + "_aifs"));
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(prefix + "_cw_min", e.what());
    }
    return c;
  };
  s.edca_data = mac_class("edca.data");
  s.edca_ack = mac_class("edca.ack");

  auto count = [&](const char* key) {
    auto v = cfg.integer(key);
    if (v < 0) throw ConfigError(key, "must be non-negative");
    return static_cast<int>(v);
  };
  auto non_negative = [&](const char* key) {
    double v = cfg.number(key);
    if (!(v >= 0)) throw ConfigError(key, "must be non-negative");
    return v;
  };
  auto positive = [&](const char* key) {
    double v = cfg.number(key);
    if (!(v > 0)) throw ConfigError(key, "must be positive");
    return v;
  };

  s.n_downloads = count("traffic.downloads");
  s.n_uploads = count("traffic.uploads");
  s.download_start = non_negative("traffic.download_start");
  s.upload_start = non_negative("traffic.upload_start");
  s.tcp_beta = cfg.number("tcp.beta");
  if (!(s.tcp_beta > 0 && s.tcp_beta <= 1)) throw ConfigError("tcp.beta", "must lie in (0,1]");
  s.tcp_awnd = cfg.number("tcp.awnd");
  if (!(s.tcp_awnd >= 2)) throw ConfigError("tcp.awnd", "must be at least 2");
  s.slow_start = cfg.boolean("tcp.slow_start");

  s.wired_rtt = non_negative("wired.rtt");
  s.wired_bandwidth = positive("wired.bandwidth");

  s.udp_downloads = count("udp.downloads");
  s.udp_uploads = count("udp.uploads");
  auto udp_size = cfg.integer("udp.size");
  if (udp_size < 1) throw ConfigError("udp.size", "must be positive");
  s.udp_bytes = static_cast<std::uint32_t>(udp_size);
  s.udp_interval = positive("udp.interval");
  s.udp_poisson = cfg.boolean("udp.poisson");
  s.udp_saturated = cfg.boolean("udp.saturated");

  s.short_enabled = cfg.boolean("short.enabled");
  s.short_sizes_kb = cfg.numbers("short.sizes");
  for (double kb : s.short_sizes_kb) {
    if (!(kb > 0)) throw ConfigError("short.sizes", "sizes must be positive");
  }
  s.short_interval = positive("short.interval");

  s.buffer_ap = BufferSpec::parse("buffer.ap", cfg.get("buffer.ap"));
  s.buffer_sta = BufferSpec::parse("buffer.sta", cfg.get("buffer.sta"));
  s.buffer_ack = BufferSpec::parse("buffer.ack", cfg.get("buffer.ack"));

  s.ebdp.t_max = cfg.number("ebdp.t_max");
  s.ebdp.c = cfg.number("ebdp.c");
  s.ebdp.w = cfg.number("ebdp.w");
  s.ebdp.q_max = cfg.number("ebdp.q_max");
  try {
    s.ebdp.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("ebdp", e.what());
  }
  s.alt.a1 = cfg.number("alt.a1");
  s.alt.b1 = cfg.number("alt.b1");
  s.alt.interval = cfg.number("alt.interval");
  s.alt.q_thr = cfg.number("alt.q_thr");
  s.alt.q_min = cfg.number("alt.q_min");
  s.alt.q_max = cfg.number("alt.q_max");
  s.alt.q_init = cfg.number("alt.q_init");
  try {
    s.alt.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("alt", e.what());
  }

  s.duration = positive("sim.duration");
  s.warmup = non_negative("sim.warmup");
  if (!(s.duration > s.warmup)) throw ConfigError("sim.duration", "must exceed sim.warmup");
  auto seed = cfg.integer("sim.seed");
  if (seed < 0) throw ConfigError("sim.seed", "must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);
  s.sample_interval = positive("sim.sample_interval");

  s.reference_buffers = cfg.numbers("reference.buffers");
  for (double b : s.reference_buffers) {
    if (!(b >= 1)) throw ConfigError("reference.buffers", "buffer sizes must be at least 1");
  }
  s.service_hist = cfg.boolean("output.service_hist");
  s.hist_bin = positive("output.hist_bin");

  bool any_traffic = s.n_downloads + s.n_uploads > 0 || s.udp_downloads + s.udp_uploads > 0 || s.short_enabled;
  if (!any_traffic) throw ConfigError("traffic.downloads", "scenario has no traffic");
  return s;
}

}  // namespace bufsim::harness
