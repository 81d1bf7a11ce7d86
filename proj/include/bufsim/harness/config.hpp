#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bufsim/bufsizing/alt.hpp"
#include "bufsim/bufsizing/ebdp.hpp"
#include "bufsim/bufsizing/sizer.hpp"
#include "bufsim/mac/phy.hpp"

namespace bufsim::harness {

/// Thrown for any invalid configuration; key() names the offending entry.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Flat `section.key = value` store. Every key has a default; unknown keys
/// are rejected on set().
class Config {
 public:
  Config();

  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  /// Applies one `section.key=value` override.
  void apply_override(const std::string& assignment);

  const std::string& get(const std::string& key) const;
  double number(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return values_; }
  static bool known(const std::string& key);

  /// FNV-1a over the canonical `key=value\n` listing.
  std::uint64_t hash() const;
  /// Same, restricted to keys that define the offered traffic and channel
  /// (buffer policy, controller gains, seed and outputs excluded).
  std::uint64_t traffic_hash() const;

 private:
  std::map<std::string, std::string> values_;
};

enum class BufferMode { Fixed, Ebdp, Alt, AStar };

struct BufferSpec {
  BufferMode mode = BufferMode::Fixed;
  double packets = 400.0;

  /// Accepts `fixed:N` (or a bare number), `ebdp`, `alt`, `astar`.
  static BufferSpec parse(const std::string& key, const std::string& text);
  std::string to_string() const;
  bufsizing::BufferSizer make(const bufsizing::EbdpParams& e, const bufsizing::AltParams& a) const;
};

enum class MacMode { Dcf, Edca };

struct ScenarioConfig {
  Config source;

  std::string phy_preset = "54/6";
  mac::PhyParams phy;
  int aggregation_k = 1;
  double ber = 0.0;
  MacMode mac_mode = MacMode::Edca;
  mac::MacClassParams edca_data = mac::kEdcaDataClass;
  mac::MacClassParams edca_ack = mac::kEdcaAckClass;

  int n_downloads = 1;
  int n_uploads = 0;
  double download_start = 0.0;
  double upload_start = 0.0;
  double tcp_beta = 0.5;
  double tcp_awnd = 4096.0;
  bool slow_start = true;

  double wired_rtt = 0.2;
  double wired_bandwidth = 100e6;

  int udp_downloads = 0;
  int udp_uploads = 0;
  std::uint32_t udp_bytes = 64;
  double udp_interval = 1.0;
  bool udp_poisson = true;
  bool udp_saturated = false;

  bool short_enabled = false;
  std::vector<double> short_sizes_kb{5, 20, 30, 100};
  double short_interval = 10.0;

  BufferSpec buffer_ap{BufferMode::Fixed, 400.0};
  BufferSpec buffer_sta{BufferMode::Fixed, 400.0};
  BufferSpec buffer_ack{BufferMode::Fixed, 400.0};
  bufsizing::EbdpParams ebdp;
  bufsizing::AltParams alt;

  double duration = 300.0;
  double warmup = 20.0;
  std::uint64_t seed = 1;
  double sample_interval = 0.1;

  std::vector<double> reference_buffers;
  bool service_hist = false;
  double hist_bin = 1e-4;

  static ScenarioConfig from(const Config& cfg);
};

}  // namespace bufsim::harness
