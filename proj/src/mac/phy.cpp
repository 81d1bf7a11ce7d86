#include "bufsim/mac/phy.hpp"

#include <cmath>
#include <stdexcept>

namespace bufsim::mac {

void PhyParams::validate() const {
  if (!(sifs > 0 && slot > 0 && data_rate > 0 && basic_rate > 0 && plcp_rate > 0 && plcp_overhead > 0)) {
    throw std::invalid_argument("PHY timing parameters must be positive");
  }
  if (payload_default <= 0) throw std::invalid_argument("payload size must be positive");
  if (retry_limit < 1) throw std::invalid_argument("retry limit must be at least 1");
}

void MacClassParams::validate() const {
  if (!(cw_min >= 1 && cw_min <= cw_max)) throw std::invalid_argument("require 1 <= cw_min <= cw_max");
  if (aifs < 0) throw std::invalid_argument("aifs must be non-negative");
}

void ChannelModel::validate() const {
  if (!(ber >= 0 && ber < 1)) throw std::invalid_argument("ber must lie in [0,1)");
  if (aggregation_k < 1) throw std::invalid_argument("aggregation must be at least 1");
}

double ChannelModel::frame_error_probability(int frame_bytes) const {
  if (ber == 0.0) return 0.0;
  return -std::expm1(8.0 * frame_bytes * std::log1p(-ber));
}

PhyPreset phy_preset(std::string_view name) {
  PhyPreset p;
  p.name = std::string(name);
  if (name == "1/1" || name == "11/1") {
    p.phy.data_rate = name == "1/1" ? 1e6 : 11e6;
    p.phy.basic_rate = 1e6;
    p.phy.plcp_rate = 1e6;
    p.phy.plcp_overhead = 192e-6;
  } else if (name == "54/6") {
    // defaults
  } else if (name == "216/54") {
    p.phy.data_rate = 216e6;
    p.phy.basic_rate = 54e6;
    p.aggregation_k = 8;
  } else {
    throw std::invalid_argument("unknown PHY preset '" + std::string(name) + "' (expected 1/1, 11/1, 54/6 or 216/54)");
  }
  return p;
}

double data_duration(int total_payload_bytes, const PhyParams& phy) {
  return phy.plcp_overhead + 8.0 * (kMacHeaderBytes + total_payload_bytes) / phy.data_rate;
}

double frame_duration(int payload_bytes, int k_agg, const PhyParams& phy) {
  if (payload_bytes <= 0 || k_agg < 1) throw std::invalid_argument("frame_duration: need payload > 0 and k >= 1");
  return data_duration(k_agg * payload_bytes, phy);
}

double ack_duration(const PhyParams& phy) { return phy.plcp_overhead + 8.0 * kMacAckBytes / phy.basic_rate; }

double aifs_duration(const PhyParams& phy, const MacClassParams& cls) { return phy.sifs + cls.aifs * phy.slot; }

double success_exchange_duration(int payload_bytes, int k_agg, const PhyParams& phy, const MacClassParams& cls) {
  return frame_duration(payload_bytes, k_agg, phy) + phy.sifs + ack_duration(phy) + aifs_duration(phy, cls);
}

}  // namespace bufsim::mac
