#pragma once

#include <string>
#include <string_view>

namespace bufsim::mac {

inline constexpr int kMacHeaderBytes = 28;
inline constexpr int kMacAckBytes = 14;

/// 802.11g timing by default.
struct PhyParams {
  double sifs = 10e-6;
  double slot = 9e-6;
  double data_rate = 54e6;
  double basic_rate = 6e6;
  double plcp_rate = 6e6;
  double plcp_overhead = 20e-6;
  int payload_default = 1000;
  int retry_limit = 11;

  void validate() const;
};

/// Contention parameters of one access category. cw_min/cw_max are window
/// sizes (backoff drawn from [0, cw-1]); aifs is in slots after SIFS.
struct MacClassParams {
  int cw_min = 32;
  int cw_max = 1024;
  int aifs = 2;

  void validate() const;
};

/// EDCA class carrying TCP ACKs.
inline constexpr MacClassParams kEdcaAckClass{4, 8, 2};
/// EDCA class carrying data.
inline constexpr MacClassParams kEdcaDataClass{32, 1024, 6};
/// Single DCF class (DIFS = SIFS + 2 slots).
inline constexpr MacClassParams kDcfClass{32, 1024, 2};

struct ChannelModel {
  double ber = 0.0;
  int aggregation_k = 1;

  void validate() const;
  /// 1 - (1-ber)^(8*frame_bytes), frame_bytes including the MAC header.
  double frame_error_probability(int frame_bytes) const;
};

struct PhyPreset {
  std::string name;
  PhyParams phy;
  int aggregation_k = 1;
};

/// "1/1", "11/1" (long 192 us preamble), "54/6", "216/54" (8-packet aggregation).
PhyPreset phy_preset(std::string_view name);

/// PLCP overhead plus the MAC header and `total_payload_bytes` at the data rate.
double data_duration(int total_payload_bytes, const PhyParams& phy);
/// Data portion of a frame aggregating k_agg packets of payload_bytes each.
double frame_duration(int payload_bytes, int k_agg, const PhyParams& phy);
double ack_duration(const PhyParams& phy);
double aifs_duration(const PhyParams& phy, const MacClassParams& cls);
/// T_data + SIFS + T_ack + DIFS for a single-class exchange.
double success_exchange_duration(int payload_bytes, int k_agg, const PhyParams& phy, const MacClassParams& cls);

}  // namespace bufsim::mac
