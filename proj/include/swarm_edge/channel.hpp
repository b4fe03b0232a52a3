#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "swarm_edge/param_vec.hpp"
#include "swarm_edge/rng.hpp"

namespace swarm_edge {

enum class Fading { kNone, kRayleigh };
enum class PowerPolicy { kInversion, kBev };

// Real-valued equivalent baseband uplink: phases are assumed pre-compensated,
// so each worker sees a non-negative amplitude gain h_i.
struct ChannelConfig {
  double noise_sigma = 1e-3;  // per-coordinate AWGN std at the receiver
  double p_max = 100.0;       // energy budget per vector transmission
  double h_threshold = 0.1;   // truncation cutoff
  Fading fading = Fading::kRayleigh;
  PowerPolicy policy = PowerPolicy::kInversion;

  void validate() const;
  bool operator==(const ChannelConfig&) const = default;
};

struct ChannelDraw {
  std::vector<double> gains;
};

struct CommLedger {
  std::uint64_t scalar_reports = 0;
  std::uint64_t censored_reports = 0;
  std::uint64_t vector_channel_uses = 0;  // includes audit_uses
  std::uint64_t audit_uses = 0;
  std::uint64_t broadcast_uses = 0;
  double transmit_energy = 0.0;
};

struct OtaResult {
  ParamVec aggregate;
  std::vector<double> tx_energy;  // per survivor, same order as survivors
  double scale = 0.0;             // common inversion factor (Inversion only)
};

ChannelDraw draw_fading(const ChannelConfig& cfg, int workers, Rng& rng);

// Selected workers whose gain reaches the threshold, in input order.
std::vector<std::size_t> truncate(const ChannelDraw& draw,
                                  std::span<const std::size_t> selected,
                                  double h_threshold);

// Analog superposition of vectors[k] sent by worker survivors[k].
//
// Inversion: every survivor pre-scales by alpha / h_i, with alpha the largest
// common factor that keeps each transmission within p_max (capped at 1), so
// the received sum is alpha * sum_k x_k + noise; the server divides by
// alpha * |survivors|.
//
// BEV: every survivor transmits at full power, b_i = sqrt(p_max) / ||x_i||,
// and the server normalizes by sum_i h_i b_i.
//
// Zero vectors are sent as zeros. Throws ConfigError on empty survivors.
OtaResult ota_aggregate(std::span<const ParamVec> vectors, const ChannelDraw& draw,
                        const ChannelConfig& cfg,
                        std::span<const std::size_t> survivors, Rng& noise_rng,
                        CommLedger& ledger);

// Returns the value to send, or nullopt when the change since the last report
// does not exceed tau. A threshold of 0 disables censoring.
std::optional<double> censored_report(double current,
                                      std::optional<double> last_reported,
                                      double tau, CommLedger& ledger);

// Error-free orthogonal link.
ParamVec digital_unicast(const ParamVec& vector, CommLedger& ledger);

}  // namespace swarm_edge
