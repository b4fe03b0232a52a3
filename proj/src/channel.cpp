#include "swarm_edge/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "swarm_edge/errors.hpp"

namespace swarm_edge {

void ChannelConfig::validate() const {
  if (!(noise_sigma >= 0.0)) throw ConfigError("channel.noise_sigma must be non-negative");
  if (!(p_max > 0.0)) throw ConfigError("channel.p_max must be positive");
  if (!(h_threshold >= 0.0)) throw ConfigError("channel.h_threshold must be non-negative");
}

ChannelDraw draw_fading(const ChannelConfig& cfg, int workers, Rng& rng) {
  if (workers < 1) throw ConfigError("draw_fading: workers must be >= 1");
  ChannelDraw draw;
  draw.gains.assign(static_cast<std::size_t>(workers), 1.0);
  if (cfg.fading == Fading::kRayleigh) {
    for (auto& h : draw.gains) {
      const double x = standard_normal(rng);
      const double y = standard_normal(rng);
      h = std::sqrt((x * x + y * y) / 2.0);
    }
  }
  return draw;
}

std::vector<std::size_t> truncate(const ChannelDraw& draw,
                                  std::span<const std::size_t> selected,
                                  double h_threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i : selected) {
    if (draw.gains.at(i) >= h_threshold) out.push_back(i);
  }
  return out;
}

OtaResult ota_aggregate(std::span<const ParamVec> vectors, const ChannelDraw& draw,
                        const ChannelConfig& cfg,
                        std::span<const std::size_t> survivors, Rng& noise_rng,
                        CommLedger& ledger) {
  if (survivors.empty()) throw ConfigError("ota_aggregate: no surviving transmitters");
  if (vectors.size() != survivors.size()) {
    throw ConfigError("ota_aggregate: one vector per survivor required");
  }
  const std::size_t dim = vectors.front().size();
  const double amp = std::sqrt(cfg.p_max);

  std::vector<double> norms(vectors.size());
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].size() != dim) throw ConfigError("ota_aggregate: length mismatch");
    norms[k] = norm2(vectors[k]);
  }

  // Per-survivor pre-scaling b_k.
  std::vector<double> coef(vectors.size(), 0.0);
  double denom = 0.0;
  OtaResult out;
  if (cfg.policy == PowerPolicy::kInversion) {
    double alpha = 1.0;
    for (std::size_t k = 0; k < vectors.size(); ++k) {
      if (norms[k] > 0.0) {
        alpha = std::min(alpha, draw.gains.at(survivors[k]) * amp / norms[k]);
      }
    }
    if (!(alpha > 0.0)) throw NumericError("ota_aggregate: zero inversion scale");
    for (std::size_t k = 0; k < vectors.size(); ++k) {
      coef[k] = alpha / draw.gains.at(survivors[k]);
    }
    denom = alpha * static_cast<double>(vectors.size());
    out.scale = alpha;
  } else {
    for (std::size_t k = 0; k < vectors.size(); ++k) {
      if (norms[k] > 0.0) coef[k] = amp / norms[k];
      denom += draw.gains.at(survivors[k]) * coef[k];
    }
    if (!(denom > 0.0)) throw NumericError("ota_aggregate: zero received gain");
  }

  ParamVec received(dim);
  out.tx_energy.resize(vectors.size());
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    const double h = draw.gains.at(survivors[k]);
    double energy = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double sent = coef[k] * vectors[k][j];
      energy += sent * sent;
      received[j] += h * sent;
    }
    out.tx_energy[k] = energy;
    ledger.transmit_energy += energy;
  }
  if (cfg.noise_sigma > 0.0) {
    for (std::size_t j = 0; j < dim; ++j) {
      received[j] += cfg.noise_sigma * standard_normal(noise_rng);
    }
  }
  for (auto& x : received) x /= denom;
  ledger.vector_channel_uses += 1;
  out.aggregate = std::move(received);
  return out;
}

std::optional<double> censored_report(double current,
                                      std::optional<double> last_reported,
                                      double tau, CommLedger& ledger) {
  if (!(tau >= 0.0)) throw ConfigError("censoring threshold must be non-negative");
  if (tau == 0.0 || !last_reported || std::abs(current - *last_reported) > tau) {
    ledger.scalar_reports += 1;
    return current;
  }
  ledger.censored_reports += 1;
  return std::nullopt;
}

ParamVec digital_unicast(const ParamVec& vector, CommLedger& ledger) {
  ledger.vector_channel_uses += 1;
  return vector;
}

}  // namespace swarm_edge
