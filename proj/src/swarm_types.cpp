#include "swarm_edge/swarm_types.hpp"

#include <algorithm>
#include <cmath>

#include "swarm_edge/errors.hpp"

namespace swarm_edge {

std::string_view to_string(Algo algo) {
  switch (algo) {
    case Algo::kDsl: return "dsl";
    case Algo::kFl: return "fl";
    case Algo::kPso: return "pso";
  }
  return "?";
}

Algo parse_algo(std::string_view name) {
  if (name == "dsl") return Algo::kDsl;
  if (name == "fl") return Algo::kFl;
  if (name == "pso") return Algo::kPso;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

int default_s_max(int workers) {
  return std::max(1, static_cast<int>(std::ceil(0.2 * workers)));
}

void SwarmConfig::validate() const {
  if (workers < 1) throw ConfigError("swarm.workers must be >= 1");
  if (rounds < 0) throw ConfigError("swarm.rounds must be >= 0");
  if (!(s_min >= 1 && s_min <= s_max && s_max <= workers)) {
    throw ConfigError("swarm.s_min and swarm.s_max must satisfy 1 <= s_min <= s_max <= workers (s_min=" +
                      std::to_string(s_min) + ", s_max=" + std::to_string(s_max) + ")");
  }
  if (!(c0_min >= 0.0 && c0_min <= c0_max && c0_max < 1.0)) {
    throw ConfigError("swarm.c0_min and swarm.c0_max must satisfy 0 <= c0_min <= c0_max < 1");
  }
  if (!(c1 >= 0.0)) throw ConfigError("swarm.c1 must be non-negative");
  if (!(c2 >= 0.0)) throw ConfigError("swarm.c2 must be non-negative");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("swarm.eta must be non-negative");
  if (!(eta_decay >= 0.0)) throw ConfigError("swarm.eta_decay must be non-negative");
  if (!(lambda >= 0.0)) throw ConfigError("swarm.lambda must be non-negative");
  if (batch_size < 1) throw ConfigError("swarm.batch_size must be >= 1");
  if (local_steps < 1) throw ConfigError("swarm.local_steps must be >= 1");
  if (!(censor_tau0 >= 0.0)) throw ConfigError("swarm.censor_tau0 must be non-negative");
  if (!(censor_rho > 0.0 && censor_rho <= 1.0)) {
    throw ConfigError("swarm.censor_rho must lie in (0, 1]");
  }
  if (!(grad_noise >= 0.0)) throw ConfigError("swarm.grad_noise must be non-negative");
  if (!(pso_init_spread >= 0.0)) throw ConfigError("swarm.pso_init_spread must be non-negative");
}

double inertia_at(const SwarmConfig& cfg, int t) {
  if (cfg.rounds == 0) return cfg.c0_max;
  return cfg.c0_max - (cfg.c0_max - cfg.c0_min) * static_cast<double>(t) /
                          static_cast<double>(cfg.rounds);
}

int s_at(const SwarmConfig& cfg, int t, int eligible) {
  int s = cfg.s_min;
  if (cfg.rounds > 0) {
    s += static_cast<int>(std::floor(static_cast<double>(cfg.s_max - cfg.s_min) *
                                     static_cast<double>(t) /
                                     static_cast<double>(cfg.rounds)));
  }
  return std::max(1, std::min(eligible, s));
}

double eta_at(const SwarmConfig& cfg, int t) {
  return cfg.eta / (1.0 + cfg.eta_decay * static_cast<double>(t));
}

double censor_tau_at(const SwarmConfig& cfg, int t) {
  return cfg.censor_tau0 * std::pow(cfg.censor_rho, static_cast<double>(t));
}

}  // namespace swarm_edge
