#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "swarm_edge/param_vec.hpp"

namespace swarm_edge {

enum class Algo { kDsl, kFl, kPso };

std::string_view to_string(Algo algo);
Algo parse_algo(std::string_view name);

// Schedules and coefficients for one run. Inertia decays linearly from
// c0_max to c0_min, the selection size grows linearly from s_min to s_max
// and the censoring threshold decays geometrically.
struct SwarmConfig {
  Algo algo = Algo::kDsl;
  int workers = 50;
  int rounds = 200;
  double c0_max = 0.9;
  double c0_min = 0.4;
  double c1 = 1.0;
  double c2 = 1.0;
  double eta = 0.05;
  // eta_t = eta / (1 + eta_decay * t); 0 keeps the step constant.
  double eta_decay = 0.0;
  double lambda = 0.01;
  int s_min = 1;
  int s_max = 10;
  int batch_size = 32;
  int local_steps = 1;
  double censor_tau0 = 0.05;
  double censor_rho = 0.95;
  // Std of additive Gaussian noise on every local gradient (stochastic
  // first-order oracle for data-free objectives).
  double grad_noise = 0.0;
  // PSO baseline only: std of the per-worker perturbation of w0.
  double pso_init_spread = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const SwarmConfig&) const = default;
};

// ceil(0.2 * workers), at least 1.
int default_s_max(int workers);

struct GlobalState {
  ParamVec w_g;
  double score_g = 0.0;
  ParamVec best_w;
  double best_score = 0.0;
  int round = 0;
};

double inertia_at(const SwarmConfig& cfg, int t);
int s_at(const SwarmConfig& cfg, int t, int eligible);
double eta_at(const SwarmConfig& cfg, int t);
double censor_tau_at(const SwarmConfig& cfg, int t);

}  // namespace swarm_edge
