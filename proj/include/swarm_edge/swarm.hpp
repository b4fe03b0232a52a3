#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "swarm_edge/adversary.hpp"
#include "swarm_edge/channel.hpp"
#include "swarm_edge/dataset.hpp"
#include "swarm_edge/model.hpp"
#include "swarm_edge/swarm_types.hpp"

namespace swarm_edge {

struct WorkerState {
  ParamVec w;
  ParamVec v;
  ParamVec w_p;
  double score_p = 0.0;
  std::optional<double> last_reported;
  bool blacklisted = false;
  bool faulted = false;  // produced a non-finite iterate; excluded from then on

  bool active() const { return !blacklisted && !faulted; }
};

struct ScoreReport {
  std::size_t worker = 0;
  double score = 0.0;
};

// c0 * v + c1 * r1 .* (w_p - w) + c2 * r2 .* (w_g - w), with fresh uniform
// draws: all of r1 first, then all of r2.
ParamVec velocity_update(const WorkerState& ws, const ParamVec& w_g, double c0_t,
                         const SwarmConfig& cfg, Rng& rng);
// Same update with caller-supplied draws.
ParamVec velocity_update(const WorkerState& ws, const ParamVec& w_g, double c0_t,
                         double c1, double c2, std::span<const double> r1,
                         std::span<const double> r2);

// w + v_new - eta * grad. Throws NumericError on a non-finite result.
ParamVec position_update(const WorkerState& ws, const ParamVec& v_new,
                         const ParamVec& grad, double eta);

// Adopts w as the personal best when it scores strictly lower on `scoring`.
// Returns true when the personal best changed.
bool personal_best_update(WorkerState& ws, const Model& model, const Batch& scoring);

// The s lowest scores, ties to the lower worker id, returned in ascending
// worker-id order.
std::vector<std::size_t> select_workers(std::span<const ScoreReport> reported, int s);

// Worker-local training pools plus the shared scoring set.
struct FederatedData {
  std::vector<LabeledDataset> pools;
  LabeledDataset score;
};

struct RoundMetrics {
  int round = 0;  // index of the round just executed
  std::size_t eligible = 0;
  std::size_t selected = 0;
  std::size_t survivors = 0;
  std::size_t censored = 0;
  // Largest |stored score - current true score| over censored honest workers.
  double max_censor_error = 0.0;
  double censor_tau = 0.0;
  bool aggregated = false;  // false when truncation left no survivors
  bool accepted = false;    // candidate adopted as the new w_g
  std::vector<std::size_t> selected_ids;
  std::vector<std::size_t> audited;
  std::vector<std::size_t> newly_blacklisted;
};

// One repetition of DSL, FL or PSO over the simulated uplink. Owns all
// worker and server state plus every random stream; a fixed seed yields a
// bit-identical trajectory.
//
// Stream layout (all derived from cfg.seed): w0 from (kInit, 0), PSO
// perturbations from (kInit, 1 + i), worker i's r1/r2 draws from
// (kWorkerCoef, i), its minibatches and gradient noise from
// (kWorkerBatch, i), fading from kFading and receiver noise from
// kChannelNoise. Attackers are placed by AttackerConfig::seed.
class SwarmEngine {
 public:
  SwarmEngine(Model model, SwarmConfig cfg, ChannelConfig channel,
              AttackerConfig attack, AuditPolicy defense, FederatedData data);

  // Executes round `round()` and advances. Requires round() < cfg.rounds.
  RoundMetrics step();

  const Model& model() const { return model_; }
  const SwarmConfig& config() const { return cfg_; }
  const FederatedData& data() const { return data_; }
  int round() const { return global_.round; }
  const GlobalState& global() const { return global_; }
  std::span<const WorkerState> workers() const { return workers_; }
  const CommLedger& ledger() const { return ledger_; }
  // Last score the server holds for each worker.
  std::span<const std::optional<double>> stored_scores() const { return stored_; }
  std::span<const AttackKind> attack_kinds() const { return kinds_; }
  std::size_t blacklist_size() const;
  std::size_t rejected_rounds() const { return rejected_; }
  std::size_t skipped_rounds() const { return skipped_; }

  // Replaces every worker's position (and personal best) before the first
  // round; velocities stay zero.
  void set_positions(std::span<const ParamVec> positions);

 private:
  RoundMetrics swarm_round();
  RoundMetrics fl_round();
  Batch sample_batch(std::size_t worker, LabeledDataset& scratch);
  const Batch scoring_batch(std::size_t worker) const;
  void add_grad_noise(std::size_t worker, ParamVec& grad);
  bool defended() const { return cfg_.algo == Algo::kDsl; }

  Model model_;
  SwarmConfig cfg_;
  ChannelConfig channel_;
  AttackerConfig attack_;
  AuditPolicy defense_;
  FederatedData data_;

  std::vector<WorkerState> workers_;
  std::vector<std::optional<double>> stored_;
  std::vector<AttackKind> kinds_;
  std::vector<int> last_audit_;
  GlobalState global_;
  CommLedger ledger_;

  std::vector<Rng> coef_rngs_;
  std::vector<Rng> batch_rngs_;
  Rng fading_rng_;
  Rng noise_rng_;
  Rng attack_rng_;

  std::size_t rejected_ = 0;
  std::size_t skipped_ = 0;
};

}  // namespace swarm_edge
