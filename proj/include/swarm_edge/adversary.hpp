#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "swarm_edge/channel.hpp"
#include "swarm_edge/model.hpp"
#include "swarm_edge/swarm_types.hpp"

namespace swarm_edge {

enum class AttackKind {
  kNone,
  kSignFlip,       // sends -kappa * honest, claims score 0
  kGaussianNoise,  // sends N(0, sigma_a^2) noise, reports honestly
  kScoreCheat,     // sends the honest vector, claims score 0
  kMixed,          // config-level only: attackers alternate ScoreCheat / SignFlip
};

std::string_view to_string(AttackKind kind);
AttackKind parse_attack(std::string_view name);

struct AttackerConfig {
  AttackKind kind = AttackKind::kNone;
  double fraction = 0.1;
  double kappa = 1.0;
  double sigma_a = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const AttackerConfig&) const = default;
};

struct AuditPolicy {
  bool audit = true;
  int period = 5;
  double epsilon_audit = 1e-6;
  bool rollback = true;
  double rollback_delta = 0.05;

  void validate() const;
  bool operator==(const AuditPolicy&) const = default;
};

// Per-worker behavior, kNone for honest workers. floor(fraction * workers)
// attackers are drawn once by seeded sampling and never change.
std::vector<AttackKind> assign_attackers(const AttackerConfig& cfg, int workers);

ParamVec corrupt_vector(const AttackerConfig& cfg, AttackKind kind,
                        const ParamVec& honest, Rng& rng);
double forge_score(AttackKind kind, double true_score);

enum class AuditVerdict { kPass, kBlacklist };

// `transmitted` is what the worker actually sent over the audit unicast.
AuditVerdict audit_worker(double claimed, const ParamVec& transmitted,
                          const Model& model, const Batch& score_part,
                          double epsilon_audit, CommLedger& ledger);

struct RollbackOutcome {
  GlobalState state;
  bool accepted = false;
  double candidate_score = 0.0;
};

// Rejects the candidate when its score exceeds the current one by more than
// rollback_delta; accepted candidates refresh score_g and best_ever.
RollbackOutcome rollback_check(const ParamVec& candidate, const GlobalState& prev,
                               const Model& model, const Batch& score_part,
                               double rollback_delta);

// Unconditional acceptance with the same bookkeeping as rollback_check.
GlobalState accept_candidate(ParamVec candidate, double candidate_score,
                             const GlobalState& prev);

}  // namespace swarm_edge
