#include "swarm_edge/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "swarm_edge/errors.hpp"

namespace swarm_edge {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone: return "none";
    case AttackKind::kSignFlip: return "signflip";
    case AttackKind::kGaussianNoise: return "gauss";
    case AttackKind::kScoreCheat: return "scorecheat";
    case AttackKind::kMixed: return "mixed";
  }
  return "?";
}

AttackKind parse_attack(std::string_view name) {
  if (name == "none") return AttackKind::kNone;
  if (name == "signflip") return AttackKind::kSignFlip;
  if (name == "gauss") return AttackKind::kGaussianNoise;
  if (name == "scorecheat") return AttackKind::kScoreCheat;
  if (name == "mixed") return AttackKind::kMixed;
  throw ConfigError("unknown attack kind '" + std::string(name) + "'");
}

void AttackerConfig::validate() const {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("attack.fraction must lie in [0, 1)");
  if (!(kappa > 0.0)) throw ConfigError("attack.kappa must be positive");
  if (!(sigma_a > 0.0)) throw ConfigError("attack.sigma_a must be positive");
}

void AuditPolicy::validate() const {
  if (period < 1) throw ConfigError("defense.period must be >= 1");
  if (!(epsilon_audit > 0.0)) throw ConfigError("defense.epsilon_audit must be positive");
  if (!(rollback_delta >= 0.0)) throw ConfigError("defense.rollback_delta must be non-negative");
}

std::vector<AttackKind> assign_attackers(const AttackerConfig& cfg, int workers) {
  std::vector<AttackKind> kinds(static_cast<std::size_t>(workers), AttackKind::kNone);
  if (cfg.kind == AttackKind::kNone) return kinds;
  const auto count = static_cast<std::size_t>(std::floor(cfg.fraction * workers));
  std::vector<std::size_t> ids(kinds.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  Rng rng = make_rng(cfg.seed, Stream::kAdversary);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    AttackKind kind = cfg.kind;
    if (kind == AttackKind::kMixed) {
      kind = k % 2 == 0 ? AttackKind::kScoreCheat : AttackKind::kSignFlip;
    }
    kinds[ids[k]] = kind;
  }
  return kinds;
}

ParamVec corrupt_vector(const AttackerConfig& cfg, AttackKind kind,
                        const ParamVec& honest, Rng& rng) {
  switch (kind) {
    case AttackKind::kSignFlip: {
      ParamVec out(honest.size());
      for (std::size_t j = 0; j < honest.size(); ++j) out[j] = -cfg.kappa * honest[j];
      return out;
    }
    case AttackKind::kGaussianNoise: {
      ParamVec out(honest.size());
      for (auto& x : out) x = cfg.sigma_a * standard_normal(rng);
      return out;
    }
    case AttackKind::kNone:
    case AttackKind::kScoreCheat:
      return honest;
    case AttackKind::kMixed:
      break;
  }
  throw ConfigError("mixed is not a per-worker attack kind");
}

double forge_score(AttackKind kind, double true_score) {
  switch (kind) {
    case AttackKind::kScoreCheat:
    case AttackKind::kSignFlip:
      return 0.0;
    default:
      return true_score;
  }
}

AuditVerdict audit_worker(double claimed, const ParamVec& transmitted,
                          const Model& model, const Batch& score_part,
                          double epsilon_audit, CommLedger& ledger) {
  const ParamVec received = digital_unicast(transmitted, ledger);
  ledger.audit_uses += 1;
  double recomputed = 0.0;
  try {
    recomputed = loss_eval(model, received, score_part);
  } catch (const NumericError&) {
    return AuditVerdict::kBlacklist;
  }
  return std::abs(claimed - recomputed) > epsilon_audit ? AuditVerdict::kBlacklist
                                                        : AuditVerdict::kPass;
}

GlobalState accept_candidate(ParamVec candidate, double candidate_score,
                             const GlobalState& prev) {
  GlobalState next = prev;
  next.w_g = std::move(candidate);
  next.score_g = candidate_score;
  if (candidate_score < next.best_score) {
    next.best_score = candidate_score;
    next.best_w = next.w_g;
  }
  return next;
}

RollbackOutcome rollback_check(const ParamVec& candidate, const GlobalState& prev,
                               const Model& model, const Batch& score_part,
                               double rollback_delta) {
  RollbackOutcome out;
  double score = std::numeric_limits<double>::infinity();
  if (all_finite(candidate)) {
    try {
      score = loss_eval(model, candidate, score_part);
    } catch (const NumericError&) {
    }
  }
  out.candidate_score = score;
  if (score > prev.score_g + rollback_delta || !std::isfinite(score)) {
    out.state = prev;
    return out;
  }
  out.accepted = true;
  out.state = accept_candidate(candidate, score, prev);
  return out;
}

}  // namespace swarm_edge
