#include "swarm_edge/swarm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "swarm_edge/errors.hpp"

namespace swarm_edge {
namespace {

void require_dim(const ParamVec& a, const ParamVec& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::logic_error(std::string("dimension mismatch in ") + what);
  }
}

// Score of a finite candidate; +inf when the loss overflows.
double score_or_inf(const Model& model, const ParamVec& w, const Batch& scoring) {
  try {
    return loss_eval(model, w, scoring);
  } catch (const NumericError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

ParamVec velocity_update(const WorkerState& ws, const ParamVec& w_g, double c0_t,
                         double c1, double c2, std::span<const double> r1,
                         std::span<const double> r2) {
  require_dim(ws.w, ws.v, "velocity_update");
  require_dim(ws.w, ws.w_p, "velocity_update");
  require_dim(ws.w, w_g, "velocity_update");
  if (r1.size() != ws.w.size() || r2.size() != ws.w.size()) {
    throw std::logic_error("velocity_update: draw count mismatch");
  }
  ParamVec out(ws.w.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = c0_t * ws.v[j] + c1 * r1[j] * (ws.w_p[j] - ws.w[j]) +
             c2 * r2[j] * (w_g[j] - ws.w[j]);
  }
  return out;
}

ParamVec velocity_update(const WorkerState& ws, const ParamVec& w_g, double c0_t,
                         const SwarmConfig& cfg, Rng& rng) {
  const std::size_t d = ws.w.size();
  std::vector<double> r(2 * d);
  for (auto& x : r) x = uniform01(rng);
  const std::span<const double> draws(r);
  return velocity_update(ws, w_g, c0_t, cfg.c1, cfg.c2, draws.first(d), draws.last(d));
}

ParamVec position_update(const WorkerState& ws, const ParamVec& v_new,
                         const ParamVec& grad, double eta) {
  require_dim(ws.w, v_new, "position_update");
  require_dim(ws.w, grad, "position_update");
  ParamVec out(ws.w.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = ws.w[j] + v_new[j] - eta * grad[j];
  }
  if (!all_finite(out)) throw NumericError("position update produced a non-finite entry");
  return out;
}

bool personal_best_update(WorkerState& ws, const Model& model, const Batch& scoring) {
  const double loss = loss_eval(model, ws.w, scoring);
  if (loss < ws.score_p) {
    ws.w_p = ws.w;
    ws.score_p = loss;
    return true;
  }
  return false;
}

std::vector<std::size_t> select_workers(std::span<const ScoreReport> reported, int s) {
  std::vector<ScoreReport> order(reported.begin(), reported.end());
  std::sort(order.begin(), order.end(), [](const ScoreReport& a, const ScoreReport& b) {
    return a.score < b.score || (a.score == b.score && a.worker < b.worker);
  });
  const auto keep = std::min(order.size(), static_cast<std::size_t>(std::max(s, 0)));
  std::vector<std::size_t> ids;
  ids.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) ids.push_back(order[k].worker);
  std::sort(ids.begin(), ids.end());
  return ids;
}

SwarmEngine::SwarmEngine(Model model, SwarmConfig cfg, ChannelConfig channel,
                         AttackerConfig attack, AuditPolicy defense, FederatedData data)
    : model_(std::move(model)),
      cfg_(cfg),
      channel_(channel),
      attack_(attack),
      defense_(defense),
      data_(std::move(data)),
      fading_rng_(make_rng(cfg.seed, Stream::kFading)),
      noise_rng_(make_rng(cfg.seed, Stream::kChannelNoise)),
      attack_rng_(make_rng(cfg.seed, Stream::kAdversary, 1)) {
  cfg_.validate();
  channel_.validate();
  attack_.validate();
  defense_.validate();
  const auto k = static_cast<std::size_t>(cfg_.workers);
  if (data_.pools.size() != k) {
    throw ConfigError("expected " + std::to_string(k) + " worker pools, got " +
                      std::to_string(data_.pools.size()));
  }
  if (model_.is_classifier()) {
    for (const auto& pool : data_.pools) {
      if (pool.empty()) throw ConfigError("every worker needs a nonempty local pool");
    }
    if (data_.score.empty()) throw ConfigError("the scoring set is empty");
  }

  kinds_ = assign_attackers(attack_, cfg_.workers);
  last_audit_.assign(k, -1);
  stored_.assign(k, std::nullopt);
  for (std::size_t i = 0; i < k; ++i) {
    coef_rngs_.push_back(make_rng(cfg_.seed, Stream::kWorkerCoef, i));
    batch_rngs_.push_back(make_rng(cfg_.seed, Stream::kWorkerBatch, i));
  }

  Rng init = make_rng(cfg_.seed, Stream::kInit, 0);
  const ParamVec w0 = model_.init_params(init);
  workers_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto& ws = workers_[i];
    ws.w = w0;
    if (cfg_.algo == Algo::kPso && cfg_.pso_init_spread > 0.0) {
      Rng jitter = make_rng(cfg_.seed, Stream::kInit, 1 + i);
      for (auto& x : ws.w) x += cfg_.pso_init_spread * standard_normal(jitter);
    }
    ws.v = ParamVec(model_.dim());
    ws.w_p = ws.w;
    ws.score_p = loss_eval(model_, ws.w_p, scoring_batch(i));
  }
  global_.w_g = w0;
  global_.score_g = loss_eval(model_, w0, data_.score.view());
  global_.best_w = w0;
  global_.best_score = global_.score_g;
  global_.round = 0;
}

void SwarmEngine::set_positions(std::span<const ParamVec> positions) {
  if (global_.round != 0) throw ConfigError("set_positions is only valid before the first round");
  if (positions.size() != workers_.size()) throw ConfigError("one position per worker required");
  for (std::size_t i = 0; i < workers_.size(); ++i) {
    if (positions[i].size() != model_.dim()) throw ConfigError("position has wrong dimension");
    auto& ws = workers_[i];
    ws.w = positions[i];
    ws.w_p = positions[i];
    ws.v = ParamVec(model_.dim());
    ws.score_p = loss_eval(model_, ws.w_p, scoring_batch(i));
  }
}

std::size_t SwarmEngine::blacklist_size() const {
  return static_cast<std::size_t>(std::count_if(
      workers_.begin(), workers_.end(), [](const WorkerState& ws) { return ws.blacklisted; }));
}

const Batch SwarmEngine::scoring_batch(std::size_t worker) const {
  // PSO scores on the worker's own data: it assumes one loss shared by all.
  return cfg_.algo == Algo::kPso ? data_.pools[worker].view() : data_.score.view();
}

Batch SwarmEngine::sample_batch(std::size_t worker, LabeledDataset& scratch) {
  const LabeledDataset& pool = data_.pools[worker];
  const auto b = static_cast<std::size_t>(cfg_.batch_size);
  if (b >= pool.size()) return pool.view();
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng& rng = batch_rngs_[worker];
  for (std::size_t k = 0; k < b; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, idx.size() - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  idx.resize(b);
  scratch = pool.subset(idx);
  return scratch.view();
}

void SwarmEngine::add_grad_noise(std::size_t worker, ParamVec& grad) {
  if (cfg_.grad_noise <= 0.0) return;
  for (auto& g : grad) g += cfg_.grad_noise * standard_normal(batch_rngs_[worker]);
}

RoundMetrics SwarmEngine::step() {
  if (global_.round >= cfg_.rounds) {
    throw ConfigError("all " + std::to_string(cfg_.rounds) + " rounds already executed");
  }
  RoundMetrics m = cfg_.algo == Algo::kFl ? fl_round() : swarm_round();
  ledger_.broadcast_uses += 1;
  return m;
}

RoundMetrics SwarmEngine::swarm_round() {
  const int t = global_.round;
  const bool pso = cfg_.algo == Algo::kPso;
  const double c0 = inertia_at(cfg_, t);
  const double eta = pso ? 0.0 : eta_at(cfg_, t);
  const double tau = censor_tau_at(cfg_, t);
  const ChannelDraw draw = draw_fading(channel_, cfg_.workers, fading_rng_);
  const ParamVec anchor = global_.w_g;

  RoundMetrics m;
  m.round = t;
  m.censor_tau = tau;

  // (1) local hybrid updates
  LabeledDataset scratch;
  for (std::size_t i = 0; i < workers_.size(); ++i) {
    WorkerState& ws = workers_[i];
    if (!ws.active()) continue;
    ParamVec v_new = velocity_update(ws, global_.w_g, c0, cfg_, coef_rngs_[i]);
    ParamVec grad(model_.dim());
    try {
      if (eta > 0.0) {
        const Batch batch = sample_batch(i, scratch);
        grad = tv_loss_grad(model_, ws.w, batch, anchor, cfg_.lambda).grad;
        add_grad_noise(i, grad);
      }
      ws.w = position_update(ws, v_new, grad, eta);
      ws.v = std::move(v_new);
      personal_best_update(ws, model_, scoring_batch(i));
    } catch (const NumericError&) {
      ws.faulted = true;
    }
  }

  // (2) censored score reporting
  std::vector<ScoreReport> reports;
  for (std::size_t i = 0; i < workers_.size(); ++i) {
    WorkerState& ws = workers_[i];
    if (!ws.active()) continue;
    const bool honest = kinds_[i] == AttackKind::kNone;
    const double value = honest ? ws.score_p : forge_score(kinds_[i], ws.score_p);
    if (auto sent = censored_report(value, ws.last_reported, tau, ledger_)) {
      ws.last_reported = sent;
      stored_[i] = sent;
    } else {
      ++m.censored;
      if (honest) {
        m.max_censor_error = std::max(m.max_censor_error, std::abs(*stored_[i] - ws.score_p));
      }
    }
    if (stored_[i]) reports.push_back({i, *stored_[i]});
  }
  m.eligible = reports.size();

  // (3) selection, (4) over-the-air aggregation
  std::optional<ParamVec> candidate;
  std::vector<std::size_t> survivors;
  if (!reports.empty()) {
    const int s = pso ? 1 : s_at(cfg_, t, static_cast<int>(reports.size()));
    m.selected_ids = select_workers(reports, s);
    m.selected = m.selected_ids.size();
    survivors = truncate(draw, m.selected_ids, channel_.h_threshold);
    m.survivors = survivors.size();
    if (!survivors.empty()) {
      std::vector<ParamVec> sent;
      sent.reserve(survivors.size());
      for (std::size_t i : survivors) {
        const ParamVec& wp = workers_[i].w_p;
        sent.push_back(kinds_[i] == AttackKind::kNone
                           ? wp
                           : corrupt_vector(attack_, kinds_[i], wp, attack_rng_));
      }
      ChannelConfig link = channel_;
      const bool bev = channel_.policy == PowerPolicy::kBev &&
                       attack_.kind != AttackKind::kNone && attack_.fraction > 0.0;
      link.policy = bev ? PowerPolicy::kBev : PowerPolicy::kInversion;
      candidate = ota_aggregate(sent, draw, link, survivors, noise_rng_, ledger_).aggregate;
      m.aggregated = true;
    } else {
      ++skipped_;
      ledger_.vector_channel_uses += 1;  // the reserved block goes unused
    }
  } else {
    ledger_.vector_channel_uses += 1;
  }

  // (5) screening: one round-robin audit of a selected worker per period
  if (defended() && defense_.audit && t % defense_.period == 0 && !m.selected_ids.empty()) {
    std::size_t target = m.selected_ids.front();
    for (std::size_t i : m.selected_ids) {
      if (last_audit_[i] < last_audit_[target]) target = i;
    }
    WorkerState& ws = workers_[target];
    const AttackKind kind = kinds_[target];
    const double claimed = kind == AttackKind::kNone ? ws.score_p : forge_score(kind, ws.score_p);
    ledger_.scalar_reports += 1;
    const ParamVec transmitted = kind == AttackKind::kNone
                                     ? ws.w_p
                                     : corrupt_vector(attack_, kind, ws.w_p, attack_rng_);
    last_audit_[target] = t;
    m.audited.push_back(target);
    if (audit_worker(claimed, transmitted, model_, data_.score.view(),
                     defense_.epsilon_audit, ledger_) == AuditVerdict::kBlacklist) {
      ws.blacklisted = true;
      m.newly_blacklisted.push_back(target);
      // The aggregate already carries this worker's contribution.
      if (std::find(survivors.begin(), survivors.end(), target) != survivors.end()) {
        candidate.reset();
      }
    }
  }

  // (6) global update
  if (candidate) {
    if (defended() && defense_.rollback) {
      RollbackOutcome out = rollback_check(*candidate, global_, model_, data_.score.view(),
                                           defense_.rollback_delta);
      m.accepted = out.accepted;
      global_ = std::move(out.state);
    } else if (all_finite(*candidate)) {
      const double score = score_or_inf(model_, *candidate, data_.score.view());
      global_ = accept_candidate(std::move(*candidate), score, global_);
      m.accepted = true;
    }
  }
  if (m.aggregated && !m.accepted) ++rejected_;
  global_.round = t + 1;
  return m;
}

RoundMetrics SwarmEngine::fl_round() {
  const int t = global_.round;
  const double eta = eta_at(cfg_, t);
  // Drawn and discarded so every algorithm consumes the same fading sequence.
  (void)draw_fading(channel_, cfg_.workers, fading_rng_);

  RoundMetrics m;
  m.round = t;
  LabeledDataset scratch;
  std::vector<ParamVec> uploads;
  for (std::size_t i = 0; i < workers_.size(); ++i) {
    WorkerState& ws = workers_[i];
    if (!ws.active()) continue;
    ParamVec w = global_.w_g;
    try {
      for (int s = 0; s < cfg_.local_steps; ++s) {
        const Batch batch = sample_batch(i, scratch);
        ParamVec grad = grad_eval(model_, w, batch);
        add_grad_noise(i, grad);
        axpy(-eta, grad, w);
      }
      if (!all_finite(w)) throw NumericError("local SGD diverged");
    } catch (const NumericError&) {
      ws.faulted = true;
      continue;
    }
    ws.w = w;
    const ParamVec sent = kinds_[i] == AttackKind::kNone
                              ? std::move(w)
                              : corrupt_vector(attack_, kinds_[i], w, attack_rng_);
    uploads.push_back(digital_unicast(sent, ledger_));
    m.selected_ids.push_back(i);
  }
  m.eligible = m.selected = m.survivors = uploads.size();
  if (!uploads.empty()) {
    ParamVec mean = mean_of(uploads);
    m.aggregated = true;
    if (all_finite(mean)) {
      const double score = score_or_inf(model_, mean, data_.score.view());
      global_ = accept_candidate(std::move(mean), score, global_);
      m.accepted = true;
    } else {
      ++rejected_;
    }
  }
  global_.round = t + 1;
  return m;
}

}  // namespace swarm_edge
