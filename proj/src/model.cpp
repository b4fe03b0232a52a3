#include "swarm_edge/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swarm_edge/errors.hpp"

namespace swarm_edge {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t dim_of(const Model::Kind& kind) {
  return std::visit(
      Overloaded{
          [](const SoftmaxLinear& m) {
            return static_cast<std::size_t>(m.classes) * (m.features + 1);
          },
          [](const Mlp1& m) {
            return static_cast<std::size_t>(m.hidden) * (m.features + 1) +
                   static_cast<std::size_t>(m.classes) * (m.hidden + 1);
          },
          [](const Quadratic& m) { return m.target.size(); },
      },
      kind);
}

void check_inputs(const Model& model, const ParamVec& params, const Batch& batch) {
  if (params.size() != model.dim()) {
    throw ConfigError("parameter count " + std::to_string(params.size()) +
                      " does not match model dimension " +
                      std::to_string(model.dim()));
  }
  if (!model.is_classifier()) return;
  if (batch.rows() == 0) throw ConfigError("empty batch");
  if (batch.cols != static_cast<std::size_t>(model.features())) {
    throw ConfigError("batch has " + std::to_string(batch.cols) +
                      " features, model expects " +
                      std::to_string(model.features()));
  }
  if (batch.features.size() != batch.rows() * batch.cols) {
    throw ConfigError("batch feature storage does not match its shape");
  }
  for (int y : batch.labels) {
    if (y < 0 || y >= model.classes()) {
      throw ConfigError("label " + std::to_string(y) + " outside [0, " +
                        std::to_string(model.classes()) + ")");
    }
  }
}

double require_finite(double value) {
  if (!std::isfinite(value)) throw NumericError("non-finite loss value");
  return value;
}

// Returns -log softmax(logits)[label] and overwrites logits with the
// probabilities.
double softmax_xent_stable(std::span<double> logits, int label) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  const double loss = std::log(z) + mx - logits[label];
  for (double& l : logits) l = std::exp(l - mx) / z;
  return loss;
}

LossGrad softmax_linear_lg(const SoftmaxLinear& m, const ParamVec& w,
                           const Batch& batch, bool want_grad) {
  const std::size_t n = m.features;
  const std::size_t c = m.classes;
  const std::size_t bias = c * n;
  LossGrad out;
  if (want_grad) out.grad = ParamVec(w.size());
  std::vector<double> logits(c);
  for (std::size_t s = 0; s < batch.rows(); ++s) {
    const auto x = batch.row(s);
    for (std::size_t k = 0; k < c; ++k) {
      double acc = w[bias + k];
      const double* wk = w.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) acc += wk[j] * x[j];
      logits[k] = acc;
    }
    const int y = batch.labels[s];
    out.loss += softmax_xent_stable(logits, y);
    if (!want_grad) continue;
    for (std::size_t k = 0; k < c; ++k) {
      const double delta = logits[k] - (static_cast<int>(k) == y ? 1.0 : 0.0);
      double* gk = out.grad.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) gk[j] += delta * x[j];
      out.grad[bias + k] += delta;
    }
  }
  const double inv_m = 1.0 / static_cast<double>(batch.rows());
  out.loss *= inv_m;
  if (want_grad) {
    for (double& g : out.grad) g *= inv_m;
  }
  return out;
}

LossGrad mlp1_lg(const Mlp1& m, const ParamVec& w, const Batch& batch,
                 bool want_grad) {
  const std::size_t n = m.features;
  const std::size_t h = m.hidden;
  const std::size_t c = m.classes;
  const std::size_t off_b1 = h * n;
  const std::size_t off_w2 = off_b1 + h;
  const std::size_t off_b2 = off_w2 + c * h;

  LossGrad out;
  if (want_grad) out.grad = ParamVec(w.size());
  std::vector<double> act(h);
  std::vector<double> logits(c);
  std::vector<double> dact(h);
  for (std::size_t s = 0; s < batch.rows(); ++s) {
    const auto x = batch.row(s);
    for (std::size_t u = 0; u < h; ++u) {
      double acc = w[off_b1 + u];
      const double* wu = w.data() + u * n;
      for (std::size_t j = 0; j < n; ++j) acc += wu[j] * x[j];
      act[u] = std::tanh(acc);
    }
    for (std::size_t k = 0; k < c; ++k) {
      double acc = w[off_b2 + k];
      const double* wk = w.data() + off_w2 + k * h;
      for (std::size_t u = 0; u < h; ++u) acc += wk[u] * act[u];
      logits[k] = acc;
    }
    const int y = batch.labels[s];
    out.loss += softmax_xent_stable(logits, y);
    if (!want_grad) continue;

    std::fill(dact.begin(), dact.end(), 0.0);
    for (std::size_t k = 0; k < c; ++k) {
      const double delta = logits[k] - (static_cast<int>(k) == y ? 1.0 : 0.0);
      double* gk = out.grad.data() + off_w2 + k * h;
      const double* wk = w.data() + off_w2 + k * h;
      for (std::size_t u = 0; u < h; ++u) {
        gk[u] += delta * act[u];
        dact[u] += delta * wk[u];
      }
      out.grad[off_b2 + k] += delta;
    }
    for (std::size_t u = 0; u < h; ++u) {
      const double dz = dact[u] * (1.0 - act[u] * act[u]);
      double* gu = out.grad.data() + u * n;
      for (std::size_t j = 0; j < n; ++j) gu[j] += dz * x[j];
      out.grad[off_b1 + u] += dz;
    }
  }
  const double inv_m = 1.0 / static_cast<double>(batch.rows());
  out.loss *= inv_m;
  if (want_grad) {
    for (double& g : out.grad) g *= inv_m;
  }
  return out;
}

LossGrad quadratic_lg(const Quadratic& q, const ParamVec& w, bool want_grad) {
  LossGrad out;
  if (want_grad) out.grad = ParamVec(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double e = w[j] - q.target[j];
    out.loss += 0.5 * q.curvature[j] * e * e;
    if (want_grad) out.grad[j] = q.curvature[j] * e;
  }
  return out;
}

LossGrad evaluate(const Model& model, const ParamVec& params, const Batch& batch,
                  bool want_grad) {
  check_inputs(model, params, batch);
  LossGrad out = std::visit(
      Overloaded{
          [&](const SoftmaxLinear& m) {
            return softmax_linear_lg(m, params, batch, want_grad);
          },
          [&](const Mlp1& m) { return mlp1_lg(m, params, batch, want_grad); },
          [&](const Quadratic& q) { return quadratic_lg(q, params, want_grad); },
      },
      model.kind());
  require_finite(out.loss);
  if (want_grad && !all_finite(out.grad)) {
    throw NumericError("non-finite gradient entry");
  }
  return out;
}

}  // namespace

Model::Model(Kind kind) : kind_(std::move(kind)), dim_(dim_of(kind_)) {}

Model Model::softmax_linear(int classes, int features) {
  if (classes < 2 || features < 1) {
    throw ConfigError("softmax model needs classes >= 2 and features >= 1");
  }
  return Model(SoftmaxLinear{classes, features});
}

Model Model::mlp1(int features, int hidden, int classes) {
  if (classes < 2 || features < 1 || hidden < 1) {
    throw ConfigError("mlp model needs classes >= 2, features >= 1, hidden >= 1");
  }
  return Model(Mlp1{features, hidden, classes});
}

Model Model::quadratic(ParamVec target, std::vector<double> curvature) {
  if (target.empty() || target.size() != curvature.size()) {
    throw ConfigError("quadratic target and curvature must be nonempty and equal length");
  }
  for (double c : curvature) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw ConfigError("quadratic curvature entries must be strictly positive");
    }
  }
  return Model(Quadratic{std::move(target), std::move(curvature)});
}

int Model::classes() const {
  return std::visit(Overloaded{
                        [](const SoftmaxLinear& m) { return m.classes; },
                        [](const Mlp1& m) { return m.classes; },
                        [](const Quadratic&) { return 0; },
                    },
                    kind_);
}

int Model::features() const {
  return std::visit(Overloaded{
                        [](const SoftmaxLinear& m) { return m.features; },
                        [](const Mlp1& m) { return m.features; },
                        [](const Quadratic&) { return 0; },
                    },
                    kind_);
}

ParamVec Model::init_params(Rng& rng) const {
  ParamVec w(dim_);
  std::visit(
      Overloaded{
          [&](const SoftmaxLinear& m) {
            const double scale = 0.01;
            for (std::size_t i = 0; i < static_cast<std::size_t>(m.classes) * m.features; ++i) {
              w[i] = scale * standard_normal(rng);
            }
          },
          [&](const Mlp1& m) {
            const std::size_t w1 = static_cast<std::size_t>(m.hidden) * m.features;
            const std::size_t off_w2 = w1 + m.hidden;
            const double s1 = 1.0 / std::sqrt(static_cast<double>(m.features));
            const double s2 = 1.0 / std::sqrt(static_cast<double>(m.hidden));
            for (std::size_t i = 0; i < w1; ++i) w[i] = s1 * standard_normal(rng);
            for (std::size_t i = 0; i < static_cast<std::size_t>(m.classes) * m.hidden; ++i) {
              w[off_w2 + i] = s2 * standard_normal(rng);
            }
          },
          [&](const Quadratic&) {
            for (auto& x : w) x = standard_normal(rng);
          },
      },
      kind_);
  return w;
}

double loss_eval(const Model& model, const ParamVec& params, const Batch& batch) {
  return evaluate(model, params, batch, false).loss;
}

ParamVec grad_eval(const Model& model, const ParamVec& params, const Batch& batch) {
  return evaluate(model, params, batch, true).grad;
}

LossGrad loss_and_grad(const Model& model, const ParamVec& params,
                       const Batch& batch) {
  return evaluate(model, params, batch, true);
}

LossGrad tv_loss_grad(const Model& model, const ParamVec& params,
                      const Batch& batch, const ParamVec& anchor, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (anchor.size() != params.size()) {
    throw ConfigError("anchor length does not match parameter length");
  }
  LossGrad out = evaluate(model, params, batch, true);
  if (lambda == 0.0) return out;
  double penalty = 0.0;
  for (std::size_t j = 0; j < params.size(); ++j) {
    const double d = params[j] - anchor[j];
    penalty += d * d;
    out.grad[j] += lambda * d;
  }
  out.loss += 0.5 * lambda * penalty;
  require_finite(out.loss);
  return out;
}

void forward_logits(const Model& model, const ParamVec& params,
                    std::span<const double> x, std::span<double> logits) {
  std::visit(
      Overloaded{
          [&](const SoftmaxLinear& m) {
            const std::size_t n = m.features;
            const std::size_t bias = static_cast<std::size_t>(m.classes) * n;
            for (std::size_t k = 0; k < static_cast<std::size_t>(m.classes); ++k) {
              double acc = params[bias + k];
              for (std::size_t j = 0; j < n; ++j) acc += params[k * n + j] * x[j];
              logits[k] = acc;
            }
          },
          [&](const Mlp1& m) {
            const std::size_t n = m.features;
            const std::size_t h = m.hidden;
            const std::size_t off_b1 = h * n;
            const std::size_t off_w2 = off_b1 + h;
            const std::size_t off_b2 = off_w2 + static_cast<std::size_t>(m.classes) * h;
            std::vector<double> act(h);
            for (std::size_t u = 0; u < h; ++u) {
              double acc = params[off_b1 + u];
              for (std::size_t j = 0; j < n; ++j) acc += params[u * n + j] * x[j];
              act[u] = std::tanh(acc);
            }
            for (std::size_t k = 0; k < static_cast<std::size_t>(m.classes); ++k) {
              double acc = params[off_b2 + k];
              for (std::size_t u = 0; u < h; ++u) acc += params[off_w2 + k * h + u] * act[u];
              logits[k] = acc;
            }
          },
          [&](const Quadratic&) {
            throw ConfigError("quadratic objective has no class scores");
          },
      },
      model.kind());
}

double accuracy(const Model& model, const ParamVec& params, const Batch& batch) {
  if (!model.is_classifier()) {
    throw ConfigError("accuracy is only defined for classifier models");
  }
  check_inputs(model, params, batch);
  std::vector<double> logits(model.classes());
  std::size_t correct = 0;
  for (std::size_t s = 0; s < batch.rows(); ++s) {
    forward_logits(model, params, batch.row(s), logits);
    // max_element returns the first maximum, i.e. the lowest class on ties.
    const auto best = std::max_element(logits.begin(), logits.end()) - logits.begin();
    if (best == batch.labels[s]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.rows());
}

}  // namespace swarm_edge
