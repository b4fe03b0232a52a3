#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "swarm_edge/param_vec.hpp"
#include "swarm_edge/rng.hpp"

namespace swarm_edge {

// Non-owning view of m labeled samples, features stored row-major.
struct Batch {
  std::span<const double> features;
  std::span<const int> labels;
  std::size_t cols = 0;

  std::size_t rows() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return features.subspan(i * cols, cols);
  }
};

// Multinomial logistic regression. Layout: W (classes x features, row-major)
// followed by the bias b (classes).
struct SoftmaxLinear {
  int classes = 0;
  int features = 0;
};

// One tanh hidden layer. Layout: W1 (hidden x features), b1 (hidden),
// W2 (classes x hidden), b2 (classes); each matrix row-major.
struct Mlp1 {
  int features = 0;
  int hidden = 16;
  int classes = 0;
};

// F(w) = 1/2 * sum_j curvature_j * (w_j - target_j)^2. Ignores the batch.
struct Quadratic {
  ParamVec target;
  std::vector<double> curvature;
};

class Model {
 public:
  using Kind = std::variant<SoftmaxLinear, Mlp1, Quadratic>;

  static Model softmax_linear(int classes, int features);
  static Model mlp1(int features, int hidden, int classes);
  static Model quadratic(ParamVec target, std::vector<double> curvature);

  const Kind& kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  bool is_classifier() const { return !std::holds_alternative<Quadratic>(kind_); }
  int classes() const;
  int features() const;

  // Seeded starting point. Classifier weights are small Gaussians scaled by
  // fan-in, biases zero; Quadratic draws N(0, 1) per coordinate.
  ParamVec init_params(Rng& rng) const;

 private:
  explicit Model(Kind kind);

  Kind kind_;
  std::size_t dim_ = 0;
};

struct LossGrad {
  double loss = 0.0;
  ParamVec grad;
};

// Mean per-sample cross-entropy (classifiers) or the quadratic value.
double loss_eval(const Model& model, const ParamVec& params, const Batch& batch);
ParamVec grad_eval(const Model& model, const ParamVec& params, const Batch& batch);
LossGrad loss_and_grad(const Model& model, const ParamVec& params,
                       const Batch& batch);

// Local loss plus the proximity penalty (lambda/2) * ||params - anchor||^2,
// which keeps local iterates close to the previous global variable.
LossGrad tv_loss_grad(const Model& model, const ParamVec& params,
                      const Batch& batch, const ParamVec& anchor, double lambda);

// Fraction of samples whose argmax logit (ties to the lowest class) matches
// the label. Classifiers only.
double accuracy(const Model& model, const ParamVec& params, const Batch& batch);

// Class scores for one sample, written into `logits` (size classes()).
void forward_logits(const Model& model, const ParamVec& params,
                    std::span<const double> x, std::span<double> logits);

}  // namespace swarm_edge
