#include "swarm_edge/param_vec.hpp"

#include <algorithm>
#include <cmath>

#include "swarm_edge/errors.hpp"

namespace swarm_edge {
namespace {

void require_same_size(const ParamVec& a, const ParamVec& b) {
  if (a.size() != b.size()) {
    throw ConfigError("parameter vector length mismatch: " +
                      std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  }
}

}  // namespace

void axpy(double a, const ParamVec& x, ParamVec& y) {
  require_same_size(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double dot(const ParamVec& a, const ParamVec& b) {
  require_same_size(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(const ParamVec& a) { return std::sqrt(dot(a, a)); }

double squared_distance(const ParamVec& a, const ParamVec& b) {
  require_same_size(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

bool all_finite(const ParamVec& a) {
  return std::all_of(a.begin(), a.end(),
                     [](double x) { return std::isfinite(x); });
}

ParamVec mean_of(std::span<const ParamVec> vectors) {
  if (vectors.empty()) throw ConfigError("mean of an empty vector list");
  ParamVec out(vectors.front().size());
  for (const auto& v : vectors) axpy(1.0, v, out);
  const double inv = static_cast<double>(vectors.size());
  for (auto& x : out) x /= inv;
  return out;
}

double max_abs_diff(const ParamVec& a, const ParamVec& b) {
  require_same_size(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace swarm_edge
