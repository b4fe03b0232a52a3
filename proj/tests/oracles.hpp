// Independent reference implementations used by the tests. Written
// against plain std::vector<double> so they share no arithmetic with the
// library beyond the loss being differentiated or scored.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "swarm_edge/model.hpp"
#include "swarm_edge/rng.hpp"

namespace oracle {

using Vec = std::vector<double>;
using swarm_edge::Batch;
using swarm_edge::Model;
using swarm_edge::ParamVec;

// Worst relative error of the analytic directional derivative against a
// central difference, over `probes` random (point, direction) pairs.
inline double max_grad_rel_error(const Model& model, const Batch& batch, int probes,
                                 std::uint64_t seed, double h = 1e-5) {
  swarm_edge::Rng rng(seed);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    ParamVec w(model.dim());
    for (auto& x : w) x = 0.5 * swarm_edge::standard_normal(rng);
    ParamVec u(model.dim());
    double un = 0.0;
    for (auto& x : u) {
      x = swarm_edge::standard_normal(rng);
      un += x * x;
    }
    un = std::sqrt(un);
    for (auto& x : u) x /= un;

    const ParamVec g = swarm_edge::grad_eval(model, w, batch);
    double analytic = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) analytic += g[j] * u[j];

    ParamVec wp = w, wm = w;
    for (std::size_t j = 0; j < w.size(); ++j) {
      wp[j] += h * u[j];
      wm[j] -= h * u[j];
    }
    const double numeric = (swarm_edge::loss_eval(model, wp, batch) -
                            swarm_edge::loss_eval(model, wm, batch)) /
                           (2.0 * h);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  }
  return worst;
}

// Synchronous distributed gradient descent: every worker takes one step
// from the shared iterate and the server averages the results.
// grads[i](w) is worker i's local gradient.
inline std::vector<Vec> sync_sgd(const Vec& w0, double eta, int rounds,
                                 const std::vector<std::function<Vec(const Vec&)>>& grads) {
  std::vector<Vec> traj{w0};
  Vec w = w0;
  for (int t = 0; t < rounds; ++t) {
    Vec sum(w.size(), 0.0);
    for (const auto& grad : grads) {
      const Vec g = grad(w);
      for (std::size_t j = 0; j < w.size(); ++j) sum[j] += w[j] - eta * g[j];
    }
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = sum[j] / static_cast<double>(grads.size());
    traj.push_back(w);
  }
  return traj;
}

// Reference global-best PSO with a growing elite: each round every particle
// moves by inertia plus personal- and global-best attraction, personal
// bests are refreshed on strict improvement, and the global variable is the
// mean personal best of the `elite(t)` lowest-scoring particles (ties to the
// lower index). Particle i draws r1 then r2 from its own stream.
struct PsoParams {
  std::function<double(int)> inertia;
  std::function<int(int)> elite;
  double c1 = 1.0;
  double c2 = 1.0;
};

struct PsoState {
  std::vector<Vec> x, v, p;
  std::vector<double> p_score;
  Vec g;
};

inline PsoState pso_run(const std::vector<Vec>& x0, const Vec& g0, const PsoParams& prm,
                        int rounds, const std::function<double(const Vec&)>& score,
                        std::vector<swarm_edge::Rng>& streams) {
  const std::size_t n = x0.size();
  const std::size_t d = g0.size();
  PsoState s;
  s.x = x0;
  s.v.assign(n, Vec(d, 0.0));
  s.p = x0;
  for (const auto& xi : x0) s.p_score.push_back(score(xi));
  s.g = g0;
  for (int t = 0; t < rounds; ++t) {
    const double c0 = prm.inertia(t);
    for (std::size_t i = 0; i < n; ++i) {
      Vec r1(d), r2(d);
      for (auto& r : r1) r = swarm_edge::uniform01(streams[i]);
      for (auto& r : r2) r = swarm_edge::uniform01(streams[i]);
      for (std::size_t j = 0; j < d; ++j) {
        s.v[i][j] = c0 * s.v[i][j] + prm.c1 * r1[j] * (s.p[i][j] - s.x[i][j]) +
                    prm.c2 * r2[j] * (s.g[j] - s.x[i][j]);
        // Same association as w + v - eta * g with eta * g == 0.
        s.x[i][j] = (s.x[i][j] + s.v[i][j]) - 0.0;
      }
      const double f = score(s.x[i]);
      if (f < s.p_score[i]) {
        s.p[i] = s.x[i];
        s.p_score[i] = f;
      }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.p_score[a] < s.p_score[b]; });
    const auto k = static_cast<std::size_t>(std::min<int>(prm.elite(t), static_cast<int>(n)));
    std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<long>(k));
    std::sort(chosen.begin(), chosen.end());
    Vec sum(d, 0.0);
    for (std::size_t i : chosen) {
      for (std::size_t j = 0; j < d; ++j) sum[j] += s.p[i][j];
    }
    for (std::size_t j = 0; j < d; ++j) s.g[j] = sum[j] / static_cast<double>(k);
  }
  return s;
}

}  // namespace oracle
