#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "swarm_edge/param_vec.hpp"
#include "swarm_edge/swarm_types.hpp"

namespace swarm_edge {

inline constexpr const char* kMetricsHeader =
    "round,algo,rep,train_loss,test_acc,best_score,weight_div,scalar_reports,"
    "vector_uses,energy,blacklist";

struct MetricsRow {
  int round = 0;
  Algo algo = Algo::kDsl;
  int rep = 0;
  double train_loss = 0.0;
  double test_acc = 0.0;  // NaN for non-classifier objectives
  double best_score = 0.0;
  double weight_div = 0.0;
  std::uint64_t scalar_reports = 0;
  std::uint64_t vector_uses = 0;
  double energy = 0.0;
  std::uint64_t blacklist = 0;

  bool operator==(const MetricsRow&) const = default;
};

using MetricsTable = std::vector<MetricsRow>;

struct AlgoSummary {
  Algo algo = Algo::kDsl;
  double final_acc_mean = 0.0;
  double final_acc_std = 0.0;
  double slope = 0.0;                    // NaN when too few rounds to fit
  std::optional<int> rounds_to_target;   // nullopt: never reached
  double scalar_reports = 0.0;           // final cumulative counters,
  double vector_uses = 0.0;              // averaged over repetitions
  double energy = 0.0;
};

struct SummaryReport {
  std::vector<AlgoSummary> algos;
};

// Mean over workers of ||w_i - mean|| / max(||mean||, 1e-12).
double weight_divergence(std::span<const ParamVec> workers);

// Least-squares slope of log(e) against log(t) over points with t in
// [t_lo, t_hi]. Needs at least 10 such points, all with e > 0.
double fit_rate(std::span<const std::pair<double, double>> errors, double t_lo,
                double t_hi);

// Per-algorithm summary: final accuracy over repetitions, log-log slope of
// the repetition-mean train loss over rounds >= 10, and the first round at
// which the repetition-mean test accuracy reaches `target_accuracy`.
SummaryReport summarize(const MetricsTable& table, double target_accuracy);

void write_metrics_csv(const MetricsTable& table, const std::filesystem::path& path);
MetricsTable read_metrics_csv(const std::filesystem::path& path);
void write_summary_json(const SummaryReport& report, const std::filesystem::path& path);

}  // namespace swarm_edge
