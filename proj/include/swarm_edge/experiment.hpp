#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "swarm_edge/adversary.hpp"
#include "swarm_edge/channel.hpp"
#include "swarm_edge/dataset.hpp"
#include "swarm_edge/metrics.hpp"
#include "swarm_edge/model.hpp"
#include "swarm_edge/swarm.hpp"

namespace swarm_edge {

struct DataSpec {
  std::string source = "blobs";  // "blobs" or "csv"
  int classes = 10;
  int features = 64;
  int train_per_class = 500;
  int test_per_class = 100;
  double spread = 0.3;
  std::string csv_path;
  std::string csv_test_path;  // empty: hold out test_per_class per class
  bool standardize = false;

  bool operator==(const DataSpec&) const = default;
};

struct ModelSpec {
  std::string kind = "softmax";  // "softmax", "mlp" or "quadratic"
  int hidden = 16;
  int dim = 10;                  // quadratic only
  double curvature_min = 1.0;    // quadratic only
  double curvature_max = 10.0;

  bool operator==(const ModelSpec&) const = default;
};

struct PartitionSpec {
  std::string scheme = "iid";  // "iid" or "shards"
  int shards_per_worker = 2;

  bool operator==(const PartitionSpec&) const = default;
};

struct GlobalSpec {
  double fraction = 0.01;
  double score_ratio = 0.5;

  bool operator==(const GlobalSpec&) const = default;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int repetitions = 1;
  std::vector<Algo> algos = {Algo::kDsl, Algo::kFl, Algo::kPso};
  double target_accuracy = 0.8;
  std::string out_dir = "out";
  DataSpec data;
  ModelSpec model;
  PartitionSpec partition;
  GlobalSpec global;
  SwarmConfig swarm;
  ChannelConfig channel;
  AttackerConfig attack;
  AuditPolicy defense;

  // Checks every component invariant; throws ConfigError naming the key.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// Flat TOML-style file: [section] headers and `key = value` lines, '#'
// comments, strings in double quotes. Unknown keys are rejected; absent keys
// keep their defaults (swarm.s_max defaults to ceil(0.2 * workers)).
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);
std::string serialize_config(const ExperimentConfig& cfg);
// Every key with its default value and a one-line description.
std::string describe_config_keys();

// Seeds for repetition `rep` of an experiment.
std::uint64_t repetition_seed(std::uint64_t seed, int rep);

struct Scenario {
  Model model;
  FederatedData fed;
  LabeledDataset train;  // full training population, for the train-loss metric
  LabeledDataset test;
};

// Dataset, global split and partition for one repetition. Identical for
// every algorithm run in that repetition.
Scenario build_scenario(const ExperimentConfig& cfg, int rep);

using RoundObserver = std::function<void(const SwarmEngine&, const RoundMetrics&)>;

// T rounds of cfg.algo; row 0 is the initial state, row t follows round t.
MetricsTable run_experiment(const Scenario& scenario, const SwarmConfig& cfg,
                            const ChannelConfig& channel, const AttackerConfig& attack,
                            const AuditPolicy& defense, int rep = 0,
                            const RoundObserver& observer = {});

struct BenchmarkResult {
  MetricsTable table;
  SummaryReport summary;
};

// Every configured algorithm on every repetition, with common random numbers
// inside a repetition.
BenchmarkResult run_benchmark(const ExperimentConfig& cfg);

// metrics.csv and summary.json under `dir`; removes partial files on error.
void write_benchmark_outputs(const BenchmarkResult& result,
                             const std::filesystem::path& dir);

}  // namespace swarm_edge
