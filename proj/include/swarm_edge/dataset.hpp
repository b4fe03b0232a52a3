#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "swarm_edge/model.hpp"

namespace swarm_edge {

struct LabeledDataset {
  std::vector<double> features;  // size() x n_features, row-major
  std::vector<int> labels;
  std::size_t n_features = 0;
  int class_count = 0;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  Batch view() const { return Batch{features, labels, n_features}; }

  LabeledDataset subset(std::span<const std::size_t> indices) const;
  void append(const LabeledDataset& other);
  std::vector<std::size_t> label_histogram() const;

  bool operator==(const LabeledDataset&) const = default;
};

// Index lists, one per worker.
using Partition = std::vector<std::vector<std::size_t>>;

// Small shared dataset: train_part is merged into every worker's pool,
// score_part is used only for fair-value scoring and audits.
struct GlobalDataset {
  LabeledDataset train_part;
  LabeledDataset score_part;
  double fraction = 0.0;
};

struct GlobalSplit {
  GlobalDataset global;
  LabeledDataset remaining;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> score_indices;
  std::vector<std::size_t> remaining_indices;
};

// Gaussian clusters around unit-norm random centers, emitted class by class.
LabeledDataset synth_blobs(int classes, int features, int per_class,
                           double spread, std::uint64_t seed);

// CSV rows: integer label, then decimal features. No header.
LabeledDataset load_csv(const std::filesystem::path& path,
                        bool require_all_classes = true);
// Writes reals with 17 significant digits so load_csv(write_csv(ds)) == ds.
void write_csv(const LabeledDataset& ds, const std::filesystem::path& path);

Partition partition_iid(const LabeledDataset& ds, int workers, std::uint64_t seed);
Partition partition_noniid_shards(const LabeledDataset& ds, int workers,
                                  int shards_per_worker, std::uint64_t seed);

GlobalSplit build_global_dataset(const LabeledDataset& ds, double fraction,
                                 double score_ratio, std::uint64_t seed);

// Moves `per_class` random samples of every class into the second result.
std::pair<LabeledDataset, LabeledDataset> stratified_holdout(
    const LabeledDataset& ds, int per_class, std::uint64_t seed);

// Z-scores every feature with statistics from `fit`, applied to each target.
void standardize(const LabeledDataset& fit, std::span<LabeledDataset* const> targets);

}  // namespace swarm_edge
