#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "swarm_edge/dataset.hpp"
#include "swarm_edge/errors.hpp"

using namespace swarm_edge;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("swarm_edge_test_" + name);
}

void expect_disjoint_cover(const Partition& part, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& worker : part) {
    EXPECT_FALSE(worker.empty());
    for (std::size_t i : worker) {
      ASSERT_LT(i, n);
      ++seen[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(seen[i], 1) << "sample " << i;
}

std::size_t distinct_labels(const LabeledDataset& ds, const std::vector<std::size_t>& idx) {
  std::set<int> labels;
  for (std::size_t i : idx) labels.insert(ds.labels[i]);
  return labels.size();
}

}  // namespace

TEST(Blobs, MinimalCase) {
  const LabeledDataset ds = synth_blobs(2, 3, 1, 0.3, 1);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.labels, (std::vector<int>{0, 1}));
  EXPECT_EQ(ds.n_features, 3u);
  EXPECT_EQ(ds.class_count, 2);
}

TEST(Blobs, Deterministic) {
  EXPECT_EQ(synth_blobs(3, 4, 10, 0.3, 5), synth_blobs(3, 4, 10, 0.3, 5));
  EXPECT_NE(synth_blobs(3, 4, 10, 0.3, 5), synth_blobs(3, 4, 10, 0.3, 6));
}

TEST(Blobs, InvalidArguments) {
  EXPECT_THROW(synth_blobs(1, 3, 1, 0.3, 1), ConfigError);
  EXPECT_THROW(synth_blobs(2, 3, 0, 0.3, 1), ConfigError);
  EXPECT_THROW(synth_blobs(2, 3, 1, 0.0, 1), ConfigError);
}

TEST(Blobs, ClusterSpreadMatches) {
  const int per = 4000;
  const LabeledDataset ds = synth_blobs(2, 2, per, 0.3, 8);
  // Class-0 samples: empirical std per coordinate should be 0.3.
  for (std::size_t c = 0; c < 2; ++c) {
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < per; ++i) {
      const double x = ds.features[static_cast<std::size_t>(i) * 2 + c];
      s += x;
      ss += x * x;
    }
    const double mean = s / per;
    EXPECT_NEAR(std::sqrt(ss / per - mean * mean), 0.3, 0.02);
  }
}

TEST(Csv, RoundTripIsExact) {
  const LabeledDataset ds = synth_blobs(3, 5, 7, 0.3, 2);
  const auto path = temp_file("roundtrip.csv");
  write_csv(ds, path);
  EXPECT_EQ(load_csv(path), ds);
  std::filesystem::remove(path);
}

TEST(Csv, MalformedRowReportsLine) {
  const auto path = temp_file("bad.csv");
  {
    std::ofstream out(path);
    out << "0,1.0,2.0\n1,3.0,4.0\n1,abc,4.0\n";
  }
  try {
    load_csv(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::filesystem::remove(path);
}

TEST(Csv, RaggedRowAndMissingClassRejected) {
  const auto path = temp_file("ragged.csv");
  {
    std::ofstream out(path);
    out << "0,1.0,2.0\n1,3.0\n";
  }
  EXPECT_THROW(load_csv(path), ParseError);
  {
    std::ofstream out(path);
    out << "0,1.0\n2,3.0\n";
  }
  EXPECT_THROW(load_csv(path), ParseError);
  EXPECT_NO_THROW(load_csv(path, false));
  std::filesystem::remove(path);
  EXPECT_THROW(load_csv(temp_file("does_not_exist.csv")), IoError);
}

TEST(Partition, IidCoversAndBalances) {
  const LabeledDataset ds = synth_blobs(10, 2, 100, 0.3, 3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Partition part = partition_iid(ds, 10, seed);
    ASSERT_EQ(part.size(), 10u);
    expect_disjoint_cover(part, ds.size());
    for (const auto& w : part) {
      EXPECT_EQ(w.size(), 100u);
    }
  }
  EXPECT_EQ(partition_iid(ds, 10, 4), partition_iid(ds, 10, 4));
  EXPECT_THROW(partition_iid(ds, 0, 1), ConfigError);
  EXPECT_THROW(partition_iid(ds, 1001, 1), ConfigError);
}

TEST(Partition, IidLabelHistogramsStayClose) {
  // N=1000, K=10, five seeds: every worker's label distribution is within
  // total-variation distance 0.2 of the global one.
  const LabeledDataset ds = synth_blobs(10, 2, 100, 0.3, 3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (const auto& w : partition_iid(ds, 10, seed)) {
      std::vector<double> hist(10, 0.0);
      for (std::size_t i : w) hist[static_cast<std::size_t>(ds.labels[i])] += 1.0;
      double tv = 0.0;
      for (double h : hist) tv += std::abs(h / static_cast<double>(w.size()) - 0.1);
      EXPECT_LE(0.5 * tv, 0.2);
    }
  }
}

TEST(Partition, ShardsLimitLabelsPerWorker) {
  const LabeledDataset ds = synth_blobs(10, 2, 100, 0.3, 4);
  const Partition part = partition_noniid_shards(ds, 50, 2, 9);
  expect_disjoint_cover(part, ds.size());
  for (const auto& w : part) {
    EXPECT_EQ(w.size(), 20u);
    EXPECT_LE(distinct_labels(ds, w), 2u);
  }
  EXPECT_EQ(part, partition_noniid_shards(ds, 50, 2, 9));
  EXPECT_THROW(partition_noniid_shards(ds, 600, 2, 9), ConfigError);
}

TEST(Partition, WholeDatasetToSingleWorker) {
  const LabeledDataset ds = synth_blobs(3, 2, 4, 0.3, 4);
  const Partition part = partition_noniid_shards(ds, 1, static_cast<int>(ds.size()), 1);
  ASSERT_EQ(part.size(), 1u);
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  EXPECT_EQ(part[0], all);
}

TEST(Partition, ShardSkewExceedsIid) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LabeledDataset ds = synth_blobs(6, 2, 50, 0.3, seed);
    double iid = 0.0, shards = 0.0;
    for (const auto& w : partition_iid(ds, 10, seed)) iid += distinct_labels(ds, w);
    for (const auto& w : partition_noniid_shards(ds, 10, 2, seed)) {
      shards += distinct_labels(ds, w);
    }
    EXPECT_LE(shards, iid);
  }
}

TEST(GlobalData, SizesAndStratification) {
  const LabeledDataset ds = synth_blobs(10, 2, 1000, 0.3, 5);
  const GlobalSplit split = build_global_dataset(ds, 0.01, 0.5, 6);
  EXPECT_EQ(split.global.train_part.size() + split.global.score_part.size(), 100u);
  EXPECT_EQ(split.global.score_part.size(), 50u);
  EXPECT_EQ(split.global.train_part.size(), 50u);
  EXPECT_EQ(split.remaining.size(), ds.size() - 100u);
  std::vector<int> per_class(10, 0);
  for (std::size_t i : split.train_indices) ++per_class[static_cast<std::size_t>(ds.labels[i])];
  for (std::size_t i : split.score_indices) ++per_class[static_cast<std::size_t>(ds.labels[i])];
  for (int c : per_class) EXPECT_LE(std::abs(c - 10), 1);
}

TEST(GlobalData, PartsDisjointAndCoverDataset) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LabeledDataset ds = synth_blobs(3, 2, 37, 0.3, seed);
    const GlobalSplit split = build_global_dataset(ds, 0.1, 0.3, seed);
    std::vector<int> seen(ds.size(), 0);
    for (std::size_t i : split.train_indices) ++seen[i];
    for (std::size_t i : split.score_indices) ++seen[i];
    for (std::size_t i : split.remaining_indices) ++seen[i];
    for (int s : seen) EXPECT_EQ(s, 1);
    EXPECT_EQ(split.remaining, ds.subset(split.remaining_indices));
    EXPECT_EQ(split.global.score_part, ds.subset(split.score_indices));
  }
}

TEST(GlobalData, EmptyPartRejected) {
  const LabeledDataset ds = synth_blobs(2, 2, 10, 0.3, 5);
  EXPECT_THROW(build_global_dataset(ds, 0.05, 0.5, 1), ConfigError);
  EXPECT_THROW(build_global_dataset(ds, 0.0, 0.5, 1), ConfigError);
  EXPECT_THROW(build_global_dataset(ds, 0.5, 1.0, 1), ConfigError);
}

TEST(Holdout, PerClassCounts) {
  const LabeledDataset ds = synth_blobs(4, 2, 30, 0.3, 5);
  const auto [keep, held] = stratified_holdout(ds, 5, 3);
  EXPECT_EQ(held.size(), 20u);
  EXPECT_EQ(keep.size(), 100u);
  for (std::size_t h : held.label_histogram()) EXPECT_EQ(h, 5u);
}

TEST(Standardize, ZeroMeanUnitVariance) {
  LabeledDataset ds = synth_blobs(3, 4, 50, 0.7, 9);
  const LabeledDataset fit = ds;
  LabeledDataset* targets[] = {&ds};
  standardize(fit, targets);
  for (std::size_t c = 0; c < ds.n_features; ++c) {
    double s = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double x = ds.features[i * ds.n_features + c];
      s += x;
      ss += x * x;
    }
    const double n = static_cast<double>(ds.size());
    EXPECT_NEAR(s / n, 0.0, 1e-12);
    EXPECT_NEAR(ss / n, 1.0, 1e-9);
  }
}
