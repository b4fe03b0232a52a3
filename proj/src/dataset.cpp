#include "swarm_edge/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "swarm_edge/errors.hpp"
#include "swarm_edge/rng.hpp"

namespace swarm_edge {
namespace {

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <class T>
bool parse_number(std::string_view field, T& out) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

// Largest-remainder apportionment of `total` over `weights`; ties go to the
// lower index.
std::vector<std::size_t> apportion(std::size_t total,
                                   const std::vector<std::size_t>& weights) {
  const double sum = static_cast<double>(
      std::accumulate(weights.begin(), weights.end(), std::size_t{0}));
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    const double quota = static_cast<double>(total) * static_cast<double>(weights[c]) / sum;
    counts[c] = static_cast<std::size_t>(std::floor(quota));
    assigned += counts[c];
    rema.emplace_back(quota - std::floor(quota), c);
  }
  std::stable_sort(rema.begin(), rema.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) {
    ++counts[rema[i % rema.size()].second];
  }
  return counts;
}

void check_workers(const LabeledDataset& ds, int workers) {
  if (workers < 1) throw ConfigError("worker count must be >= 1");
  if (static_cast<std::size_t>(workers) > ds.size()) {
    throw ConfigError("worker count " + std::to_string(workers) +
                      " exceeds dataset size " + std::to_string(ds.size()));
  }
}

}  // namespace

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.n_features = n_features;
  out.class_count = class_count;
  out.labels.reserve(indices.size());
  out.features.reserve(indices.size() * n_features);
  for (std::size_t i : indices) {
    if (i >= size()) throw ConfigError("subset index out of range");
    out.labels.push_back(labels[i]);
    const auto first = features.begin() + static_cast<std::ptrdiff_t>(i * n_features);
    out.features.insert(out.features.end(), first,
                        first + static_cast<std::ptrdiff_t>(n_features));
  }
  return out;
}

void LabeledDataset::append(const LabeledDataset& other) {
  if (other.empty()) return;
  if (empty() && n_features == 0) n_features = other.n_features;
  if (other.n_features != n_features) {
    throw ConfigError("cannot append datasets with different feature counts");
  }
  class_count = std::max(class_count, other.class_count);
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
  features.insert(features.end(), other.features.begin(), other.features.end());
}

std::vector<std::size_t> LabeledDataset::label_histogram() const {
  std::vector<std::size_t> hist(static_cast<std::size_t>(class_count), 0);
  for (int y : labels) ++hist[static_cast<std::size_t>(y)];
  return hist;
}

LabeledDataset synth_blobs(int classes, int features, int per_class,
                           double spread, std::uint64_t seed) {
  if (classes < 2) throw ConfigError("synth_blobs: classes must be >= 2");
  if (features < 1) throw ConfigError("synth_blobs: features must be >= 1");
  if (per_class < 1) throw ConfigError("synth_blobs: per_class must be >= 1");
  if (!(spread > 0.0)) throw ConfigError("synth_blobs: spread must be positive");

  Rng rng(seed);
  const auto n = static_cast<std::size_t>(features);
  std::vector<double> centers(static_cast<std::size_t>(classes) * n);
  for (int c = 0; c < classes; ++c) {
    double norm = 0.0;
    auto* center = centers.data() + c * n;
    do {
      norm = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        center[j] = standard_normal(rng);
        norm += center[j] * center[j];
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < n; ++j) center[j] /= norm;
  }

  LabeledDataset ds;
  ds.n_features = n;
  ds.class_count = classes;
  ds.labels.reserve(static_cast<std::size_t>(classes) * per_class);
  ds.features.reserve(ds.labels.capacity() * n);
  for (int c = 0; c < classes; ++c) {
    for (int s = 0; s < per_class; ++s) {
      ds.labels.push_back(c);
      for (std::size_t j = 0; j < n; ++j) {
        ds.features.push_back(centers[c * n + j] + spread * standard_normal(rng));
      }
    }
  }
  return ds;
}

LabeledDataset load_csv(const std::filesystem::path& path, bool require_all_classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path.string());

  LabeledDataset ds;
  std::string line;
  std::size_t line_no = 0;
  int max_label = -1;
  bool have_width = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = line;
    if (trim(rest).empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw ParseError("blank row in " + path.string(), line_no);
    }
    std::size_t width = 0;
    std::size_t field_no = 0;
    while (true) {
      const auto comma = rest.find(',');
      const auto field = rest.substr(0, comma);
      if (field_no == 0) {
        int label = 0;
        if (!parse_number(field, label) || label < 0) {
          throw ParseError("invalid label '" + std::string(field) + "'", line_no);
        }
        ds.labels.push_back(label);
        max_label = std::max(max_label, label);
      } else {
        double value = 0.0;
        if (!parse_number(field, value) || !std::isfinite(value)) {
          throw ParseError("invalid feature '" + std::string(field) + "' in column " +
                               std::to_string(field_no + 1),
                           line_no);
        }
        ds.features.push_back(value);
        ++width;
      }
      ++field_no;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (width == 0) throw ParseError("row has no feature columns", line_no);
    if (!have_width) {
      ds.n_features = width;
      have_width = true;
    } else if (width != ds.n_features) {
      throw ParseError("expected " + std::to_string(ds.n_features) +
                           " features, found " + std::to_string(width),
                       line_no);
    }
  }
  if (ds.empty()) throw ParseError("dataset file is empty: " + path.string(), line_no);
  ds.class_count = max_label + 1;
  if (ds.class_count < 2) {
    throw ParseError("dataset needs at least two classes", line_no);
  }
  if (require_all_classes) {
    const auto hist = ds.label_histogram();
    for (std::size_t c = 0; c < hist.size(); ++c) {
      if (hist[c] == 0) {
        throw ParseError("class " + std::to_string(c) + " has no samples", line_no);
      }
    }
  }
  return ds;
}

void write_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset file: " + path.string());
  char buf[32];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.labels[i];
    for (std::size_t j = 0; j < ds.n_features; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.features[i * ds.n_features + j]);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Partition partition_iid(const LabeledDataset& ds, int workers, std::uint64_t seed) {
  check_workers(ds, workers);
  Rng rng(seed);
  auto perm = iota_indices(ds.size());
  std::shuffle(perm.begin(), perm.end(), rng);

  const auto k = static_cast<std::size_t>(workers);
  const std::size_t base = ds.size() / k;
  const std::size_t extra = ds.size() % k;
  Partition part(k);
  std::size_t pos = 0;
  for (std::size_t w = 0; w < k; ++w) {
    const std::size_t len = base + (w < extra ? 1 : 0);
    part[w].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                   perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(part[w].begin(), part[w].end());
    pos += len;
  }
  return part;
}

Partition partition_noniid_shards(const LabeledDataset& ds, int workers,
                                  int shards_per_worker, std::uint64_t seed) {
  check_workers(ds, workers);
  if (shards_per_worker < 1) throw ConfigError("shards_per_worker must be >= 1");
  const auto k = static_cast<std::size_t>(workers);
  const std::size_t shards = k * static_cast<std::size_t>(shards_per_worker);
  if (shards > ds.size()) {
    throw ConfigError("workers * shards_per_worker exceeds dataset size");
  }

  auto order = iota_indices(ds.size());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ds.labels[a] < ds.labels[b];
  });

  // Contiguous shard boundaries over the label-sorted order.
  std::vector<std::size_t> bounds(shards + 1);
  const std::size_t base = ds.size() / shards;
  const std::size_t extra = ds.size() % shards;
  for (std::size_t s = 0; s < shards; ++s) bounds[s + 1] = bounds[s] + base + (s < extra ? 1 : 0);

  Rng rng(seed);
  auto shard_perm = iota_indices(shards);
  std::shuffle(shard_perm.begin(), shard_perm.end(), rng);

  Partition part(k);
  for (std::size_t w = 0; w < k; ++w) {
    for (int j = 0; j < shards_per_worker; ++j) {
      const std::size_t s = shard_perm[w * shards_per_worker + j];
      part[w].insert(part[w].end(), order.begin() + static_cast<std::ptrdiff_t>(bounds[s]),
                     order.begin() + static_cast<std::ptrdiff_t>(bounds[s + 1]));
    }
    std::sort(part[w].begin(), part[w].end());
  }
  return part;
}

GlobalSplit build_global_dataset(const LabeledDataset& ds, double fraction,
                                 double score_ratio, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("global fraction must lie in (0, 1)");
  }
  if (!(score_ratio > 0.0 && score_ratio < 1.0)) {
    throw ConfigError("score_ratio must lie in (0, 1)");
  }
  const auto total = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.size())));
  const auto n_score = static_cast<std::size_t>(std::llround(score_ratio * static_cast<double>(total)));
  if (total == 0 || n_score == 0 || n_score >= total) {
    throw ConfigError("global dataset of " + std::to_string(total) +
                      " samples leaves an empty train or score part");
  }

  Rng rng(seed);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.class_count));
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);
  std::vector<std::size_t> weights;
  for (const auto& v : by_class) weights.push_back(v.size());
  const auto counts = apportion(total, weights);

  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto members = by_class[c];
    std::shuffle(members.begin(), members.end(), rng);
    chosen.insert(chosen.end(), members.begin(),
                  members.begin() + static_cast<std::ptrdiff_t>(counts[c]));
  }
  std::shuffle(chosen.begin(), chosen.end(), rng);

  GlobalSplit out;
  out.score_indices.assign(chosen.begin(), chosen.begin() + static_cast<std::ptrdiff_t>(n_score));
  out.train_indices.assign(chosen.begin() + static_cast<std::ptrdiff_t>(n_score), chosen.end());
  std::sort(out.score_indices.begin(), out.score_indices.end());
  std::sort(out.train_indices.begin(), out.train_indices.end());

  std::vector<bool> taken(ds.size(), false);
  for (std::size_t i : chosen) taken[i] = true;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!taken[i]) out.remaining_indices.push_back(i);
  }
  out.global.fraction = fraction;
  out.global.train_part = ds.subset(out.train_indices);
  out.global.score_part = ds.subset(out.score_indices);
  out.remaining = ds.subset(out.remaining_indices);
  return out;
}

std::pair<LabeledDataset, LabeledDataset> stratified_holdout(
    const LabeledDataset& ds, int per_class, std::uint64_t seed) {
  if (per_class < 0) throw ConfigError("holdout per_class must be >= 0");
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.class_count));
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);
  std::vector<bool> held(ds.size(), false);
  for (auto& members : by_class) {
    if (members.size() <= static_cast<std::size_t>(per_class)) {
      throw ConfigError("holdout would leave a class without training samples");
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (int s = 0; s < per_class; ++s) held[members[s]] = true;
  }
  std::vector<std::size_t> keep;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.size(); ++i) (held[i] ? out : keep).push_back(i);
  return {ds.subset(keep), ds.subset(out)};
}

void standardize(const LabeledDataset& fit, std::span<LabeledDataset* const> targets) {
  const std::size_t n = fit.n_features;
  if (fit.empty()) throw ConfigError("cannot standardize with an empty dataset");
  std::vector<double> mean(n, 0.0);
  std::vector<double> sd(n, 0.0);
  for (std::size_t i = 0; i < fit.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) mean[j] += fit.features[i * n + j];
  }
  for (auto& m : mean) m /= static_cast<double>(fit.size());
  for (std::size_t i = 0; i < fit.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = fit.features[i * n + j] - mean[j];
      sd[j] += d * d;
    }
  }
  for (auto& s : sd) {
    s = std::sqrt(s / static_cast<double>(fit.size()));
    if (s == 0.0) s = 1.0;
  }
  for (LabeledDataset* t : targets) {
    if (t->n_features != n) throw ConfigError("standardize: feature count mismatch");
    for (std::size_t i = 0; i < t->size(); ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        auto& x = t->features[i * n + j];
        x = (x - mean[j]) / sd[j];
      }
    }
  }
}

}  // namespace swarm_edge
