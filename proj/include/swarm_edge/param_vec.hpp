#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace swarm_edge {

// Flat parameter vector: the unit of local updates, transmission and
// aggregation. Entries are stored in the owning model's flattening order.
class ParamVec {
 public:
  ParamVec() = default;
  explicit ParamVec(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  ParamVec(std::initializer_list<double> init) : values_(init) {}
  explicit ParamVec(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }

  const std::vector<double>& values() const { return values_; }

  bool operator==(const ParamVec&) const = default;

 private:
  std::vector<double> values_;
};

// y += a * x
void axpy(double a, const ParamVec& x, ParamVec& y);
double dot(const ParamVec& a, const ParamVec& b);
double norm2(const ParamVec& a);
double squared_distance(const ParamVec& a, const ParamVec& b);
bool all_finite(const ParamVec& a);
ParamVec mean_of(std::span<const ParamVec> vectors);
double max_abs_diff(const ParamVec& a, const ParamVec& b);

}  // namespace swarm_edge
