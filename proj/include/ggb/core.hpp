#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace ggb {

/// Ordered time nodes 0 = t_0 < t_1 < ... < t_n = T.
///
/// Node storage is shared between copies, so paths and grid functions can
/// carry their grid by value without duplicating the time axis.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  static TimeGrid uniform(double horizon, int segments);

  std::size_t size() const noexcept { return times_->size(); }
  std::size_t segments() const noexcept { return times_->size() - 1; }
  double horizon() const noexcept { return times_->back(); }
  double operator[](std::size_t i) const noexcept { return (*times_)[i]; }
  double dt(std::size_t i) const noexcept { return (*times_)[i + 1] - (*times_)[i]; }
  std::span<const double> times() const noexcept { return *times_; }
  bool is_uniform() const noexcept { return uniform_; }

  /// Index of the node equal to `t` within a relative tolerance, if any.
  std::optional<std::size_t> find_node(double t) const noexcept;
  /// As find_node, but throws InvalidArgument when `t` is not a node.
  std::size_t node_index(double t) const;
  /// Largest node index with t_k <= t (with the same tolerance).
  std::size_t floor_node(double t) const noexcept;
  /// Index of the node closest to t (ties go to the earlier node).
  std::size_t nearest_node(double t) const noexcept;

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept;

 private:
  std::shared_ptr<const std::vector<double>> times_;
  bool uniform_ = false;
};

TimeGrid make_uniform_grid(double horizon, int segments);

/// Process values at every node of a grid.
struct SamplePath {
  TimeGrid grid;
  std::vector<double> values;

  SamplePath(TimeGrid g, std::vector<double> v);
  double operator[](std::size_t i) const noexcept { return values[i]; }
};

/// values[i+1] - values[i], one per segment.
std::vector<double> increments(const SamplePath& path);

/// Path with values[0] = start and the given increments accumulated.
SamplePath cumulative_path(const TimeGrid& grid, std::span<const double> steps,
                           double start = 0.0);

/// (master_seed, stream_index) names one reproducible normal stream.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

/// Standard normal variates from the stream named by a SeedSpec.
class NormalStream {
 public:
  explicit NormalStream(SeedSpec seed);

  double next() { return dist_(engine_); }
  void fill(std::span<double> out);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

/// Compensated (Neumaier) running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace ggb
