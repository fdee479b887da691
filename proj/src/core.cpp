#include "ggb/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ggb/errors.hpp"

namespace ggb {

namespace {

constexpr double kNodeTolerance = 1e-9;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> times) {
  if (times.size() < 2) {
    throw InvalidArgument("time grid needs at least two nodes");
  }
  if (times.front() != 0.0) {
    throw InvalidArgument("time grid must start at exactly 0");
  }
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (!(times[i] < times[i + 1])) {
      throw InvalidArgument("time grid must be strictly increasing (node " +
                            std::to_string(i + 1) + ")");
    }
  }
  const double h0 = times[1] - times[0];
  uniform_ = std::all_of(times.begin() + 1, times.end(), [&, i = std::size_t{0}](double) mutable {
    ++i;
    return std::abs((times[i] - times[i - 1]) - h0) <= 1e-12 * std::max(1.0, times.back());
  });
  times_ = std::make_shared<const std::vector<double>>(std::move(times));
}

TimeGrid TimeGrid::uniform(double horizon, int segments) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("grid horizon T must be positive");
  }
  if (segments < 1) {
    throw InvalidArgument("grid segment count n must be >= 1");
  }
  std::vector<double> t(static_cast<std::size_t>(segments) + 1);
  for (int i = 0; i <= segments; ++i) {
    t[i] = i * horizon / segments;
  }
  t.back() = horizon;
  return TimeGrid(std::move(t));
}

std::optional<std::size_t> TimeGrid::find_node(double t) const noexcept {
  const auto& v = *times_;
  const double tol = kNodeTolerance * std::max(1.0, v.back());
  auto it = std::lower_bound(v.begin(), v.end(), t - tol);
  if (it != v.end() && std::abs(*it - t) <= tol) {
    return static_cast<std::size_t>(it - v.begin());
  }
  return std::nullopt;
}

std::size_t TimeGrid::node_index(double t) const {
  if (auto k = find_node(t)) return *k;
  throw InvalidArgument("time " + std::to_string(t) + " is not a grid node");
}

std::size_t TimeGrid::floor_node(double t) const noexcept {
  const auto& v = *times_;
  const double tol = kNodeTolerance * std::max(1.0, v.back());
  auto it = std::upper_bound(v.begin(), v.end(), t + tol);
  if (it == v.begin()) return 0;
  return static_cast<std::size_t>(it - v.begin()) - 1;
}

std::size_t TimeGrid::nearest_node(double t) const noexcept {
  const std::size_t k = floor_node(t);
  if (k + 1 < size() && (*times_)[k + 1] - t < t - (*times_)[k]) return k + 1;
  return k;
}

bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept {
  return a.times_ == b.times_ || *a.times_ == *b.times_;
}

TimeGrid make_uniform_grid(double horizon, int segments) {
  return TimeGrid::uniform(horizon, segments);
}

SamplePath::SamplePath(TimeGrid g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw InvalidArgument("path length " + std::to_string(values.size()) +
                          " does not match grid size " + std::to_string(grid.size()));
  }
}

std::vector<double> increments(const SamplePath& path) {
  std::vector<double> d(path.values.size() - 1);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = path.values[i + 1] - path.values[i];
  }
  return d;
}

SamplePath cumulative_path(const TimeGrid& grid, std::span<const double> steps, double start) {
  if (steps.size() != grid.segments()) {
    throw InvalidArgument("increment count does not match grid segments");
  }
  std::vector<double> v(grid.size());
  v[0] = start;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    v[i + 1] = v[i] + steps[i];
  }
  return SamplePath(grid, std::move(v));
}

NormalStream::NormalStream(SeedSpec seed) {
  // Mixing both words through splitmix keeps nearby (seed, stream) pairs far
  // apart in the engine's state space.
  const std::uint64_t a = splitmix64(seed.master_seed);
  const std::uint64_t b = splitmix64(seed.stream_index ^ 0x6a09e667f3bcc909ULL);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  engine_.seed(seq);
}

void NormalStream::fill(std::span<double> out) {
  for (double& x : out) x = dist_(engine_);
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    carry_ += (sum_ - t) + x;
  } else {
    carry_ += (x - t) + sum_;
  }
  sum_ = t;
}

}  // namespace ggb
