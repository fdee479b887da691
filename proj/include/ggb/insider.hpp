#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ggb/core.hpp"
#include "ggb/models.hpp"
#include "ggb/wiener.hpp"

namespace ggb {

/// Returns dS/S = a d<M> + dM, with an insider who knows int g dS/S = y.
struct MarketSpec {
  CovarianceModel model;
  GridFunction a;
  ConditioningSet cond;
  double epsilon;

  MarketSpec(CovarianceModel m, GridFunction rate, ConditioningSet c, double eps);

  const TimeGrid& grid() const noexcept { return cond.grid(); }
  /// y' = y - <<a, g>>, the value of int g dM known to the insider.
  Eigen::VectorXd y_prime() const;
  /// Last trading node: the grid node at or just before T - epsilon.
  std::size_t trading_end() const;
};

enum class Trader { ordinary, insider };

/// Per-unit-bracket information drift g(t)^T A(t)^{-1} (y' - int_0^t g dM).
double insider_drift(const MarketSpec& spec, double t, const SamplePath& m_path_prefix);

double optimal_portfolio(const MarketSpec& spec, Trader who, double t,
                         const SamplePath& m_path_prefix);

/// log v0 + sum pi dM + 1/2 sum pi (2a - pi) d<M> over the trading window.
double log_wealth(const MarketSpec& spec, const std::vector<double>& pi, const SamplePath& m_path,
                  double v0);

/// Closed-form additional expected log utility of the insider. The Gram at
/// T - epsilon is evaluated exactly for the step integrands, also between
/// nodes.
double insider_delta(const MarketSpec& spec);

/// The Black-Scholes case with g = (1, (T - t) / T), y = 0 and a = mu / sigma.
double bs_example_delta(double mu, double sigma, double horizon, double epsilon);

struct UtilityGap {
  double mean = 0.0;
  double se = 0.0;
  std::size_t paths = 0;
};

/// Monte Carlo estimate of E[log V(insider)] - E[log V(ordinary)].
///
/// Each market draws y' from N(0, <<g>>(0)) and then simulates M with the
/// information drift, so the pair (y', M) has its joint law.
UtilityGap mc_utility_gap(const MarketSpec& spec, std::size_t paths, std::uint64_t seed,
                          unsigned workers = 0);

}  // namespace ggb
