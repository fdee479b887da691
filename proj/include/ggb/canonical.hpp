#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ggb/core.hpp"
#include "ggb/models.hpp"
#include "ggb/wiener.hpp"

namespace ggb {

/// Kernels l(t, s) = -g(t)^T A(t)^{-1} g(s) and its resolvent
/// l*(t, s) = g(t)^T A(s)^{-1} g(s), where A = <<g>> is the remaining Gram.
///
/// Both factor through per-node vectors, so only O(nN) numbers are stored
/// and any entry costs O(N^2).
class BridgeKernelPair {
 public:
  BridgeKernelPair(const ConditioningSet& cond, const CovarianceModel& model);

  const TimeGrid& grid() const noexcept { return gram_.grid(); }
  const GramFunction& gram() const noexcept { return gram_; }
  const std::vector<double>& bracket_steps() const noexcept { return dm_; }

  double ell(std::size_t k, std::size_t j) const;
  double ell_star(std::size_t k, std::size_t j) const;
  /// The determinant-ratio expression -l(t, s) |A|(t) / |A|(s). It agrees
  /// with ell_star for a single functional only.
  double ell_star_det_ratio(std::size_t k, std::size_t j) const;
  /// l(t,s) + l*(t,s) - sum_{s <= u < t} l(t,u) l*(u,s) d<M>_u.
  double resolvent_residual(std::size_t k, std::size_t j) const;

  /// g(t_k) as an N-vector.
  Eigen::VectorXd g_at(std::size_t k) const { return g_.row(static_cast<Eigen::Index>(k)).transpose(); }

 private:
  Eigen::MatrixXd g_;
  GramFunction gram_;
  std::vector<double> dm_;
};

double ell(const ConditioningSet& cond, const CovarianceModel& model, double t, double s);
double ell_star(const ConditioningSet& cond, const CovarianceModel& model, double t, double s);
double resolvent_residual(const ConditioningSet& cond, const CovarianceModel& model, double t,
                          double s);

/// Adapted bridge of a Gaussian martingale.
///
/// Nodes 0..switch_node() follow the discretized bridge SDE driven by the
/// martingale increments; the remaining nodes are filled by the exact
/// residual projection, so the functionals hit y on every path.
class CanonicalBridge {
 public:
  CanonicalBridge(const ConditioningSet& cond, const CovarianceModel& model, double epsilon);

  std::size_t switch_node() const noexcept { return switch_node_; }
  const TimeGrid& grid() const noexcept { return grid_; }

  /// Bridge built from driver increments dM_i (one per segment).
  SamplePath apply(const std::vector<double>& driver) const;
  SamplePath simulate(SeedSpec seed) const;

 private:
  TimeGrid grid_;
  Eigen::MatrixXd g_;
  std::vector<double> dm_;
  std::vector<double> step_sd_;
  /// Row i: (A(t_i)^{-1} g(t_i))^T for i < switch node.
  Eigen::MatrixXd b_;
  Eigen::MatrixXd gram_switch_inv_;
  /// Deterministic mean line for the targets y.
  std::vector<double> shift_;
  Eigen::VectorXd y_;
  std::size_t switch_node_ = 0;
};

SamplePath simulate_canonical_bridge(const ConditioningSet& cond, const CovarianceModel& model,
                                     const TimeGrid& grid, SeedSpec seed, double epsilon);

/// Log density of the bridge law against the base law on [0, t], evaluated
/// on a path prefix.
double rn_log_density(const SamplePath& path_prefix, double t, const ConditioningSet& cond,
                      const CovarianceModel& model);

}  // namespace ggb
