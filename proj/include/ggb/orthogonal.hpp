#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ggb/core.hpp"
#include "ggb/models.hpp"
#include "ggb/wiener.hpp"

namespace ggb {

/// Ingredients of the projection bridge X - <<1_t, g>>^T <<g>>^{-1} (G_T(X) - y).
struct OrthogonalBridge {
  ConditioningSet cond;
  CovarianceModel model;
  TimeGrid grid;
  /// Row k is the N-vector <<1_{t_k}, g>> = Cov(X_{t_k}, G_T(X)).
  Eigen::MatrixXd cross;
  Eigen::MatrixXd gram0;
  Eigen::MatrixXd gram0_inv;
  /// cross * gram0_inv, cached because every transform needs it.
  Eigen::MatrixXd weights;
};

/// Throws LinearDependence if <<g>>(0) is singular.
OrthogonalBridge build_orthogonal(const ConditioningSet& cond, const CovarianceModel& model,
                                  const TimeGrid& grid);

/// N-vector of wiener integrals of each g_i against the path.
Eigen::VectorXd functionals(const ConditioningSet& cond, const SamplePath& path);

SamplePath transform_path(const OrthogonalBridge& b, const SamplePath& path);

/// Conditional mean at node t for a model with mean m.
double bridge_mean(const OrthogonalBridge& b, const MeanFunction& mean, double t);

/// Conditional covariance at nodes (t, s). Never reads y.
double bridge_covariance(const OrthogonalBridge& b, double t, double s);

/// Conditions one functional at a time in the given order, updating the
/// cross covariances after each step. Throws DegenerateConditioning when a
/// remaining single-functional variance vanishes.
SamplePath iterative_condition(const SamplePath& path,
                               const std::vector<std::pair<GridFunction, double>>& conds,
                               const CovarianceModel& model);

/// Covariance at (t, s) after pinning the process at each of `pin_times`
/// in turn (rank-one Schur updates).
double multibridge_covariance(const CovarianceModel& model, const std::vector<double>& pin_times,
                              double t, double s);

}  // namespace ggb
