#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ggb/core.hpp"

namespace ggb {

enum class ModelKind { martingale, fbm, generic };

/// Covariance structure of a centered continuous Gaussian process on [0, T].
///
/// Martingale models carry a bracket t -> <M>_t, fBm models a Hurst index,
/// and generic models an arbitrary callable R(t, s).
class CovarianceModel {
 public:
  static CovarianceModel brownian(double horizon);
  static CovarianceModel martingale(double horizon, std::function<double(double)> bracket);
  /// Bracket given by node values on a uniform grid of [0, T], linear in between.
  static CovarianceModel martingale_from_values(double horizon, std::vector<double> values);
  static CovarianceModel fbm(double horizon, double hurst);
  static CovarianceModel generic(double horizon, std::function<double(double, double)> cov);
  /// Covariance given as a node matrix on a uniform grid. The matrix may
  /// include node 0 (size n+1) or omit it (size n, node 0 deterministic).
  static CovarianceModel generic_from_matrix(double horizon, const Eigen::MatrixXd& cov);

  ModelKind kind() const noexcept { return kind_; }
  double horizon() const noexcept { return horizon_; }
  double hurst() const noexcept { return hurst_; }
  /// True for martingale models and for fBm with H = 1/2.
  bool is_martingale_like() const noexcept;

  /// <M>_t; for fBm with H = 1/2 returns t. Other kinds throw Unsupported.
  double bracket(double t) const;
  double covariance(double t, double s) const;

 private:
  CovarianceModel() = default;

  ModelKind kind_ = ModelKind::martingale;
  double horizon_ = 1.0;
  double hurst_ = 0.5;
  bool unit_bracket_ = false;
  std::function<double(double)> bracket_;
  std::function<double(double, double)> cov_;
};

/// R(t, s); throws InvalidArgument when t or s lies outside [0, T].
double covariance_at(const CovarianceModel& model, double t, double s);

/// [R(t_i, t_j)] over every node of the grid.
Eigen::MatrixXd node_covariance(const CovarianceModel& model, const TimeGrid& grid);

/// E[dX_i dX_j] for the grid increments, built from a node covariance matrix.
Eigen::MatrixXd increment_covariance(const Eigen::MatrixXd& node_cov);

/// Piecewise-linear mean function given by node values on a grid.
class MeanFunction {
 public:
  MeanFunction(TimeGrid grid, std::vector<double> values);
  static MeanFunction zero(const TimeGrid& grid);

  double at(double t) const;
  std::vector<double> on(const TimeGrid& grid) const;
  bool is_zero() const noexcept { return zero_; }

 private:
  TimeGrid grid_;
  std::vector<double> values_;
  bool zero_ = false;
};

/// Exact Gaussian sampler for one (model, mean, grid) triple.
///
/// Martingale-like models draw independent increments with variance
/// d<M>_i. Everything else factorizes the covariance of nodes 1..n once
/// (with escalating diagonal jitter) and reuses the factor for every path.
class PathSampler {
 public:
  PathSampler(const CovarianceModel& model, const MeanFunction& mean, const TimeGrid& grid);

  SamplePath sample(SeedSpec seed) const;
  /// Centered increments only (what martingale drivers consume).
  std::vector<double> sample_increments(SeedSpec seed) const;

  const TimeGrid& grid() const noexcept { return grid_; }
  /// Diagonal jitter that was needed for the factorization (0 if none).
  double jitter() const noexcept { return jitter_; }

 private:
  TimeGrid grid_;
  std::vector<double> mean_;
  bool increment_mode_ = false;
  std::vector<double> step_sd_;
  Eigen::MatrixXd chol_;
  double jitter_ = 0.0;
};

SamplePath sample_path(const CovarianceModel& model, const MeanFunction& mean,
                       const TimeGrid& grid, SeedSpec seed);

/// Lower Cholesky factor with the escalating jitter policy. Throws
/// FactorizationFailure naming the first failing 1-based leading minor.
Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& a, double* jitter_used = nullptr);

}  // namespace ggb
