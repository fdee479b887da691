#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ggb/core.hpp"
#include "ggb/models.hpp"

namespace ggb {

/// Step function on a grid: value values[i] on [t_i, t_{i+1}).
struct GridFunction {
  TimeGrid grid;
  std::vector<double> values;

  GridFunction(TimeGrid g, std::vector<double> v);

  /// Samples a callable at every node (left-endpoint convention).
  static GridFunction sample(const TimeGrid& grid, const std::function<double(double)>& f);
  static GridFunction constant(const TimeGrid& grid, double c);
  /// "one", "avg" ((T - t) / T) or "ind" (indicator of [0, u)).
  static GridFunction preset(const TimeGrid& grid, const std::string& name, double u = 0.0);

  double operator[](std::size_t i) const noexcept { return values[i]; }
};

GridFunction scaled(const GridFunction& f, double c);

/// N integrands with their target values.
struct ConditioningSet {
  std::vector<GridFunction> gs;
  Eigen::VectorXd y;

  ConditioningSet(std::vector<GridFunction> functions, Eigen::VectorXd targets);

  std::size_t size() const noexcept { return gs.size(); }
  const TimeGrid& grid() const noexcept { return gs.front().grid; }
  /// Row k holds g(t_k) as an N-vector.
  Eigen::MatrixXd node_values() const;
};

/// <<f, g>> restricted to [from, T].
///
/// Martingale models integrate f g d<M> from the node `from`; other kinds
/// support only from = 0 and use the full increment covariance.
double inner_product(const GridFunction& f, const GridFunction& g, const CovarianceModel& model,
                     double from = 0.0);

/// Degeneracy rule shared by every consumer of Gram matrices.
bool gram_is_invertible(const Eigen::MatrixXd& a);

/// Remaining Gram matrices <<g>>(t_k) for k = 0..n.
class GramFunction {
 public:
  GramFunction(TimeGrid grid, std::vector<Eigen::MatrixXd> mats);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(mats_.front().rows()); }
  const Eigen::MatrixXd& at(std::size_t k) const { return mats_.at(k); }
  double det(std::size_t k) const { return dets_.at(k); }
  bool nondegenerate(std::size_t k) const { return inverses_.at(k).has_value(); }
  /// Throws DegenerateConditioning at degenerate nodes.
  const Eigen::MatrixXd& inverse(std::size_t k) const;
  /// Largest node index k with t_k <= t and a non-degenerate Gram, if any.
  std::optional<std::size_t> last_nondegenerate_at_or_before(double t) const;

 private:
  TimeGrid grid_;
  std::vector<Eigen::MatrixXd> mats_;
  std::vector<double> dets_;
  std::vector<std::optional<Eigen::MatrixXd>> inverses_;
};

/// Remaining Gram function of a conditioning set under a martingale model.
/// Throws Unsupported for other kinds and LinearDependence if <<g>>(0) is
/// not invertible.
GramFunction gram_function(const ConditioningSet& cond, const CovarianceModel& model);

/// Sum of f(t_i) (X_{i+1} - X_i).
double wiener_integral(const GridFunction& f, const SamplePath& path);
/// The same sum restricted to segments i < k.
double wiener_integral_until(const GridFunction& f, const SamplePath& path, std::size_t k);

/// d<M>_i for every grid segment of a martingale-like model.
std::vector<double> bracket_increments(const CovarianceModel& model, const TimeGrid& grid);

}  // namespace ggb
