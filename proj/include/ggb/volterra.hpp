#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ggb/canonical.hpp"
#include "ggb/core.hpp"
#include "ggb/models.hpp"
#include "ggb/orthogonal.hpp"
#include "ggb/wiener.hpp"

namespace ggb {

/// Gamma function on the positive reals (Lanczos, g = 7, n = 9).
double gamma_fn(double x);

/// sqrt(2H Gamma(H + 1/2) Gamma(3/2 - H) / Gamma(2 - 2H)).
double fbm_constant(double hurst);

/// The fBm kernel operator K and its inverse on step functions of a grid.
///
/// K has the form c_H s^{1/2-H} I^{H-1/2}_{T-}[u^{H-1/2} f](s). Each output
/// cell is the cell average of -d/ds I^{H+1/2}_{T-}, where the integral of
/// order H + 1/2 is exact on every cell for step integrands and the power
/// weights are cell averages of s^{1/2-H}. The discrete K is upper
/// triangular in the cell index, so K^{-1} is applied by back substitution:
/// K^{-1}[K[f]] = f holds to rounding, and in the interior the result agrees
/// with the fractional derivative form of the inverse.
class FractionalOps {
 public:
  FractionalOps(double hurst, TimeGrid grid);

  double hurst() const noexcept { return hurst_; }
  double c_h() const noexcept { return c_h_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  bool is_identity() const noexcept { return hurst_ == 0.5; }

  GridFunction apply_K(const GridFunction& f) const;
  GridFunction apply_K_inv(const GridFunction& f) const;

  /// Row k holds K[f 1_{[0, t_k)}] for k = 0..n, one column per cell;
  /// with f = 1 this is the kernel k(t_k, .).
  Eigen::MatrixXd truncated_K(const std::vector<double>& f) const;
  Eigen::MatrixXd truncated_K_inv(const std::vector<double>& f) const;

  /// k(t_k, cell j) for all nodes and cells.
  const Eigen::MatrixXd& kernel() const;

 private:
  double weight(std::size_t i, std::size_t j) const;
  /// Cell matrix of K: C(i, j) is K[e_j] on cell i, upper triangular.
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMatrix& cells() const;
  /// Solves the leading k x k block of cells() against f[0..k).
  void back_substitute(const std::vector<double>& f, std::size_t k, double* x) const;

  double hurst_;
  double c_h_;
  TimeGrid grid_;
  std::vector<double> pbar_;
  std::vector<double> w_fwd_;
  mutable std::shared_ptr<const RowMatrix> cells_;
  mutable std::shared_ptr<const Eigen::MatrixXd> kernel_;
};

GridFunction apply_K(const GridFunction& f, const FractionalOps& ops);
GridFunction apply_K_inv(const GridFunction& f, const FractionalOps& ops);

/// Sum over cells u of k(t, u) k(s, u) du, the kernel's covariance.
double kernel_covariance(const FractionalOps& ops, double t, double s);

/// Adapted bridge of fBm built over the Brownian side of its Volterra
/// representation.
///
/// Nodes up to switch_node() come from the double-integral correction with
/// the transformed functionals K[g_i]; the remaining nodes are filled by
/// Gaussian conditioning of the input path on the generated prefix and on
/// the functionals.
class VolterraBridge {
 public:
  VolterraBridge(const ConditioningSet& cond, const FractionalOps& ops, double epsilon);

  std::size_t switch_node() const noexcept { return switch_node_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  /// The Brownian-side integrands K[g_i].
  const std::vector<GridFunction>& transformed() const noexcept { return gt_; }
  /// <<K[g]>>^W(0) by Lebesgue quadrature.
  const Eigen::MatrixXd& brownian_gram0() const noexcept { return gram_w0_; }

  SamplePath transform(const SamplePath& path) const;

 private:
  TimeGrid grid_;
  bool identity_ = false;
  std::unique_ptr<CanonicalBridge> brownian_;
  std::vector<GridFunction> gt_;
  Eigen::MatrixXd gram_w0_;
  std::size_t switch_node_ = 0;
  Eigen::MatrixXd q_;
  Eigen::MatrixXd kernel_;
  Eigen::MatrixXd g_fbm_;
  /// Row r: kriging weights of suffix node switch_node + 1 + r on the
  /// conditioning vector (prefix nodes 1..K, then functionals).
  Eigen::MatrixXd suffix_weights_;
  std::vector<double> shift_;
};

SamplePath volterra_bridge_transform(const SamplePath& path, const ConditioningSet& cond,
                                     const FractionalOps& ops, double epsilon);

}  // namespace ggb
