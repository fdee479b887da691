#include "ggb/canonical.hpp"

#include <cmath>
#include <string>

#include "ggb/errors.hpp"

namespace ggb {

namespace {

void require_martingale(const CovarianceModel& model, const char* what) {
  if (!model.is_martingale_like()) {
    throw Unsupported(std::string(what) + " requires a martingale model");
  }
}

}  // namespace

BridgeKernelPair::BridgeKernelPair(const ConditioningSet& cond, const CovarianceModel& model)
    : g_(cond.node_values()), gram_(gram_function(cond, model)), dm_(bracket_increments(model, cond.grid())) {}

double BridgeKernelPair::ell(std::size_t k, std::size_t j) const {
  if (j > k) throw InvalidArgument("ell(t, s) requires s <= t");
  const Eigen::MatrixXd& inv = gram_.inverse(k);
  return -g_at(k).dot(inv * g_at(j));
}

double BridgeKernelPair::ell_star(std::size_t k, std::size_t j) const {
  if (j > k) throw InvalidArgument("ell_star(t, s) requires s <= t");
  gram_.inverse(k);
  const Eigen::MatrixXd& inv = gram_.inverse(j);
  return g_at(k).dot(inv * g_at(j));
}

double BridgeKernelPair::ell_star_det_ratio(std::size_t k, std::size_t j) const {
  if (j > k) throw InvalidArgument("ell_star(t, s) requires s <= t");
  gram_.inverse(j);
  return -ell(k, j) * gram_.det(k) / gram_.det(j);
}

double BridgeKernelPair::resolvent_residual(std::size_t k, std::size_t j) const {
  if (j > k) throw InvalidArgument("resolvent residual requires s <= t");
  double integral = 0.0;
  for (std::size_t u = j; u < k; ++u) integral += ell(k, u) * ell_star(u, j) * dm_[u];
  return ell(k, j) + ell_star(k, j) - integral;
}

double ell(const ConditioningSet& cond, const CovarianceModel& model, double t, double s) {
  const BridgeKernelPair kp(cond, model);
  return kp.ell(kp.grid().node_index(t), kp.grid().node_index(s));
}

double ell_star(const ConditioningSet& cond, const CovarianceModel& model, double t, double s) {
  const BridgeKernelPair kp(cond, model);
  return kp.ell_star(kp.grid().node_index(t), kp.grid().node_index(s));
}

double resolvent_residual(const ConditioningSet& cond, const CovarianceModel& model, double t,
                          double s) {
  const BridgeKernelPair kp(cond, model);
  return kp.resolvent_residual(kp.grid().node_index(t), kp.grid().node_index(s));
}

CanonicalBridge::CanonicalBridge(const ConditioningSet& cond, const CovarianceModel& model,
                                 double epsilon)
    : grid_(cond.grid()), g_(cond.node_values()), y_(cond.y) {
  require_martingale(model, "canonical bridge");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (epsilon > grid_.horizon() * (1.0 + 1e-12)) throw InvalidArgument("epsilon must not exceed T");
  const GramFunction gram = gram_function(cond, model);
  dm_ = bracket_increments(model, grid_);
  step_sd_.resize(dm_.size());
  for (std::size_t i = 0; i < dm_.size(); ++i) step_sd_[i] = std::sqrt(dm_[i]);

  switch_node_ = *gram.last_nondegenerate_at_or_before(grid_.horizon() - epsilon);
  const auto m = g_.cols();
  b_.resize(static_cast<Eigen::Index>(switch_node_), m);
  for (std::size_t i = 0; i < switch_node_; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    b_.row(r) = (gram.inverse(i) * g_.row(r).transpose()).transpose();
  }
  gram_switch_inv_ = gram.inverse(switch_node_);

  const Eigen::VectorXd a0y = gram.inverse(0) * y_;
  shift_.assign(grid_.size(), 0.0);
  Eigen::VectorXd cross = Eigen::VectorXd::Zero(m);
  for (std::size_t j = 0; j + 1 < grid_.size(); ++j) {
    cross += g_.row(static_cast<Eigen::Index>(j)).transpose() * dm_[j];
    shift_[j + 1] = cross.dot(a0y);
  }
}

SamplePath CanonicalBridge::apply(const std::vector<double>& driver) const {
  const std::size_t n = grid_.segments();
  if (driver.size() != n) throw InvalidArgument("driver length does not match grid segments");
  const auto m = g_.cols();
  std::vector<double> v(n + 1, 0.0);

  // The state h accumulates A^{-1} g dM through the current step, so the
  // drift uses the resolvent kernel summed over s <= t.
  Eigen::VectorXd h = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd gk = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < switch_node_; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    h += b_.row(r).transpose() * driver[i];
    const double step = driver[i] - g_.row(r).dot(h) * dm_[i];
    v[i + 1] = v[i] + step;
    gk += g_.row(r).transpose() * step;
  }

  // Residual projection of the remaining driver increments onto G = 0.
  Eigen::VectorXd tail = Eigen::VectorXd::Zero(m);
  for (std::size_t j = switch_node_; j < n; ++j) {
    tail += g_.row(static_cast<Eigen::Index>(j)).transpose() * driver[j];
  }
  const Eigen::VectorXd coef = gram_switch_inv_ * (tail + gk);
  for (std::size_t j = switch_node_; j < n; ++j) {
    v[j + 1] = v[j] + driver[j] - g_.row(static_cast<Eigen::Index>(j)).dot(coef) * dm_[j];
  }
  for (std::size_t k = 0; k <= n; ++k) v[k] += shift_[k];
  return SamplePath(grid_, std::move(v));
}

SamplePath CanonicalBridge::simulate(SeedSpec seed) const {
  NormalStream rng(seed);
  std::vector<double> z(dm_.size());
  rng.fill(z);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] *= step_sd_[i];
  return apply(z);
}

SamplePath simulate_canonical_bridge(const ConditioningSet& cond, const CovarianceModel& model,
                                     const TimeGrid& grid, SeedSpec seed, double epsilon) {
  if (!(cond.grid() == grid)) throw InvalidArgument("simulate_canonical_bridge: grid differs");
  return CanonicalBridge(cond, model, epsilon).simulate(seed);
}

double rn_log_density(const SamplePath& path_prefix, double t, const ConditioningSet& cond,
                      const CovarianceModel& model) {
  require_martingale(model, "rn_log_density");
  const TimeGrid& grid = cond.grid();
  const std::size_t kt = grid.node_index(t);
  if (kt >= grid.segments()) throw InvalidArgument("rn_log_density requires t < T");
  if (path_prefix.values.size() < kt + 1) throw InvalidArgument("path prefix is shorter than t");
  for (std::size_t i = 0; i <= kt; ++i) {
    if (path_prefix.grid[i] != grid[i]) throw InvalidArgument("rn_log_density: grid differs");
  }
  const GramFunction gram = gram_function(cond, model);
  const std::vector<double> dm = bracket_increments(model, grid);
  const Eigen::MatrixXd g = cond.node_values();
  Eigen::VectorXd gk = Eigen::VectorXd::Zero(g.cols());
  CompensatedSum stoch;
  CompensatedSum drift;
  for (std::size_t k = 0; k < kt; ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    const double inner = g.row(r).dot(gram.inverse(k) * (cond.y - gk));
    const double dx = path_prefix.values[k + 1] - path_prefix.values[k];
    stoch.add(inner * dx);
    drift.add(inner * inner * dm[k]);
    gk += g.row(r).transpose() * dx;
  }
  return stoch.value() - 0.5 * drift.value();
}

}  // namespace ggb
