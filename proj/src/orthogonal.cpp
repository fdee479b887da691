#include "ggb/orthogonal.hpp"

#include <algorithm>
#include <cmath>

#include "ggb/errors.hpp"

namespace ggb {

namespace {

struct CrossAndGram {
  Eigen::MatrixXd cross;
  Eigen::MatrixXd gram;
};

// Cov(X_{t_k}, G_i) and Cov(G_i, G_j), both from grid increments.
CrossAndGram cross_and_gram(const std::vector<GridFunction>& gs, const CovarianceModel& model,
                            const TimeGrid& grid) {
  const auto nodes = static_cast<Eigen::Index>(grid.size());
  const Eigen::Index n = nodes - 1;
  const auto m = static_cast<Eigen::Index>(gs.size());
  Eigen::MatrixXd g(n, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index j = 0; j < n; ++j) g(j, c) = gs[c].values[j];
  }
  CrossAndGram out;
  if (model.is_martingale_like()) {
    const std::vector<double> d = bracket_increments(model, grid);
    out.cross = Eigen::MatrixXd::Zero(nodes, m);
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index c = 0; c < m; ++c) out.cross(k + 1, c) = out.cross(k, c) + g(k, c) * d[k];
    }
    out.gram.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) out.gram(i, j) = inner_product(gs[i], gs[j], model, 0.0);
    }
    return out;
  }
  const Eigen::MatrixXd r = node_covariance(model, grid);
  Eigen::MatrixXd dr(nodes, n);
  for (Eigen::Index k = 0; k < nodes; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) dr(k, j) = r(k, j + 1) - r(k, j);
  }
  out.cross = dr * g;
  out.cross.row(0).setZero();
  out.gram = g.transpose() * increment_covariance(r) * g;
  out.gram = 0.5 * (out.gram + out.gram.transpose()).eval();
  return out;
}

}  // namespace

OrthogonalBridge build_orthogonal(const ConditioningSet& cond, const CovarianceModel& model,
                                  const TimeGrid& grid) {
  if (!(cond.grid() == grid)) throw InvalidArgument("build_orthogonal: conditioning grid differs");
  CrossAndGram cg = cross_and_gram(cond.gs, model, grid);
  if (!gram_is_invertible(cg.gram)) {
    throw LinearDependence("conditioning functions are linearly dependent: <<g>>(0) is singular");
  }
  Eigen::MatrixXd inv = cg.gram.inverse();
  Eigen::MatrixXd w = cg.cross * inv;
  return OrthogonalBridge{cond, model, grid, std::move(cg.cross), std::move(cg.gram), std::move(inv),
                          std::move(w)};
}

Eigen::VectorXd functionals(const ConditioningSet& cond, const SamplePath& path) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(cond.size()));
  for (std::size_t i = 0; i < cond.size(); ++i) out[static_cast<Eigen::Index>(i)] = wiener_integral(cond.gs[i], path);
  return out;
}

SamplePath transform_path(const OrthogonalBridge& b, const SamplePath& path) {
  if (!(path.grid == b.grid)) throw InvalidArgument("transform_path: path grid differs");
  const Eigen::VectorXd r = functionals(b.cond, path) - b.cond.y;
  std::vector<double> v(path.values);
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] -= b.weights.row(static_cast<Eigen::Index>(k)).dot(r);
  }
  return SamplePath(path.grid, std::move(v));
}

double bridge_mean(const OrthogonalBridge& b, const MeanFunction& mean, double t) {
  const std::size_t k = b.grid.node_index(t);
  const SamplePath m(b.grid, mean.on(b.grid));
  const Eigen::VectorXd r = functionals(b.cond, m) - b.cond.y;
  return m.values[k] - b.weights.row(static_cast<Eigen::Index>(k)).dot(r);
}

double bridge_covariance(const OrthogonalBridge& b, double t, double s) {
  const auto k = static_cast<Eigen::Index>(b.grid.node_index(t));
  const auto l = static_cast<Eigen::Index>(b.grid.node_index(s));
  return covariance_at(b.model, b.grid[k], b.grid[l]) - b.weights.row(k).dot(b.cross.row(l));
}

SamplePath iterative_condition(const SamplePath& path,
                               const std::vector<std::pair<GridFunction, double>>& conds,
                               const CovarianceModel& model) {
  if (conds.empty()) return path;
  std::vector<GridFunction> gs;
  for (const auto& c : conds) {
    if (!(c.first.grid == path.grid)) throw InvalidArgument("iterative_condition: grid differs");
    gs.push_back(c.first);
  }
  CrossAndGram cg = cross_and_gram(gs, model, path.grid);
  Eigen::MatrixXd& cross = cg.cross;
  Eigen::MatrixXd& s = cg.gram;
  const Eigen::VectorXd scale = s.diagonal();
  std::vector<double> x(path.values);
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double pivot = s(r, r);
    if (!(pivot > 1e-12 * scale[r]) || !(pivot > 1e-300)) {
      throw DegenerateConditioning("iterative_condition: functional " + std::to_string(r + 1) +
                                   " has vanishing remaining variance");
    }
    const SamplePath current(path.grid, x);
    const double resid = wiener_integral(gs[static_cast<std::size_t>(r)], current) -
                         conds[static_cast<std::size_t>(r)].second;
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] -= cross(static_cast<Eigen::Index>(k), r) / pivot * resid;
    }
    const Eigen::VectorXd cr = cross.col(r);
    const Eigen::VectorXd sr = s.col(r);
    cross -= cr * sr.transpose() / pivot;
    s -= sr * sr.transpose() / pivot;
  }
  return SamplePath(path.grid, std::move(x));
}

double multibridge_covariance(const CovarianceModel& model, const std::vector<double>& pin_times,
                              double t, double s) {
  std::vector<double> pts(pin_times);
  pts.push_back(t);
  pts.push_back(s);
  const auto m = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd r(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) r(i, j) = covariance_at(model, pts[i], pts[j]);
  }
  const double scale = std::max(r.diagonal().maxCoeff(), 0.0);
  const auto pins = static_cast<Eigen::Index>(pin_times.size());
  for (Eigen::Index p = 0; p < pins; ++p) {
    const double pivot = r(p, p);
    if (!(pivot > 1e-300) || !(pivot > 1e-12 * scale)) {
      throw DegenerateConditioning("multibridge: pin at t = " + std::to_string(pts[p]) +
                                   " has vanishing conditional variance");
    }
    const Eigen::VectorXd col = r.col(p);
    r -= col * col.transpose() / pivot;
  }
  return r(m - 2, m - 1);
}

}  // namespace ggb
