#include "ggb/wiener.hpp"

#include <cmath>

#include "ggb/errors.hpp"

namespace ggb {

namespace {

constexpr double kDetFloor = 1e-300;
constexpr double kCondCeiling = 1e12;

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what) {
  if (!(a == b)) throw InvalidArgument(std::string(what) + ": grids differ");
}

}  // namespace

GridFunction::GridFunction(TimeGrid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw InvalidArgument("grid function has " + std::to_string(values.size()) +
                          " values for " + std::to_string(grid.size()) + " nodes");
  }
}

GridFunction GridFunction::sample(const TimeGrid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid[i]);
  return GridFunction(grid, std::move(v));
}

GridFunction GridFunction::constant(const TimeGrid& grid, double c) {
  return GridFunction(grid, std::vector<double>(grid.size(), c));
}

GridFunction GridFunction::preset(const TimeGrid& grid, const std::string& name, double u) {
  const double horizon = grid.horizon();
  if (name == "one") return constant(grid, 1.0);
  if (name == "avg") {
    return sample(grid, [horizon](double t) { return (horizon - t) / horizon; });
  }
  if (name == "ind") {
    if (!(u > 0.0 && u <= horizon)) throw InvalidArgument("preset ind needs u in (0, T]");
    const std::size_t k = grid.node_index(u);
    std::vector<double> v(grid.size(), 0.0);
    for (std::size_t i = 0; i < k; ++i) v[i] = 1.0;
    return GridFunction(grid, std::move(v));
  }
  throw InvalidArgument("unknown function preset '" + name + "'");
}

GridFunction scaled(const GridFunction& f, double c) {
  std::vector<double> v(f.values);
  for (double& x : v) x *= c;
  return GridFunction(f.grid, std::move(v));
}

ConditioningSet::ConditioningSet(std::vector<GridFunction> functions, Eigen::VectorXd targets)
    : gs(std::move(functions)), y(std::move(targets)) {
  if (gs.empty()) throw InvalidArgument("conditioning set needs at least one function");
  if (static_cast<std::size_t>(y.size()) != gs.size()) {
    throw InvalidArgument("conditioning set: y has " + std::to_string(y.size()) +
                          " entries for " + std::to_string(gs.size()) + " functions");
  }
  for (const auto& g : gs) require_same_grid(g.grid, gs.front().grid, "conditioning set");
}

Eigen::MatrixXd ConditioningSet::node_values() const {
  const auto n = static_cast<Eigen::Index>(grid().size());
  const auto m = static_cast<Eigen::Index>(gs.size());
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index k = 0; k < n; ++k) out(k, c) = gs[c].values[k];
  }
  return out;
}

std::vector<double> bracket_increments(const CovarianceModel& model, const TimeGrid& grid) {
  std::vector<double> d(grid.segments());
  double prev = model.bracket(grid[0]);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double next = model.bracket(grid[i + 1]);
    d[i] = next - prev;
    prev = next;
  }
  return d;
}

double inner_product(const GridFunction& f, const GridFunction& g, const CovarianceModel& model,
                     double from) {
  require_same_grid(f.grid, g.grid, "inner_product");
  const TimeGrid& grid = f.grid;
  const std::size_t k = grid.node_index(from);
  if (model.is_martingale_like()) {
    const std::vector<double> d = bracket_increments(model, grid);
    // Backward order, so gram_function's running sums reproduce this exactly.
    double s = 0.0;
    for (std::size_t i = d.size(); i-- > k;) s += f.values[i] * g.values[i] * d[i];
    return s;
  }
  if (k != 0) {
    throw Unsupported("inner_product from t > 0 is defined only for martingale models");
  }
  const Eigen::MatrixXd c = increment_covariance(node_covariance(model, grid));
  const auto n = static_cast<Eigen::Index>(grid.segments());
  const Eigen::Map<const Eigen::VectorXd> fv(f.values.data(), n);
  const Eigen::Map<const Eigen::VectorXd> gv(g.values.data(), n);
  return fv.dot(c * gv);
}

bool gram_is_invertible(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return false;
  if (!a.allFinite()) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0)) return false;
  if (!(hi / lo < kCondCeiling)) return false;
  return a.determinant() > kDetFloor;
}

GramFunction::GramFunction(TimeGrid grid, std::vector<Eigen::MatrixXd> mats)
    : grid_(std::move(grid)), mats_(std::move(mats)) {
  if (mats_.size() != grid_.size()) throw InvalidArgument("Gram function size mismatch");
  dets_.resize(mats_.size());
  inverses_.resize(mats_.size());
  for (std::size_t k = 0; k < mats_.size(); ++k) {
    dets_[k] = mats_[k].determinant();
    if (gram_is_invertible(mats_[k])) inverses_[k] = mats_[k].inverse();
  }
}

const Eigen::MatrixXd& GramFunction::inverse(std::size_t k) const {
  const auto& inv = inverses_.at(k);
  if (!inv) {
    throw DegenerateConditioning("Gram matrix is degenerate at t = " + std::to_string(grid_[k]));
  }
  return *inv;
}

std::optional<std::size_t> GramFunction::last_nondegenerate_at_or_before(double t) const {
  for (std::size_t k = grid_.floor_node(t) + 1; k-- > 0;) {
    if (inverses_[k]) return k;
  }
  return std::nullopt;
}

GramFunction gram_function(const ConditioningSet& cond, const CovarianceModel& model) {
  if (!model.is_martingale_like()) {
    throw Unsupported("gram_function requires a martingale model");
  }
  const TimeGrid& grid = cond.grid();
  const std::vector<double> d = bracket_increments(model, grid);
  const auto m = static_cast<Eigen::Index>(cond.size());
  std::vector<Eigen::MatrixXd> mats(grid.size(), Eigen::MatrixXd::Zero(m, m));
  for (std::size_t k = d.size(); k-- > 0;) {
    Eigen::MatrixXd& a = mats[k];
    const Eigen::MatrixXd& next = mats[k + 1];
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        a(i, j) = next(i, j) + cond.gs[i].values[k] * cond.gs[j].values[k] * d[k];
      }
    }
  }
  GramFunction gram(grid, std::move(mats));
  if (!gram.nondegenerate(0)) {
    throw LinearDependence("conditioning functions are linearly dependent: <<g>>(0) is singular");
  }
  return gram;
}

double wiener_integral(const GridFunction& f, const SamplePath& path) {
  return wiener_integral_until(f, path, path.values.size() - 1);
}

double wiener_integral_until(const GridFunction& f, const SamplePath& path, std::size_t k) {
  require_same_grid(f.grid, path.grid, "wiener_integral");
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += f.values[i] * (path.values[i + 1] - path.values[i]);
  return s;
}

}  // namespace ggb
