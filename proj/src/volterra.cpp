#include "ggb/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ggb/errors.hpp"

namespace ggb {

double gamma_fn(double x) {
  static constexpr double kCoef[9] = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (!(x > 0.0)) throw InvalidArgument("gamma_fn is implemented for x > 0");
  if (x < 0.5) return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_fn(1.0 - x));
  x -= 1.0;
  double a = kCoef[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += kCoef[i] / (x + i);
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

double fbm_constant(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw InvalidArgument("hurst must lie in (0, 1)");
  if (hurst == 0.5) return 1.0;
  return std::sqrt(2.0 * hurst * gamma_fn(hurst + 0.5) * gamma_fn(1.5 - hurst) /
                   gamma_fn(2.0 - 2.0 * hurst));
}

FractionalOps::FractionalOps(double hurst, TimeGrid grid)
    : hurst_(hurst), c_h_(fbm_constant(hurst)), grid_(std::move(grid)) {
  const std::size_t n = grid_.segments();
  const double beta = 1.5 - hurst_;
  pbar_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pbar_[i] = (std::pow(grid_[i + 1], beta) - std::pow(grid_[i], beta)) / (beta * grid_.dt(i));
  }
  if (grid_.is_uniform() && !is_identity()) {
    const double g = hurst_ + 0.5;
    const double scale = std::pow(grid_.dt(0), g) / gamma_fn(g + 1.0);
    w_fwd_.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
      const auto x = static_cast<double>(m);
      w_fwd_[m] = scale * (std::pow(x + 1.0, g) - std::pow(x, g));
    }
  }
}

double FractionalOps::weight(std::size_t i, std::size_t j) const {
  // Integral of (u - t_i)^{H-1/2} / Gamma(H + 1/2) over cell j >= i.
  if (!w_fwd_.empty()) return w_fwd_[j - i];
  const double g = hurst_ + 0.5;
  const double a = grid_[j] - grid_[i];
  const double b = grid_[j + 1] - grid_[i];
  return (std::pow(b, g) - std::pow(a, g)) / gamma_fn(g + 1.0);
}

const FractionalOps::RowMatrix& FractionalOps::cells() const {
  if (!cells_) {
    const std::size_t n = grid_.segments();
    const auto ni = static_cast<Eigen::Index>(n);
    auto c = std::make_shared<RowMatrix>(RowMatrix::Zero(ni, ni));
    for (std::size_t i = 0; i < n; ++i) {
      const double row = c_h_ * pbar_[i] / grid_.dt(i);
      for (std::size_t j = i; j < n; ++j) {
        const double w = weight(i, j) - (j > i ? weight(i + 1, j) : 0.0);
        (*c)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row * w / pbar_[j];
      }
    }
    cells_ = std::move(c);
  }
  return *cells_;
}

void FractionalOps::back_substitute(const std::vector<double>& f, std::size_t k, double* x) const {
  const RowMatrix& c = cells();
  for (std::size_t i = k; i-- > 0;) {
    const double* row = c.data() + i * static_cast<std::size_t>(c.cols());
    double s = f[i];
    for (std::size_t j = i + 1; j < k; ++j) s -= row[j] * x[j];
    x[i] = s / row[i];
  }
}

GridFunction FractionalOps::apply_K(const GridFunction& f) const {
  if (!(f.grid == grid_)) throw InvalidArgument("apply_K: grid differs");
  const std::size_t n = grid_.segments();
  if (is_identity()) return f;
  std::vector<double> h(n);
  for (std::size_t j = 0; j < n; ++j) h[j] = f.values[j] / pbar_[j];
  std::vector<double> big_j(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = i; j < n; ++j) s += h[j] * weight(i, j);
    big_j[i] = s;
  }
  std::vector<double> out(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = c_h_ * pbar_[i] * (big_j[i] - big_j[i + 1]) / grid_.dt(i);
  }
  out[n] = out[n - 1];
  return GridFunction(grid_, std::move(out));
}

GridFunction FractionalOps::apply_K_inv(const GridFunction& f) const {
  if (!(f.grid == grid_)) throw InvalidArgument("apply_K_inv: grid differs");
  if (is_identity()) return f;
  const std::size_t n = grid_.segments();
  std::vector<double> out(n + 1);
  back_substitute(f.values, n, out.data());
  out[n] = out[n - 1];
  return GridFunction(grid_, std::move(out));
}

Eigen::MatrixXd FractionalOps::truncated_K(const std::vector<double>& f) const {
  const std::size_t n = grid_.segments();
  if (f.size() < n) throw InvalidArgument("fractional operator: input length mismatch");
  const auto rows = static_cast<Eigen::Index>(n + 1);
  const auto cols = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  if (is_identity()) {
    for (Eigen::Index k = 1; k < rows; ++k) {
      for (Eigen::Index i = 0; i < k; ++i) out(k, i) = f[static_cast<std::size_t>(i)];
    }
    return out;
  }
  // jm(k, i): order H + 1/2 integral at t_i of f / pbar restricted to [0, t_k).
  Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(rows, rows);
  for (std::size_t i = 0; i < n; ++i) {
    double running = 0.0;
    for (std::size_t k = i + 1; k <= n; ++k) {
      running += f[k - 1] / pbar_[k - 1] * weight(i, k - 1);
      jm(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = running;
    }
  }
  for (Eigen::Index k = 1; k < rows; ++k) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      out(k, i) = c_h_ * pbar_[iu] * (jm(k, i) - jm(k, i + 1)) / grid_.dt(iu);
    }
  }
  return out;
}

Eigen::MatrixXd FractionalOps::truncated_K_inv(const std::vector<double>& f) const {
  const std::size_t n = grid_.segments();
  if (f.size() < n) throw InvalidArgument("fractional operator: input length mismatch");
  const auto rows = static_cast<Eigen::Index>(n + 1);
  const auto cols = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  if (is_identity()) {
    for (Eigen::Index k = 1; k < rows; ++k) {
      for (Eigen::Index i = 0; i < k; ++i) out(k, i) = f[static_cast<std::size_t>(i)];
    }
    return out;
  }
  // The leading block of the cell matrix is K on [0, t_k), so each row is
  // one back substitution.
  std::vector<double> x(n);
  for (std::size_t k = 1; k <= n; ++k) {
    back_substitute(f, k, x.data());
    for (std::size_t i = 0; i < k; ++i) out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = x[i];
  }
  return out;
}

const Eigen::MatrixXd& FractionalOps::kernel() const {
  if (!kernel_) {
    kernel_ = std::make_shared<const Eigen::MatrixXd>(
        truncated_K(std::vector<double>(grid_.segments(), 1.0)));
  }
  return *kernel_;
}

GridFunction apply_K(const GridFunction& f, const FractionalOps& ops) { return ops.apply_K(f); }

GridFunction apply_K_inv(const GridFunction& f, const FractionalOps& ops) {
  return ops.apply_K_inv(f);
}

double kernel_covariance(const FractionalOps& ops, double t, double s) {
  const TimeGrid& grid = ops.grid();
  const auto k = static_cast<Eigen::Index>(grid.node_index(t));
  const auto l = static_cast<Eigen::Index>(grid.node_index(s));
  const Eigen::MatrixXd& kern = ops.kernel();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < kern.cols(); ++i) {
    sum += kern(k, i) * kern(l, i) * grid.dt(static_cast<std::size_t>(i));
  }
  return sum;
}

VolterraBridge::VolterraBridge(const ConditioningSet& cond, const FractionalOps& ops, double epsilon)
    : grid_(ops.grid()) {
  if (!(cond.grid() == grid_)) throw InvalidArgument("volterra bridge: conditioning grid differs");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (epsilon > grid_.horizon() * (1.0 + 1e-12)) throw InvalidArgument("epsilon must not exceed T");
  const CovarianceModel bm = CovarianceModel::brownian(grid_.horizon());
  const std::size_t n = grid_.segments();
  const auto m = static_cast<Eigen::Index>(cond.size());

  for (const auto& g : cond.gs) gt_.push_back(ops.apply_K(g));
  const ConditioningSet cw(gt_, Eigen::VectorXd::Zero(m));
  std::unique_ptr<GramFunction> gram_w;
  try {
    gram_w = std::make_unique<GramFunction>(gram_function(cw, bm));
  } catch (const LinearDependence& e) {
    throw DegenerateConditioning(std::string("Brownian-side Gram is degenerate: ") + e.what());
  }
  gram_w0_ = gram_w->at(0);

  if (ops.is_identity()) {
    identity_ = true;
    brownian_ = std::make_unique<CanonicalBridge>(cond, bm, epsilon);
    switch_node_ = brownian_->switch_node();
    return;
  }

  const auto last = gram_w->last_nondegenerate_at_or_before(grid_.horizon() - epsilon);
  // Completion conditions on K prefix nodes plus N functionals, which must
  // stay linearly independent among the n free node values.
  switch_node_ = std::min(*last, n >= cond.size() ? n - cond.size() : std::size_t{0});
  const std::size_t kk = switch_node_;
  const auto kr = static_cast<Eigen::Index>(kk);
  const auto nc = static_cast<Eigen::Index>(n);

  // Z_m = sum_{i<=m} q(m, i) dV_i realizes the inner integral
  // int_0^u K^{-1}[l*(u, .)](s) dV_s on cell m.
  q_ = Eigen::MatrixXd::Zero(kr, nc);
  const Eigen::MatrixXd gtv = cw.node_values();
  for (Eigen::Index c = 0; c < m; ++c) {
    std::vector<double> bc(n, 0.0);
    for (std::size_t i = 0; i < kk; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      bc[i] = (gram_w->inverse(i) * gtv.row(r).transpose())[c];
    }
    const Eigen::MatrixXd tc = ops.truncated_K_inv(bc);
    for (Eigen::Index row = 0; row < kr; ++row) {
      q_.row(row) += gtv(row, c) * tc.row(row + 1);
    }
  }
  kernel_ = ops.kernel().topRows(kr + 1);

  const CovarianceModel fbm = CovarianceModel::fbm(grid_.horizon(), ops.hurst());
  const OrthogonalBridge ortho = build_orthogonal(cond, fbm, grid_);
  g_fbm_ = cond.node_values();
  shift_.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    shift_[k] = ortho.weights.row(static_cast<Eigen::Index>(k)).dot(cond.y);
  }

  const Eigen::MatrixXd r = node_covariance(fbm, grid_);
  const Eigen::Index dim = kr + m;
  Eigen::MatrixXd cc(dim, dim);
  cc.topLeftCorner(kr, kr) = r.block(1, 1, kr, kr);
  cc.topRightCorner(kr, m) = ortho.cross.middleRows(1, kr);
  cc.bottomLeftCorner(m, kr) = ortho.cross.middleRows(1, kr).transpose();
  cc.bottomRightCorner(m, m) = ortho.gram0;
  const Eigen::Index ns = nc - kr;
  Eigen::MatrixXd rhs(dim, ns);
  for (Eigen::Index s = 0; s < ns; ++s) {
    const Eigen::Index node = kr + 1 + s;
    rhs.col(s).head(kr) = r.col(node).segment(1, kr);
    rhs.col(s).tail(m) = ortho.cross.row(node).transpose();
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cc);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw DegenerateConditioning("volterra completion: prefix and functionals are degenerate");
  }
  suffix_weights_ = ldlt.solve(rhs).transpose();
}

SamplePath VolterraBridge::transform(const SamplePath& path) const {
  if (!(path.grid == grid_)) throw InvalidArgument("volterra bridge: path grid differs");
  if (identity_) return brownian_->apply(increments(path));
  const std::size_t n = grid_.segments();
  const std::size_t kk = switch_node_;
  const auto kr = static_cast<Eigen::Index>(kk);
  const std::vector<double> dv = increments(path);
  const Eigen::Map<const Eigen::VectorXd> dvv(dv.data(), static_cast<Eigen::Index>(n));

  Eigen::VectorXd zd(kr);
  for (Eigen::Index mrow = 0; mrow < kr; ++mrow) {
    zd[mrow] = q_.row(mrow).head(mrow + 1).dot(dvv.head(mrow + 1)) *
               grid_.dt(static_cast<std::size_t>(mrow));
  }
  std::vector<double> out(n + 1, 0.0);
  for (Eigen::Index k = 1; k <= kr; ++k) {
    out[static_cast<std::size_t>(k)] =
        path.values[static_cast<std::size_t>(k)] - kernel_.row(k).head(k).dot(zd.head(k));
  }

  const auto m = g_fbm_.cols();
  Eigen::VectorXd resid(kr + m);
  for (Eigen::Index k = 0; k < kr; ++k) {
    const auto ku = static_cast<std::size_t>(k + 1);
    resid[k] = path.values[ku] - out[ku];
  }
  resid.tail(m) = g_fbm_.topRows(static_cast<Eigen::Index>(n)).transpose() * dvv;
  for (Eigen::Index s = 0; s < suffix_weights_.rows(); ++s) {
    const auto node = static_cast<std::size_t>(kr + 1 + s);
    out[node] = path.values[node] - suffix_weights_.row(s).dot(resid);
  }
  for (std::size_t k = 0; k <= n; ++k) out[k] += shift_[k];
  return SamplePath(grid_, std::move(out));
}

SamplePath volterra_bridge_transform(const SamplePath& path, const ConditioningSet& cond,
                                     const FractionalOps& ops, double epsilon) {
  return VolterraBridge(cond, ops, epsilon).transform(path);
}

}  // namespace ggb
