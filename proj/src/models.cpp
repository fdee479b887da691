#include "ggb/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ggb/errors.hpp"

namespace ggb {

namespace {

double interpolate_uniform(const std::vector<double>& v, double horizon, double t) {
  const std::size_t n = v.size() - 1;
  const double x = t / horizon * static_cast<double>(n);
  if (x <= 0.0) return v.front();
  if (x >= static_cast<double>(n)) return v.back();
  const auto i = static_cast<std::size_t>(x);
  const double w = x - static_cast<double>(i);
  if (w == 0.0) return v[i];
  return v[i] + w * (v[i + 1] - v[i]);
}

void check_horizon(double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("model horizon T must be positive");
  }
}

}  // namespace

CovarianceModel CovarianceModel::brownian(double horizon) {
  check_horizon(horizon);
  CovarianceModel m;
  m.kind_ = ModelKind::martingale;
  m.horizon_ = horizon;
  m.unit_bracket_ = true;
  return m;
}

CovarianceModel CovarianceModel::martingale(double horizon, std::function<double(double)> bracket) {
  check_horizon(horizon);
  if (!bracket) throw InvalidArgument("martingale model needs a bracket function");
  if (bracket(0.0) != 0.0) throw InvalidArgument("bracket must vanish at t = 0");
  CovarianceModel m;
  m.kind_ = ModelKind::martingale;
  m.horizon_ = horizon;
  m.bracket_ = std::move(bracket);
  return m;
}

CovarianceModel CovarianceModel::martingale_from_values(double horizon, std::vector<double> values) {
  check_horizon(horizon);
  if (values.size() < 2) throw InvalidArgument("bracket_values needs at least two entries");
  if (values.front() != 0.0) throw InvalidArgument("bracket_values[0] must be 0");
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (!(values[i] < values[i + 1])) {
      throw InvalidArgument("bracket_values must be strictly increasing (index " +
                            std::to_string(i + 1) + ")");
    }
  }
  return martingale(horizon, [v = std::move(values), horizon](double t) {
    return interpolate_uniform(v, horizon, t);
  });
}

CovarianceModel CovarianceModel::fbm(double horizon, double hurst) {
  check_horizon(horizon);
  if (!(hurst > 0.0 && hurst < 1.0)) throw InvalidArgument("hurst must lie in (0, 1)");
  CovarianceModel m;
  m.kind_ = ModelKind::fbm;
  m.horizon_ = horizon;
  m.hurst_ = hurst;
  return m;
}

CovarianceModel CovarianceModel::generic(double horizon, std::function<double(double, double)> cov) {
  check_horizon(horizon);
  if (!cov) throw InvalidArgument("generic model needs a covariance function");
  CovarianceModel m;
  m.kind_ = ModelKind::generic;
  m.horizon_ = horizon;
  m.cov_ = std::move(cov);
  return m;
}

CovarianceModel CovarianceModel::generic_from_matrix(double horizon, const Eigen::MatrixXd& cov) {
  check_horizon(horizon);
  if (cov.rows() < 1 || cov.rows() != cov.cols()) {
    throw InvalidArgument("cov_matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("cov_matrix must be symmetric");
  }
  // Normalize to the (n+1)-node form with a zero row and column for node 0.
  Eigen::MatrixXd full;
  if (cov.rows() >= 2 && cov(0, 0) == 0.0 && cov.row(0).cwiseAbs().maxCoeff() == 0.0) {
    full = cov;
  } else {
    const Eigen::Index n = cov.rows();
    full = Eigen::MatrixXd::Zero(n + 1, n + 1);
    full.bottomRightCorner(n, n) = cov;
  }
  const auto segments = static_cast<double>(full.rows() - 1);
  auto lookup = [full, horizon, segments](double t, double s) {
    auto index = [&](double u) {
      const double x = u / horizon * segments;
      const double r = std::round(x);
      if (std::abs(x - r) > 1e-9 * std::max(1.0, segments)) {
        throw InvalidArgument("time " + std::to_string(u) + " is not a node of the cov_matrix grid");
      }
      return static_cast<Eigen::Index>(r);
    };
    return full(index(t), index(s));
  };
  return generic(horizon, lookup);
}

bool CovarianceModel::is_martingale_like() const noexcept {
  return kind_ == ModelKind::martingale || (kind_ == ModelKind::fbm && hurst_ == 0.5);
}

double CovarianceModel::bracket(double t) const {
  if (kind_ == ModelKind::martingale) return unit_bracket_ ? t : bracket_(t);
  if (kind_ == ModelKind::fbm && hurst_ == 0.5) return t;
  throw Unsupported("bracket is defined only for martingale models");
}

double CovarianceModel::covariance(double t, double s) const {
  switch (kind_) {
    case ModelKind::martingale:
      return bracket(std::min(t, s));
    case ModelKind::fbm: {
      if (hurst_ == 0.5) return std::min(t, s);
      const double h2 = 2.0 * hurst_;
      return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
    }
    case ModelKind::generic:
      return cov_(t, s);
  }
  return 0.0;
}

double covariance_at(const CovarianceModel& model, double t, double s) {
  const double tol = 1e-12 * model.horizon();
  if (t < 0.0 || s < 0.0 || t > model.horizon() + tol || s > model.horizon() + tol) {
    throw InvalidArgument("covariance_at: times must lie in [0, T]");
  }
  return model.covariance(std::min(t, model.horizon()), std::min(s, model.horizon()));
}

Eigen::MatrixXd node_covariance(const CovarianceModel& model, const TimeGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      r(i, j) = covariance_at(model, grid[i], grid[j]);
      r(j, i) = r(i, j);
    }
  }
  return r;
}

Eigen::MatrixXd increment_covariance(const Eigen::MatrixXd& r) {
  const Eigen::Index n = r.rows() - 1;
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      c(i, j) = r(i + 1, j + 1) - r(i + 1, j) - r(i, j + 1) + r(i, j);
      c(j, i) = c(i, j);
    }
  }
  return c;
}

MeanFunction::MeanFunction(TimeGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw InvalidArgument("mean_values length does not match its grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("mean_values must be finite");
  }
  zero_ = std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

MeanFunction MeanFunction::zero(const TimeGrid& grid) {
  return MeanFunction(grid, std::vector<double>(grid.size(), 0.0));
}

double MeanFunction::at(double t) const {
  if (zero_) return 0.0;
  const auto times = grid_.times();
  if (t <= times.front()) return values_.front();
  if (t >= times.back()) return values_.back();
  if (auto k = grid_.find_node(t)) return values_[*k];
  const std::size_t i = grid_.floor_node(t);
  const double w = (t - times[i]) / (times[i + 1] - times[i]);
  return values_[i] + w * (values_[i + 1] - values_[i]);
}

std::vector<double> MeanFunction::on(const TimeGrid& grid) const {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(grid[i]);
  return out;
}

Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& a, double* jitter_used) {
  const Eigen::Index n = a.rows();
  const double scale = a.trace() / static_cast<double>(n);
  Eigen::Index failed = 0;
  for (int attempt = 0; attempt <= 4; ++attempt) {
    const double jitter = attempt == 0 ? 0.0 : 1e-12 * std::pow(10.0, attempt - 1) * scale;
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    bool ok = true;
    for (Eigen::Index j = 0; j < n && ok; ++j) {
      double d = a(j, j) + jitter - l.row(j).head(j).squaredNorm();
      if (!(d > 0.0) || !std::isfinite(d)) {
        ok = false;
        failed = j + 1;
        break;
      }
      d = std::sqrt(d);
      l(j, j) = d;
      for (Eigen::Index i = j + 1; i < n; ++i) {
        l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / d;
      }
    }
    if (ok) {
      if (jitter_used) *jitter_used = jitter;
      return l;
    }
  }
  throw FactorizationFailure("covariance factorization failed at leading minor " +
                                 std::to_string(failed) + " after maximal jitter",
                             static_cast<std::size_t>(failed));
}

PathSampler::PathSampler(const CovarianceModel& model, const MeanFunction& mean, const TimeGrid& grid)
    : grid_(grid), mean_(mean.on(grid)) {
  if (std::abs(grid.horizon() - model.horizon()) > 1e-12 * model.horizon()) {
    throw InvalidArgument("grid horizon does not match model horizon");
  }
  const std::size_t n = grid.segments();
  if (model.is_martingale_like()) {
    increment_mode_ = true;
    step_sd_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = model.bracket(grid[i + 1]) - model.bracket(grid[i]);
      if (!(d > 0.0)) {
        throw InvalidArgument("bracket must be strictly increasing on the grid");
      }
      step_sd_[i] = std::sqrt(d);
    }
    return;
  }
  const Eigen::MatrixXd r = node_covariance(model, grid);
  const auto m = static_cast<Eigen::Index>(n);
  chol_ = jittered_cholesky(r.bottomRightCorner(m, m), &jitter_);
}

std::vector<double> PathSampler::sample_increments(SeedSpec seed) const {
  const std::size_t n = grid_.segments();
  NormalStream rng(seed);
  std::vector<double> z(n);
  rng.fill(z);
  std::vector<double> out(n);
  if (increment_mode_) {
    for (std::size_t i = 0; i < n; ++i) out[i] = step_sd_[i] * z[i];
    return out;
  }
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = 0.0;
    for (std::size_t j = 0; j <= i; ++j) x += chol_(i, j) * z[j];
    out[i] = x - prev;
    prev = x;
  }
  return out;
}

SamplePath PathSampler::sample(SeedSpec seed) const {
  const std::size_t n = grid_.segments();
  NormalStream rng(seed);
  std::vector<double> z(n);
  rng.fill(z);
  std::vector<double> v(n + 1);
  v[0] = 0.0;
  if (increment_mode_) {
    for (std::size_t i = 0; i < n; ++i) v[i + 1] = v[i] + step_sd_[i] * z[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double x = 0.0;
      for (std::size_t j = 0; j <= i; ++j) x += chol_(i, j) * z[j];
      v[i + 1] = x;
    }
  }
  for (std::size_t i = 0; i <= n; ++i) v[i] += mean_[i];
  return SamplePath(grid_, std::move(v));
}

SamplePath sample_path(const CovarianceModel& model, const MeanFunction& mean,
                       const TimeGrid& grid, SeedSpec seed) {
  return PathSampler(model, mean, grid).sample(seed);
}

}  // namespace ggb
