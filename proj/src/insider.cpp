#include "ggb/insider.hpp"

#include <cmath>
#include <string>

#include "ggb/errors.hpp"
#include "ggb/harness.hpp"

namespace ggb {

namespace {

Eigen::VectorXd prefix_functionals(const ConditioningSet& cond, const SamplePath& prefix,
                                   std::size_t k) {
  if (prefix.values.size() < k + 1) throw InvalidArgument("path prefix is shorter than t");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cond.size()));
  for (std::size_t j = 0; j < k; ++j) {
    const double dm = prefix.values[j + 1] - prefix.values[j];
    for (std::size_t c = 0; c < cond.size(); ++c) {
      out[static_cast<Eigen::Index>(c)] += cond.gs[c].values[j] * dm;
    }
  }
  return out;
}

// <<g>>(t) at any time, exact for the step integrand: inside a cell the
// remaining Gram is affine in the bracket.
Eigen::MatrixXd gram_at_time(const GramFunction& gram, const CovarianceModel& model, double t) {
  const TimeGrid& grid = gram.grid();
  const std::size_t k = grid.floor_node(t);
  if (k == grid.segments() || grid.find_node(t)) return gram.at(k);
  const double lo = model.bracket(grid[k]);
  const double hi = model.bracket(grid[k + 1]);
  const double w = (hi - model.bracket(t)) / (hi - lo);
  return gram.at(k + 1) + w * (gram.at(k) - gram.at(k + 1));
}

}  // namespace

MarketSpec::MarketSpec(CovarianceModel m, GridFunction rate, ConditioningSet c, double eps)
    : model(std::move(m)), a(std::move(rate)), cond(std::move(c)), epsilon(eps) {
  if (!model.is_martingale_like()) throw Unsupported("market model must be a martingale");
  if (!(a.grid == cond.grid())) throw InvalidArgument("mean rate a and conditioning grids differ");
  const double horizon = cond.grid().horizon();
  if (!(epsilon > 0.0) || epsilon > horizon * (1.0 + 1e-12)) {
    throw InvalidArgument("epsilon must lie in (0, T]");
  }
  for (double v : a.values) {
    if (!std::isfinite(v)) throw InvalidArgument("mean rate a must be finite");
  }
}

Eigen::VectorXd MarketSpec::y_prime() const {
  Eigen::VectorXd yp = cond.y;
  for (std::size_t c = 0; c < cond.size(); ++c) {
    yp[static_cast<Eigen::Index>(c)] -= inner_product(a, cond.gs[c], model, 0.0);
  }
  return yp;
}

std::size_t MarketSpec::trading_end() const {
  return grid().floor_node(grid().horizon() - epsilon);
}

double insider_drift(const MarketSpec& spec, double t, const SamplePath& m_path_prefix) {
  const std::size_t k = spec.grid().node_index(t);
  if (k > spec.trading_end()) throw InvalidArgument("insider_drift requires t <= T - epsilon");
  const GramFunction gram = gram_function(spec.cond, spec.model);
  const Eigen::VectorXd g = spec.cond.node_values().row(static_cast<Eigen::Index>(k)).transpose();
  const Eigen::VectorXd rest = spec.y_prime() - prefix_functionals(spec.cond, m_path_prefix, k);
  return g.dot(gram.inverse(k) * rest);
}

double optimal_portfolio(const MarketSpec& spec, Trader who, double t,
                         const SamplePath& m_path_prefix) {
  const std::size_t k = spec.grid().node_index(t);
  if (k > spec.trading_end()) throw InvalidArgument("optimal_portfolio requires t <= T - epsilon");
  const double base = spec.a.values[k];
  if (who == Trader::ordinary) return base;
  return base + insider_drift(spec, t, m_path_prefix);
}

double log_wealth(const MarketSpec& spec, const std::vector<double>& pi, const SamplePath& m_path,
                  double v0) {
  if (!(v0 > 0.0)) throw InvalidArgument("initial wealth v0 must be positive");
  if (!(m_path.grid == spec.grid())) throw InvalidArgument("log_wealth: path grid differs");
  const std::size_t end = spec.trading_end();
  if (pi.size() < end) throw InvalidArgument("portfolio is shorter than the trading window");
  const std::vector<double> dm = bracket_increments(spec.model, spec.grid());
  CompensatedSum s;
  for (std::size_t k = 0; k < end; ++k) {
    s.add(pi[k] * (m_path.values[k + 1] - m_path.values[k]));
    s.add(0.5 * pi[k] * (2.0 * spec.a.values[k] - pi[k]) * dm[k]);
  }
  return std::log(v0) + s.value();
}

double insider_delta(const MarketSpec& spec) {
  const GramFunction gram = gram_function(spec.cond, spec.model);
  const double t_end = spec.grid().horizon() - spec.epsilon;
  if (t_end <= 0.0) return 0.0;
  const Eigen::MatrixXd a_end = gram_at_time(gram, spec.model, t_end);
  if (!gram_is_invertible(a_end)) {
    throw DegenerateConditioning("Gram matrix is degenerate at T - epsilon = " + std::to_string(t_end));
  }
  const Eigen::MatrixXd d = a_end.inverse() - gram.inverse(0);
  const Eigen::VectorXd yp = spec.y_prime();
  const double quad = yp.dot(d * yp);
  const double trace = (d * gram.at(0)).trace();
  const double logdet = std::log(a_end.determinant() / gram.det(0));
  return 0.5 * quad + 0.5 * trace + 0.5 * logdet;
}

double bs_example_delta(double mu, double sigma, double horizon, double epsilon) {
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (!(horizon > 0.0)) throw InvalidArgument("T must be positive");
  if (!(epsilon > 0.0) || epsilon > horizon) throw InvalidArgument("epsilon must lie in (0, T]");
  const double x = horizon / epsilon;
  const double r = mu / sigma;
  const double t = horizon;
  return 0.5 * r * r * (3.0 * t * x * x * x - 6.0 * t * x * x + 4.0 * t * x - t) +
         2.0 * x * x * x - 3.0 * x * x + 2.0 * x - 2.0 * std::log(x) - 1.0;
}

UtilityGap mc_utility_gap(const MarketSpec& spec, std::size_t paths, std::uint64_t seed,
                          unsigned workers) {
  if (paths < 2) throw InvalidArgument("mc_utility_gap needs at least two paths");
  const GramFunction gram = gram_function(spec.cond, spec.model);
  const TimeGrid& grid = spec.grid();
  const std::size_t n = grid.segments();
  const std::size_t end = spec.trading_end();
  const std::vector<double> dm = bracket_increments(spec.model, grid);
  const Eigen::MatrixXd g = spec.cond.node_values();
  const auto m = g.cols();
  Eigen::MatrixXd b(static_cast<Eigen::Index>(end), m);
  for (std::size_t k = 0; k < end; ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    b.row(r) = (gram.inverse(k) * g.row(r).transpose()).transpose();
  }
  const Eigen::MatrixXd chol0 = gram.at(0).llt().matrixL();

  std::vector<double> gaps(paths);
  parallel_for(
      paths,
      [&](std::size_t i) {
        NormalStream rng(SeedSpec{seed, i});
        Eigen::VectorXd xi(m);
        for (Eigen::Index c = 0; c < m; ++c) xi[c] = rng.next();
        const Eigen::VectorXd yp = chol0 * xi;
        std::vector<double> v(n + 1, 0.0);
        std::vector<double> pi_ord(spec.a.values.begin(), spec.a.values.begin() + end);
        std::vector<double> pi_ins(pi_ord);
        Eigen::VectorXd gk = Eigen::VectorXd::Zero(m);
        for (std::size_t k = 0; k < n; ++k) {
          const double z = rng.next();
          double step = std::sqrt(dm[k]) * z;
          if (k < end) {
            const auto r = static_cast<Eigen::Index>(k);
            const double drift = b.row(r).dot(yp - gk);
            pi_ins[k] += drift;
            step += drift * dm[k];
            gk += g.row(r).transpose() * step;
          }
          v[k + 1] = v[k] + step;
        }
        const SamplePath mp(grid, std::move(v));
        gaps[i] = log_wealth(spec, pi_ins, mp, 1.0) - log_wealth(spec, pi_ord, mp, 1.0);
      },
      workers);
  const auto [mean, se] = mean_and_se(gaps);
  return UtilityGap{mean, se, paths};
}

}  // namespace ggb
