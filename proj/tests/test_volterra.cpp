#include "doctest.h"

#include <cmath>
#include <numbers>

#include "ggb/canonical.hpp"
#include "ggb/errors.hpp"
#include "ggb/harness.hpp"
#include "ggb/orthogonal.hpp"
#include "ggb/volterra.hpp"

using namespace ggb;

namespace {

ConditioningSet presets(const TimeGrid& g, std::initializer_list<const char*> names, double y = 0.0) {
  std::vector<GridFunction> gs;
  for (const char* n : names) gs.push_back(GridFunction::preset(g, n));
  return ConditioningSet(gs, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(gs.size()), y));
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t lo, std::size_t hi) {
  double w = 0.0;
  for (std::size_t i = lo; i < hi; ++i) w = std::max(w, std::abs(a[i] - b[i]));
  return w;
}

}  // namespace

TEST_CASE("gamma function") {
  for (double x : {0.1, 0.25, 0.5, 0.75, 1.0, 1.3, 1.5, 2.0, 2.5, 2.99, 3.0}) {
    CHECK(std::abs(gamma_fn(x) / std::tgamma(x) - 1.0) < 1e-10);
  }
  CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
  CHECK_THROWS_AS(gamma_fn(0.0), InvalidArgument);
}

TEST_CASE("normalizing constant") {
  CHECK(fbm_constant(0.5) == 1.0);
  for (double h : {0.1, 0.3, 0.75, 0.9}) {
    const double oracle = std::sqrt(2 * h * std::tgamma(h + 0.5) * std::tgamma(1.5 - h) / std::tgamma(2 - 2 * h));
    CHECK(fbm_constant(h) == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("H = 1/2 operators are the identity") {
  const TimeGrid g = make_uniform_grid(1.0, 64);
  const FractionalOps ops(0.5, g);
  const GridFunction f = GridFunction::sample(g, [](double t) { return std::cos(3 * t) + t; });
  CHECK(apply_K(f, ops).values == f.values);
  CHECK(apply_K_inv(f, ops).values == f.values);
  const Eigen::MatrixXd k = ops.kernel();
  for (int r = 0; r <= 64; ++r) {
    for (int c = 0; c < 64; ++c) CHECK(k(r, c) == (c < r ? 1.0 : 0.0));
  }
}

TEST_CASE("fractional operators are linear") {
  const TimeGrid g = make_uniform_grid(1.0, 128);
  for (double h : {0.3, 0.75}) {
    const FractionalOps ops(h, g);
    const GridFunction f = GridFunction::sample(g, [](double t) { return 1 + t * t; });
    const GridFunction q = GridFunction::sample(g, [](double t) { return std::sin(5 * t); });
    std::vector<double> mix(g.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.5 * f.values[i] - 1.5 * q.values[i];
    const GridFunction lhs = ops.apply_K(GridFunction(g, mix));
    const GridFunction kf = ops.apply_K(f);
    const GridFunction kq = ops.apply_K(q);
    for (std::size_t i = 0; i < mix.size(); ++i) {
      CHECK(std::abs(lhs.values[i] - (2.5 * kf.values[i] - 1.5 * kq.values[i])) < 1e-12);
    }
  }
}

TEST_CASE("K applied to the constant is the terminal kernel") {
  const TimeGrid g = make_uniform_grid(1.0, 1024);
  const FractionalOps ops(0.75, g);
  const GridFunction k = ops.apply_K(GridFunction::preset(g, "one"));
  const Eigen::MatrixXd& kern = ops.kernel();
  double sq = 0.0;
  for (int i = 0; i < 1024; ++i) {
    CHECK(k.values[i] == doctest::Approx(kern(1024, i)).epsilon(1e-10));
    sq += k.values[i] * k.values[i] * g.dt(i);
  }
  CHECK(std::abs(sq - 1.0) < 0.02);
}

TEST_CASE("K inverse undoes K on smooth functions") {
  const TimeGrid g = make_uniform_grid(1.0, 1024);
  for (double h : {0.3, 0.75}) {
    const FractionalOps ops(h, g);
    for (auto fn : {+[](double t) { return 1.0 + 0.5 * t; }, +[](double t) { return std::cos(2.0 * t); }}) {
      const GridFunction f = GridFunction::sample(g, fn);
      const GridFunction back = ops.apply_K_inv(ops.apply_K(f));
      CHECK(max_abs_diff(back.values, f.values, 0, 1024) <= 0.05);
    }
  }
  const FractionalOps ops(0.75, g);
  const GridFunction back = ops.apply_K_inv(ops.apply_K(GridFunction::preset(g, "one")));
  CHECK(max_abs_diff(back.values, std::vector<double>(1025, 1.0), 0, 1024) <= 0.05);
}

TEST_CASE("kernel covariance approximates the fBm covariance") {
  const TimeGrid g = make_uniform_grid(1.0, 1024);
  for (double h : {0.3, 0.5, 0.75}) {
    const FractionalOps ops(h, g);
    const auto fbm = CovarianceModel::fbm(1.0, h);
    for (double t : {0.25, 0.5, 1.0}) {
      for (double s : {0.25, 0.5, 1.0}) {
        const double exact = covariance_at(fbm, t, s);
        CHECK(std::abs(kernel_covariance(ops, t, s) / exact - 1.0) < 0.02);
      }
    }
  }
  const auto rows = convergence_sweep("fbm-kernel-cov:0.75", {128, 256, 512});
  CHECK(rows[1].residual < rows[0].residual);
  CHECK(rows[2].residual < rows[1].residual);
}

TEST_CASE("Brownian-side Gram equals the fBm-side Gram") {
  const TimeGrid g = make_uniform_grid(1.0, 1024);
  for (double h : {0.3, 0.75}) {
    const auto cond = presets(g, {"one", "avg"});
    const VolterraBridge vb(cond, FractionalOps(h, g), 0.01);
    const OrthogonalBridge ob = build_orthogonal(cond, CovarianceModel::fbm(1.0, h), g);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(vb.brownian_gram0()(i, j) / ob.gram0(i, j) - 1.0) < 0.02);
      }
    }
  }
}

TEST_CASE("H = 1/2 Volterra bridge is the canonical Brownian bridge") {
  const TimeGrid g = make_uniform_grid(1.0, 256);
  const auto cond = presets(g, {"one"});
  const auto fbm = CovarianceModel::fbm(1.0, 0.5);
  const FractionalOps ops(0.5, g);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const SamplePath v = sample_path(fbm, MeanFunction::zero(g), g, SeedSpec{4, s});
    const SamplePath a = volterra_bridge_transform(v, cond, ops, g.dt(0));
    const SamplePath b = simulate_canonical_bridge(cond, CovarianceModel::brownian(1.0), g, SeedSpec{4, s}, g.dt(0));
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-12);
  }
}

TEST_CASE("Volterra bridge satisfies its conditioning") {
  const TimeGrid g = make_uniform_grid(1.0, 1024);
  for (double h : {0.3, 0.75}) {
    const auto fbm = CovarianceModel::fbm(1.0, h);
    const ConditioningSet cond({GridFunction::preset(g, "one"), GridFunction::preset(g, "avg")},
                               Eigen::Vector2d(0.5, -0.2));
    const VolterraBridge vb(cond, FractionalOps(h, g), 0.01);
    const SamplePath out = vb.transform(sample_path(fbm, MeanFunction::zero(g), g, SeedSpec{2, 2}));
    CHECK(std::abs(wiener_integral(cond.gs[0], out) - 0.5) <= 0.02);
    CHECK(std::abs(wiener_integral(cond.gs[1], out) + 0.2) <= 0.02);
    CHECK(out.values[0] == 0.0);
  }
}

TEST_CASE("Volterra bridge is adapted before the switch node") {
  const TimeGrid g = make_uniform_grid(1.0, 128);
  const auto fbm = CovarianceModel::fbm(1.0, 0.75);
  const VolterraBridge vb(presets(g, {"one"}), FractionalOps(0.75, g), 0.1);
  SamplePath v = sample_path(fbm, MeanFunction::zero(g), g, SeedSpec{1, 1});
  const SamplePath a = vb.transform(v);
  const std::size_t k = 60;
  for (std::size_t i = k + 1; i < v.values.size(); ++i) v.values[i] += 0.3 * static_cast<double>(i);
  const SamplePath b = vb.transform(v);
  for (std::size_t i = 0; i <= k; ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("Volterra bridge law for H = 0.75") {
  const TimeGrid g = make_uniform_grid(1.0, 100);
  const auto fbm = CovarianceModel::fbm(1.0, 0.75);
  const auto cond = presets(g, {"one"});
  const VolterraBridge vb(cond, FractionalOps(0.75, g), g.dt(0));
  const OrthogonalBridge ob = build_orthogonal(cond, fbm, g);
  const PathSampler s(fbm, MeanFunction::zero(g), g);
  const auto rep = estimate_moments([&](const SeedSpec& sd) { return vb.transform(s.sample(sd)); },
                                    {{0.3, 0.6}, {0.5, 0.5}}, 20000, 44);
  for (const auto& p : rep.probes) {
    CHECK(std::abs(p.cov - bridge_covariance(ob, p.t, p.s)) <= 4.0 * p.cov_se + 0.02);
  }
}

TEST_CASE("degenerate Brownian-side Gram is reported") {
  const TimeGrid g = make_uniform_grid(1.0, 32);
  const ConditioningSet dup({GridFunction::preset(g, "one"), GridFunction::preset(g, "one")}, Eigen::VectorXd::Zero(2));
  CHECK_THROWS_AS(VolterraBridge(dup, FractionalOps(0.7, g), 0.1), DegenerateConditioning);
}
