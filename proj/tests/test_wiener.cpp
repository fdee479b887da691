#include "doctest.h"

#include <cmath>

#include "ggb/errors.hpp"
#include "ggb/harness.hpp"
#include "ggb/wiener.hpp"

using namespace ggb;

namespace {

ConditioningSet one_avg(const TimeGrid& g) {
  return ConditioningSet({GridFunction::preset(g, "one"), GridFunction::preset(g, "avg")},
                         Eigen::VectorXd::Zero(2));
}

}  // namespace

TEST_CASE("presets") {
  const TimeGrid g = make_uniform_grid(2.0, 4);
  CHECK(GridFunction::preset(g, "one").values == std::vector<double>(5, 1.0));
  CHECK(GridFunction::preset(g, "avg").values == std::vector<double>{1.0, 0.75, 0.5, 0.25, 0.0});
  CHECK(GridFunction::preset(g, "ind", 1.0).values == std::vector<double>{1, 1, 0, 0, 0});
  CHECK_THROWS_AS(GridFunction::preset(g, "ind", 0.3), InvalidArgument);
  CHECK_THROWS_AS(GridFunction::preset(g, "cube"), InvalidArgument);
}

TEST_CASE("inner product examples on BM") {
  const auto bm = CovarianceModel::brownian(1.0);
  const TimeGrid g = make_uniform_grid(1.0, 1024);
  const auto one = GridFunction::preset(g, "one");
  const auto avg = GridFunction::preset(g, "avg");
  CHECK(inner_product(one, one, bm) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(inner_product(one, avg, bm) - 0.5) < 1e-3);
  CHECK(inner_product(GridFunction::constant(g, 0.0), avg, bm) == 0.0);
  CHECK(inner_product(GridFunction::constant(g, 0.0), avg, CovarianceModel::fbm(1.0, 0.3)) == 0.0);
  CHECK_THROWS_AS(inner_product(one, avg, bm, 0.1234), InvalidArgument);
  CHECK_THROWS_AS(inner_product(one, avg, CovarianceModel::fbm(1.0, 0.3), 0.5), Unsupported);
}

TEST_CASE("fbm inner product of the constant is the terminal variance") {
  const TimeGrid g = make_uniform_grid(1.0, 64);
  const auto one = GridFunction::preset(g, "one");
  CHECK(inner_product(one, one, CovarianceModel::fbm(1.0, 0.75)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Gram function of (1, avg) on BM") {
  const TimeGrid g = make_uniform_grid(1.0, 1024);
  const GramFunction gram = gram_function(one_avg(g), CovarianceModel::brownian(1.0));
  Eigen::Matrix2d a0;
  a0 << 1.0, 0.5, 0.5, 1.0 / 3.0;
  CHECK((gram.at(0) - a0).cwiseAbs().maxCoeff() < 1e-3);
  Eigen::Matrix2d ah;
  ah << 0.5, 0.125, 0.125, 1.0 / 24.0;
  CHECK((gram.at(512) - ah).cwiseAbs().maxCoeff() < 1e-3);
  for (double t : {0.0, 0.25, 0.5}) {
    const double x = 1.0 / (1.0 - t);
    Eigen::Matrix2d inv;
    inv << 4 * x, -6 * x * x, -6 * x * x, 12 * x * x * x;
    const Eigen::MatrixXd got = gram.inverse(g.node_index(t));
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) CHECK(std::abs(got(i, j) / inv(i, j) - 1.0) < 5e-3);
    }
  }
}

TEST_CASE("Gram function invariants") {
  const TimeGrid g = make_uniform_grid(1.0, 128);
  const auto bm = CovarianceModel::brownian(1.0);
  const ConditioningSet cond = one_avg(g);
  const GramFunction gram = gram_function(cond, bm);
  CHECK(gram.at(128).isZero(0.0));
  CHECK_FALSE(gram.nondegenerate(128));
  CHECK_THROWS_AS(gram.inverse(128), DegenerateConditioning);
  for (std::size_t k = 0; k < 127; ++k) {
    CHECK(gram.nondegenerate(k));
    CHECK(gram.det(k + 1) <= gram.det(k));
    CHECK((gram.at(k) - gram.at(k).transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  // Bitwise agreement with inner_product from the same node.
  for (std::size_t k : {0u, 17u, 64u, 127u}) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        CHECK(gram.at(k)(i, j) == inner_product(cond.gs[i], cond.gs[j], bm, g[k]));
      }
    }
  }
  CHECK(*gram.last_nondegenerate_at_or_before(1.0) == 126);
}

TEST_CASE("Gram errors") {
  const TimeGrid g = make_uniform_grid(1.0, 16);
  const ConditioningSet dup({GridFunction::preset(g, "one"), scaled(GridFunction::preset(g, "one"), 2.0)},
                            Eigen::VectorXd::Zero(2));
  CHECK_THROWS_AS(gram_function(dup, CovarianceModel::brownian(1.0)), LinearDependence);
  CHECK_THROWS_AS(gram_function(one_avg(g), CovarianceModel::fbm(1.0, 0.7)), Unsupported);
}

TEST_CASE("Gram on a martingale with bracket t^2") {
  const TimeGrid g = make_uniform_grid(1.0, 2048);
  const auto m = CovarianceModel::martingale(1.0, [](double t) { return t * t; });
  const GramFunction gram = gram_function(one_avg(g), m);
  // Exact: int_0^1 2s ds = 1, int 2s(1-s) ds = 1/3, int 2s(1-s)^2 ds = 1/6.
  CHECK(gram.at(0)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(gram.at(0)(0, 1) - 1.0 / 3.0) < 1e-3);
  CHECK(std::abs(gram.at(0)(1, 1) - 1.0 / 6.0) < 1e-3);
}

TEST_CASE("quadrature converges at first order") {
  const auto rows = convergence_sweep("gram:one,avg", {128, 256});
  const double ratio = rows[0].residual / rows[1].residual;
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 2.5);
}

TEST_CASE("wiener integral examples") {
  const TimeGrid g = make_uniform_grid(1.0, 4);
  const SamplePath p(g, {0.5, 1.0, -0.5, 2.0, 3.0});
  CHECK(wiener_integral(GridFunction::preset(g, "one"), p) == 2.5);
  CHECK(wiener_integral(GridFunction::preset(g, "ind", 0.5), p) == -1.0);
  CHECK(wiener_integral(GridFunction::constant(g, 0.0), p) == 0.0);
  const TimeGrid other = make_uniform_grid(1.0, 5);
  CHECK_THROWS_AS(wiener_integral(GridFunction::preset(other, "one"), p), InvalidArgument);
}

TEST_CASE("isometry on BM over 1e5 paths") {
  const TimeGrid g = make_uniform_grid(1.0, 32);
  const auto bm = CovarianceModel::brownian(1.0);
  const PathSampler s(bm, MeanFunction::zero(g), g);
  const auto one = GridFunction::preset(g, "one");
  const auto avg = GridFunction::preset(g, "avg");
  const std::size_t n = 100000;
  std::vector<double> prod(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SamplePath p = s.sample(SeedSpec{21, i});
    prod[i] = wiener_integral(one, p) * wiener_integral(avg, p);
  }
  const auto [mean, se] = mean_and_se(prod);
  CHECK(std::abs(mean - inner_product(one, avg, bm)) <= 4.0 * se);
}
