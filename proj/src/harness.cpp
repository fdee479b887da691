#include "ggb/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "ggb/canonical.hpp"
#include "ggb/errors.hpp"
#include "ggb/volterra.hpp"
#include "ggb/wiener.hpp"

namespace ggb {

unsigned default_workers() {
  if (const char* env = std::getenv("GB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned workers) {
  if (workers == 0) workers = default_workers();
  const std::size_t w = std::min<std::size_t>(workers, std::max<std::size_t>(count, 1));
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t chunk = (count + w - 1) / w;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(w);
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      try {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::pair<double, double> mean_and_se(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  CompensatedSum s;
  for (double x : xs) s.add(x);
  const double n = static_cast<double>(xs.size());
  const double mean = s.value() / n;
  if (xs.size() < 2) return {mean, 0.0};
  CompensatedSum ss;
  for (double x : xs) ss.add((x - mean) * (x - mean));
  return {mean, std::sqrt(ss.value() / (n - 1.0) / n)};
}

MomentReport estimate_moments(const PathSource& generator,
                              const std::vector<std::pair<double, double>>& probes,
                              std::size_t paths, std::uint64_t seed, unsigned workers) {
  if (paths < 100) throw InvalidArgument("estimate_moments needs at least 100 paths");
  if (probes.empty()) throw InvalidArgument("estimate_moments needs at least one probe");

  const SamplePath first = generator(SeedSpec{seed, 0});
  std::vector<std::size_t> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  auto slot_of = [&](double t) {
    const std::size_t k = first.grid.node_index(t);
    auto it = std::find(nodes.begin(), nodes.end(), k);
    if (it != nodes.end()) return static_cast<std::size_t>(it - nodes.begin());
    nodes.push_back(k);
    return nodes.size() - 1;
  };
  for (const auto& p : probes) slots.emplace_back(slot_of(p.first), slot_of(p.second));

  const std::size_t width = nodes.size();
  std::vector<double> table(paths * width);
  auto record = [&](std::size_t i, const SamplePath& path) {
    for (std::size_t c = 0; c < width; ++c) table[i * width + c] = path.values[nodes[c]];
  };
  record(0, first);
  parallel_for(
      paths - 1, [&](std::size_t j) { record(j + 1, generator(SeedSpec{seed, j + 1})); }, workers);

  const double n = static_cast<double>(paths);
  std::vector<double> means(width);
  std::vector<double> ses(width);
  std::vector<double> column(paths);
  for (std::size_t c = 0; c < width; ++c) {
    for (std::size_t i = 0; i < paths; ++i) column[i] = table[i * width + c];
    std::tie(means[c], ses[c]) = mean_and_se(column);
  }

  MomentReport report;
  report.paths = paths;
  report.seed = seed;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto [a, b] = slots[p];
    std::vector<double> prod(paths);
    for (std::size_t i = 0; i < paths; ++i) {
      prod[i] = (table[i * width + a] - means[a]) * (table[i * width + b] - means[b]);
    }
    const auto [m, se] = mean_and_se(prod);
    ProbeMoments pm;
    pm.t = probes[p].first;
    pm.s = probes[p].second;
    pm.mean_t = means[a];
    pm.mean_s = means[b];
    pm.se_mean_t = ses[a];
    pm.se_mean_s = ses[b];
    // Unbiased covariance; the SE is that of the mean of the products.
    pm.cov = m * n / (n - 1.0);
    pm.cov_se = se;
    report.probes.push_back(pm);
  }
  return report;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_report_csv(std::ostream& out, const MomentReport& report,
                      const std::vector<double>& theory) {
  if (theory.size() != report.probes.size()) {
    throw InvalidArgument("write_report_csv needs one theory value per probe");
  }
  out << "t,s,emp_cov,theory_cov,se,z_score\n";
  for (std::size_t p = 0; p < report.probes.size(); ++p) {
    const auto& pm = report.probes[p];
    const double th = theory[p];
    const double z = pm.cov_se > 0.0 ? (pm.cov - th) / pm.cov_se : 0.0;
    out << fmt17(pm.t) << ',' << fmt17(pm.s) << ',' << fmt17(pm.cov) << ',' << fmt17(th) << ','
        << fmt17(pm.cov_se) << ',' << fmt17(z) << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double exact_bm_inner(const std::string& a, const std::string& b) {
  // Exact integrals over [0, 1] of products of 1 and (1 - t).
  const int k = (a == "avg") + (b == "avg");
  return 1.0 / (k + 1);
}

}  // namespace

SweepRow convergence_point(const std::string& check, int n) {
  if (n < 1) throw InvalidArgument("grid size must be positive");
  const auto colon = check.find(':');
  const std::string name = check.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : check.substr(colon + 1);
  const TimeGrid grid = TimeGrid::uniform(1.0, n);

  if (name == "resolvent" || name == "gram") {
    const std::vector<std::string> presets = split(arg.empty() ? "one" : arg, ',');
    std::vector<GridFunction> gs;
    for (const auto& p : presets) {
      if (p != "one" && p != "avg") throw InvalidArgument("unknown preset '" + p + "' in check");
      gs.push_back(GridFunction::preset(grid, p));
    }
    const ConditioningSet cond(gs, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gs.size())));
    const CovarianceModel bm = CovarianceModel::brownian(1.0);
    if (name == "gram") {
      const GramFunction gram = gram_function(cond, bm);
      double worst = 0.0;
      for (std::size_t i = 0; i < gs.size(); ++i) {
        for (std::size_t j = 0; j < gs.size(); ++j) {
          const double err = gram.at(0)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                             exact_bm_inner(presets[i], presets[j]);
          worst = std::max(worst, std::abs(err));
        }
      }
      return {n, worst};
    }
    if (n % 4 != 0) throw InvalidArgument("resolvent check needs n divisible by 4");
    const BridgeKernelPair kp(cond, bm);
    return {n, std::abs(kp.resolvent_residual(grid.node_index(0.75), grid.node_index(0.25)))};
  }
  if (name == "fbm-kernel-cov") {
    if (n % 4 != 0) throw InvalidArgument("fbm-kernel-cov check needs n divisible by 4");
    const double h = arg.empty() ? 0.75 : std::stod(arg);
    const FractionalOps ops(h, grid);
    const CovarianceModel fbm = CovarianceModel::fbm(1.0, h);
    const double pts[3] = {0.25, 0.5, 1.0};
    double worst = 0.0;
    for (double t : pts) {
      for (double s : pts) {
        const double exact = covariance_at(fbm, t, s);
        worst = std::max(worst, std::abs(kernel_covariance(ops, t, s) - exact) / exact);
      }
    }
    return {n, worst};
  }
  throw InvalidArgument("unknown convergence check '" + check + "'");
}

std::vector<SweepRow> convergence_sweep(const std::string& check, const std::vector<int>& n_values) {
  if (n_values.empty()) throw InvalidArgument("convergence_sweep needs at least one grid size");
  for (std::size_t i = 1; i < n_values.size(); ++i) {
    if (n_values[i] <= n_values[i - 1]) throw InvalidArgument("grid sizes must be increasing");
  }
  std::vector<SweepRow> rows;
  for (int n : n_values) rows.push_back(convergence_point(check, n));
  return rows;
}

}  // namespace ggb
