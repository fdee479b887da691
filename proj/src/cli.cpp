#include "ggb/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ggb/canonical.hpp"
#include "ggb/config.hpp"
#include "ggb/harness.hpp"
#include "ggb/insider.hpp"
#include "ggb/orthogonal.hpp"
#include "ggb/volterra.hpp"

namespace ggb::cli {

namespace {

struct Options {
  std::string model_file;
  std::string cond_file;
  std::string config_file;
  std::string out_file;
  std::string type;
  std::string check;
  int grid_n = 256;
  std::size_t paths = 1;
  std::uint64_t seed = 0;
  std::optional<double> epsilon;
  std::optional<double> hurst;
  std::size_t mc_paths = 0;
  int probes = 5;
};

class Output {
 public:
  Output(const std::string& file, std::ostream& fallback) : stream_(&fallback) {
    if (!file.empty()) {
      file_ = std::make_unique<std::ofstream>(file);
      if (!*file_) throw ConfigError("out", "cannot open '" + file + "' for writing");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

void write_paths_csv(std::ostream& os, const TimeGrid& grid, const std::vector<SamplePath>& paths) {
  os << "time";
  for (std::size_t p = 0; p < paths.size(); ++p) os << ",path_" << p;
  os << '\n';
  for (std::size_t k = 0; k < grid.size(); ++k) {
    os << fmt17(grid[k]);
    for (const auto& path : paths) os << ',' << fmt17(path.values[k]);
    os << '\n';
  }
}

ModelConfig load_model(const Options& o) {
  if (o.model_file.empty()) throw ConfigError("model", "--model is required");
  return parse_model(read_text_file(o.model_file));
}

TimeGrid grid_for(const ModelConfig& mc, const Options& o, bool grid_given) {
  int n = o.grid_n;
  if (mc.segments) {
    if (grid_given && n != *mc.segments) {
      throw ConfigError("cov_matrix", "matrix has " + std::to_string(*mc.segments) +
                                          " segments but --grid-n is " + std::to_string(n));
    }
    n = *mc.segments;
  }
  if (n < 1) throw ConfigError("grid-n", "must be >= 1");
  return TimeGrid::uniform(mc.model.horizon(), n);
}

ConditioningSet load_cond(const Options& o, const TimeGrid& grid) {
  if (o.cond_file.empty()) throw ConfigError("cond", "--cond is required");
  return parse_conditioning(read_text_file(o.cond_file), grid);
}

void require_paths(const Options& o) {
  if (o.paths < 1) throw ConfigError("paths", "must be >= 1");
}

std::string node_range(std::size_t lo, std::size_t hi) {
  if (lo > hi) return "none";
  return std::to_string(lo) + ".." + std::to_string(hi);
}

int cmd_sample(const Options& o, bool grid_given, std::ostream& out) {
  require_paths(o);
  const ModelConfig mc = load_model(o);
  const TimeGrid grid = grid_for(mc, o, grid_given);
  const PathSampler sampler(mc.model, mc.mean_on(grid), grid);
  std::vector<SamplePath> paths(o.paths, SamplePath(grid, std::vector<double>(grid.size())));
  parallel_for(o.paths, [&](std::size_t i) { paths[i] = sampler.sample(SeedSpec{o.seed, i}); });
  Output os(o.out_file, out);
  write_paths_csv(*os, grid, paths);
  return kExitOk;
}

int cmd_bridge(const Options& o, bool grid_given, std::ostream& out) {
  require_paths(o);
  const ModelConfig mc = load_model(o);
  const TimeGrid grid = grid_for(mc, o, grid_given);
  const ConditioningSet cond = load_cond(o, grid);
  const double eps = o.epsilon.value_or(grid.dt(grid.segments() - 1));
  std::vector<SamplePath> paths(o.paths, SamplePath(grid, std::vector<double>(grid.size())));

  if (o.type == "orthogonal") {
    const OrthogonalBridge b = build_orthogonal(cond, mc.model, grid);
    const PathSampler sampler(mc.model, mc.mean_on(grid), grid);
    parallel_for(o.paths, [&](std::size_t i) {
      paths[i] = transform_path(b, sampler.sample(SeedSpec{o.seed, i}));
    });
    Output os(o.out_file, out);
    write_paths_csv(*os, grid, paths);
    return kExitOk;
  }
  if (mc.mean && !mc.mean->is_zero()) {
    throw ConfigError("mean_values", "adapted bridges support centered models only");
  }
  std::size_t switch_node = 0;
  if (o.type == "canonical") {
    if (!mc.model.is_martingale_like()) {
      throw ConfigError("kind", "canonical bridges need a bm or martingale model");
    }
    const CanonicalBridge b(cond, mc.model, eps);
    switch_node = b.switch_node();
    parallel_for(o.paths, [&](std::size_t i) { paths[i] = b.simulate(SeedSpec{o.seed, i}); });
  } else if (o.type == "volterra") {
    double h = 0.5;
    if (o.hurst) {
      h = *o.hurst;
    } else if (mc.model.kind() == ModelKind::fbm) {
      h = mc.model.hurst();
    } else if (mc.kind != "bm") {
      throw ConfigError("kind", "volterra bridges need an fbm or bm model (or --hurst)");
    }
    if (!(h > 0.0 && h < 1.0)) throw ConfigError("hurst", "must lie in (0, 1)");
    const CovarianceModel fbm = CovarianceModel::fbm(mc.model.horizon(), h);
    const FractionalOps ops(h, grid);
    const VolterraBridge b(cond, ops, eps);
    switch_node = b.switch_node();
    const PathSampler sampler(fbm, MeanFunction::zero(grid), grid);
    parallel_for(o.paths, [&](std::size_t i) {
      paths[i] = b.transform(sampler.sample(SeedSpec{o.seed, i}));
    });
  } else {
    throw ConfigError("type", "unknown bridge type '" + o.type + "'");
  }
  Output os(o.out_file, out);
  write_paths_csv(*os, grid, paths);
  if (!o.out_file.empty()) {
    out << "sde_nodes " << node_range(0, switch_node) << '\n';
    out << "completion_nodes " << node_range(switch_node + 1, grid.segments()) << '\n';
  }
  return kExitOk;
}

ConditioningSet default_or_loaded_cond(const Options& o, const TimeGrid& grid) {
  if (o.cond_file.empty()) {
    return ConditioningSet({GridFunction::preset(grid, "one")}, Eigen::VectorXd::Zero(1));
  }
  return load_cond(o, grid);
}

int cmd_verify(const Options& o, bool grid_given, std::ostream& out) {
  if (o.check == "gram") {
    const ModelConfig mc = load_model(o);
    const TimeGrid grid = grid_for(mc, o, grid_given);
    const ConditioningSet cond = load_cond(o, grid);
    const GramFunction gram = gram_function(cond, mc.model);
    Output os(o.out_file, out);
    const auto m = static_cast<Eigen::Index>(cond.size());
    *os << "t";
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) *os << ",g_" << i + 1 << '_' << j + 1;
    }
    *os << ",det\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
      *os << fmt17(grid[k]);
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) *os << ',' << fmt17(gram.at(k)(i, j));
      }
      *os << ',' << fmt17(gram.det(k)) << '\n';
    }
    return kExitOk;
  }
  if (o.check == "resolvent") {
    const CovarianceModel model =
        o.model_file.empty() ? CovarianceModel::brownian(1.0) : load_model(o).model;
    if (o.grid_n < 4) throw ConfigError("n", "must be >= 4");
    if (o.probes < 1) throw ConfigError("probes", "must be >= 1");
    const TimeGrid grid = TimeGrid::uniform(model.horizon(), o.grid_n);
    const ConditioningSet cond = default_or_loaded_cond(o, grid);
    const BridgeKernelPair kp(cond, model);
    Output os(o.out_file, out);
    *os << "t,s,residual\n";
    const double horizon = model.horizon();
    for (int p = 1; p <= o.probes; ++p) {
      const double frac = 0.5 * p / (o.probes + 1);
      const std::size_t s = grid.nearest_node(frac * horizon);
      const std::size_t t = grid.nearest_node((frac + 0.5) * horizon);
      *os << fmt17(grid[t]) << ',' << fmt17(grid[s]) << ',' << fmt17(kp.resolvent_residual(t, s)) << '\n';
    }
    return kExitOk;
  }
  if (o.check == "fbm-kernel") {
    const double h = o.hurst.value_or(0.75);
    if (!(h > 0.0 && h < 1.0)) throw ConfigError("hurst", "must lie in (0, 1)");
    if (o.grid_n < 4 || o.grid_n % 4 != 0) throw ConfigError("n", "must be a positive multiple of 4");
    const TimeGrid grid = TimeGrid::uniform(1.0, o.grid_n);
    const FractionalOps ops(h, grid);
    const CovarianceModel fbm = CovarianceModel::fbm(1.0, h);
    Output os(o.out_file, out);
    *os << "t,s,R_exact,R_from_k,rel_err\n";
    const double pts[3] = {0.25, 0.5, 1.0};
    for (int a = 0; a < 3; ++a) {
      for (int b = a; b < 3; ++b) {
        const double exact = covariance_at(fbm, pts[a], pts[b]);
        const double approx = kernel_covariance(ops, pts[a], pts[b]);
        *os << fmt17(pts[a]) << ',' << fmt17(pts[b]) << ',' << fmt17(exact) << ',' << fmt17(approx)
            << ',' << fmt17(std::abs(approx - exact) / exact) << '\n';
      }
    }
    return kExitOk;
  }
  if (o.check == "bridge-cov") {
    const ModelConfig mc = load_model(o);
    const TimeGrid grid = grid_for(mc, o, grid_given);
    const ConditioningSet cond = load_cond(o, grid);
    if (o.paths < 100) throw ConfigError("paths", "bridge-cov needs at least 100 paths");
    const OrthogonalBridge b = build_orthogonal(cond, mc.model, grid);
    const PathSampler sampler(mc.model, mc.mean_on(grid), grid);
    const double horizon = grid.horizon();
    std::vector<std::pair<double, double>> probes;
    std::vector<double> theory;
    for (const auto& [t, s] : {std::pair{0.3, 0.6}, std::pair{0.5, 0.5}, std::pair{0.25, 0.75}}) {
      const double tn = grid[grid.nearest_node(t * horizon)];
      const double sn = grid[grid.nearest_node(s * horizon)];
      probes.emplace_back(tn, sn);
      theory.push_back(bridge_covariance(b, tn, sn));
    }
    const MomentReport rep = estimate_moments(
        [&](const SeedSpec& sd) { return transform_path(b, sampler.sample(sd)); }, probes, o.paths,
        o.seed);
    Output os(o.out_file, out);
    write_report_csv(*os, rep, theory);
    return kExitOk;
  }
  throw ConfigError("check", "unknown verify check '" + o.check + "'");
}

int cmd_insider(const Options& o, bool grid_given, std::ostream& out) {
  if (o.config_file.empty()) throw ConfigError("config", "--config is required");
  const int n = grid_given ? o.grid_n : 4096;
  if (n < 1) throw ConfigError("grid-n", "must be >= 1");
  const MarketConfig mc = parse_market(read_text_file(o.config_file), n);
  const double delta = insider_delta(mc.spec);
  std::ostringstream js;
  js << "{\"delta_formula\": " << fmt17(delta);
  if (mc.mu && mc.sigma) {
    js << ", \"delta_bs_example\": "
       << fmt17(bs_example_delta(*mc.mu, *mc.sigma, mc.spec.grid().horizon(), mc.spec.epsilon));
  }
  if (o.mc_paths > 0) {
    const UtilityGap gap = mc_utility_gap(mc.spec, o.mc_paths, o.seed);
    js << ", \"delta_mc\": " << fmt17(gap.mean) << ", \"mc_se\": " << fmt17(gap.se);
  }
  js << "}\n";
  Output os(o.out_file, out);
  *os << js.str();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized Gaussian bridge toolkit"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out_file, "Output file (default: stdout)");
    sub->add_option("--seed", o.seed, "Master seed");
  };

  CLI::App* sample = app.add_subcommand("sample", "Sample paths of a model");
  add_common(sample);
  sample->add_option("--model", o.model_file, "Model JSON")->required();
  CLI::Option* sample_n = sample->add_option("--grid-n", o.grid_n, "Grid segments");
  sample->add_option("--paths", o.paths, "Number of paths");

  CLI::App* bridge = app.add_subcommand("bridge", "Sample bridge paths");
  add_common(bridge);
  bridge->add_option("--type", o.type, "orthogonal | canonical | volterra")->required();
  bridge->add_option("--model", o.model_file, "Model JSON")->required();
  bridge->add_option("--cond", o.cond_file, "Conditioning JSON")->required();
  CLI::Option* bridge_n = bridge->add_option("--grid-n", o.grid_n, "Grid segments");
  bridge->add_option("--paths", o.paths, "Number of paths");
  bridge->add_option("--epsilon", o.epsilon, "Switch buffer before T (default: one step)");
  bridge->add_option("--hurst", o.hurst, "Hurst index for volterra bridges");

  CLI::App* verify = app.add_subcommand("verify", "Numerical checks");
  add_common(verify);
  verify->add_option("check", o.check, "gram | resolvent | fbm-kernel | bridge-cov")->required();
  verify->add_option("--model", o.model_file, "Model JSON");
  verify->add_option("--cond", o.cond_file, "Conditioning JSON");
  CLI::Option* verify_n = verify->add_option("--grid-n,--n", o.grid_n, "Grid segments");
  verify->add_option("--probes", o.probes, "Probe pairs for resolvent");
  verify->add_option("--hurst", o.hurst, "Hurst index for fbm-kernel");
  verify->add_option("--paths", o.paths, "Paths for bridge-cov");

  CLI::App* insider = app.add_subcommand("insider-delta", "Additional utility of an insider");
  add_common(insider);
  insider->add_option("--config", o.config_file, "Market JSON")->required();
  insider->add_option("--mc-paths", o.mc_paths, "Monte Carlo markets (0 = skip)");
  CLI::Option* insider_n = insider->add_option("--grid-n", o.grid_n, "Grid segments (default 4096)");

  std::vector<std::string> argv_store{"ggb"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sample->parsed()) return cmd_sample(o, sample_n->count() > 0, out);
    if (bridge->parsed()) return cmd_bridge(o, bridge_n->count() > 0, out);
    if (verify->parsed()) {
      if (o.check == "bridge-cov" && verify->get_option("--paths")->count() == 0) o.paths = 10000;
      return cmd_verify(o, verify_n->count() > 0, out);
    }
    if (insider->parsed()) return cmd_insider(o, insider_n->count() > 0, out);
  } catch (const NumericalDegeneracy& e) {
    err << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitConfig;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace ggb::cli
