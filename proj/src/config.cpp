#include "ggb/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ggb {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what, std::string("invalid JSON: ") + e.what());
  }
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + key, "is required");
  return *it;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

std::vector<double> number_list(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

ModelConfig model_from_json(const json& j, const std::string& prefix) {
  const std::string kind_field = prefix + "kind";
  const json& kind_v = require(j, "kind", prefix);
  if (!kind_v.is_string()) throw ConfigError(kind_field, "expected a string");
  const std::string kind = kind_v.get<std::string>();
  const double horizon = number(require(j, "T", prefix), prefix + "T");
  if (!(horizon > 0.0)) throw ConfigError(prefix + "T", "must be positive");

  std::optional<CovarianceModel> model;
  std::optional<int> segments;
  {
    if (kind == "bm") {
      model = CovarianceModel::brownian(horizon);
    } else if (kind == "martingale") {
      const std::string f = prefix + "bracket_values";
      const std::vector<double> v = number_list(require(j, "bracket_values", prefix), f);
      try {
        model = CovarianceModel::martingale_from_values(horizon, v);
      } catch (const InvalidArgument& e) {
        throw ConfigError(f, e.what());
      }
    } else if (kind == "fbm") {
      const std::string f = prefix + "hurst";
      const double h = number(require(j, "hurst", prefix), f);
      if (!(h > 0.0 && h < 1.0)) throw ConfigError(f, "must lie in (0, 1)");
      model = CovarianceModel::fbm(horizon, h);
    } else if (kind == "generic-grid") {
      const std::string f = prefix + "cov_matrix";
      const json& rows = require(j, "cov_matrix", prefix);
      if (!rows.is_array() || rows.empty()) throw ConfigError(f, "expected a non-empty matrix");
      const auto n = static_cast<Eigen::Index>(rows.size());
      Eigen::MatrixXd c(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        const std::string rf = f + "[" + std::to_string(r) + "]";
        const std::vector<double> row = number_list(rows[static_cast<std::size_t>(r)], rf);
        if (static_cast<Eigen::Index>(row.size()) != n) throw ConfigError(rf, "matrix must be square");
        for (Eigen::Index q = 0; q < n; ++q) c(r, q) = row[static_cast<std::size_t>(q)];
      }
      try {
        model = CovarianceModel::generic_from_matrix(horizon, c);
      } catch (const InvalidArgument& e) {
        throw ConfigError(f, e.what());
      }
      const bool with_origin = n >= 2 && c.row(0).cwiseAbs().maxCoeff() == 0.0;
      segments = static_cast<int>(with_origin ? n - 1 : n);
    } else {
      throw ConfigError(kind_field, "unknown model kind '" + kind + "'");
    }
  }

  ModelConfig out{*model, std::nullopt, segments, kind};
  if (auto it = j.find("mean_values"); it != j.end()) {
    const std::string f = prefix + "mean_values";
    const std::vector<double> v = number_list(*it, f);
    if (v.size() < 2) throw ConfigError(f, "needs at least two entries");
    try {
      out.mean = MeanFunction(TimeGrid::uniform(horizon, static_cast<int>(v.size() - 1)), v);
    } catch (const InvalidArgument& e) {
      throw ConfigError(f, e.what());
    }
  }
  return out;
}

ConditioningSet conditioning_from_json(const json& j, const TimeGrid& grid, const std::string& prefix) {
  const json& fs = require(j, "functions", prefix);
  const std::string ff = prefix + "functions";
  if (!fs.is_array() || fs.empty()) throw ConfigError(ff, "expected a non-empty array");
  std::vector<GridFunction> gs;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const std::string f = ff + "[" + std::to_string(i) + "]";
    const json& item = fs[i];
    if (!item.is_object()) throw ConfigError(f, "expected an object");
    if (auto p = item.find("preset"); p != item.end()) {
      if (!p->is_string()) throw ConfigError(f + ".preset", "expected a string");
      const std::string name = p->get<std::string>();
      double u = 0.0;
      if (name == "ind") u = number(require(item, "u", f + "."), f + ".u");
      try {
        gs.push_back(GridFunction::preset(grid, name, u));
      } catch (const InvalidArgument& e) {
        throw ConfigError(name == "ind" ? f + ".u" : f + ".preset", e.what());
      }
    } else if (auto v = item.find("values"); v != item.end()) {
      std::vector<double> vals = number_list(*v, f + ".values");
      if (vals.size() == grid.segments()) vals.push_back(vals.empty() ? 0.0 : vals.back());
      if (vals.size() != grid.size()) {
        throw ConfigError(f + ".values", "needs " + std::to_string(grid.size()) + " node values");
      }
      gs.emplace_back(grid, std::move(vals));
    } else {
      throw ConfigError(f, "needs either 'preset' or 'values'");
    }
  }
  const std::vector<double> y = number_list(require(j, "y", prefix), prefix + "y");
  if (y.size() != gs.size()) {
    throw ConfigError(prefix + "y", "needs one target per function (" + std::to_string(gs.size()) + ")");
  }
  return ConditioningSet(std::move(gs), Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot read file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelConfig parse_model(const std::string& json_text) {
  return model_from_json(parse_json(json_text, "model"), "");
}

ConditioningSet parse_conditioning(const std::string& json_text, const TimeGrid& grid) {
  return conditioning_from_json(parse_json(json_text, "conditioning"), grid, "");
}

MarketConfig parse_market(const std::string& json_text, int grid_n) {
  const json j = parse_json(json_text, "config");
  const ModelConfig mc = model_from_json(require(j, "model", ""), "model.");
  if (!mc.model.is_martingale_like()) {
    throw ConfigError("model.kind", "market model must be bm or martingale");
  }
  const TimeGrid grid = TimeGrid::uniform(mc.model.horizon(), grid_n);
  const ConditioningSet cond = conditioning_from_json(require(j, "conditioning", ""), grid, "conditioning.");

  const json& a = require(j, "a", "");
  std::optional<GridFunction> rate;
  if (auto c = a.find("const"); a.is_object() && c != a.end()) {
    rate = GridFunction::constant(grid, number(*c, "a.const"));
  } else if (auto v = a.find("values"); a.is_object() && v != a.end()) {
    std::vector<double> vals = number_list(*v, "a.values");
    if (vals.size() == grid.segments()) vals.push_back(vals.empty() ? 0.0 : vals.back());
    if (vals.size() != grid.size()) {
      throw ConfigError("a.values", "needs " + std::to_string(grid.size()) + " node values");
    }
    rate = GridFunction(grid, std::move(vals));
  } else {
    throw ConfigError("a", "needs either 'const' or 'values'");
  }

  const double eps = number(require(j, "epsilon", ""), "epsilon");
  if (!(eps > 0.0) || eps > mc.model.horizon()) throw ConfigError("epsilon", "must lie in (0, T]");
  std::optional<double> mu;
  std::optional<double> sigma;
  if (auto it = j.find("mu"); it != j.end()) mu = number(*it, "mu");
  if (auto it = j.find("sigma"); it != j.end()) {
    sigma = number(*it, "sigma");
    if (!(*sigma > 0.0)) throw ConfigError("sigma", "must be positive");
  }
  return MarketConfig{MarketSpec(mc.model, *rate, cond, eps), mu, sigma};
}

}  // namespace ggb
