#pragma once

#include <optional>
#include <string>

#include "ggb/errors.hpp"
#include "ggb/insider.hpp"
#include "ggb/models.hpp"
#include "ggb/wiener.hpp"

namespace ggb {

/// A malformed configuration; field() names the offending JSON field.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : InvalidArgument("field '" + field + "': " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ModelConfig {
  CovarianceModel model;
  std::optional<MeanFunction> mean;
  /// Set for generic-grid models, whose matrix fixes the grid size.
  std::optional<int> segments;
  std::string kind;

  MeanFunction mean_on(const TimeGrid& grid) const {
    return mean ? *mean : MeanFunction::zero(grid);
  }
};

struct MarketConfig {
  MarketSpec spec;
  std::optional<double> mu;
  std::optional<double> sigma;
};

/// Reads a whole file; throws ConfigError naming the path when unreadable.
std::string read_text_file(const std::string& path);

ModelConfig parse_model(const std::string& json_text);
ConditioningSet parse_conditioning(const std::string& json_text, const TimeGrid& grid);
MarketConfig parse_market(const std::string& json_text, int grid_n);

}  // namespace ggb
