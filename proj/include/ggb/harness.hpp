#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ggb/core.hpp"

namespace ggb {

/// Worker count: GB_THREADS if set to a positive integer, else the
/// hardware concurrency (at least 1).
unsigned default_workers();

/// Runs fn(i) for i in [0, count). Work is split into fixed contiguous
/// chunks, so anything fn writes to slot i is independent of scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned workers = 0);

using PathSource = std::function<SamplePath(const SeedSpec&)>;

struct ProbeMoments {
  double t = 0.0;
  double s = 0.0;
  double mean_t = 0.0;
  double mean_s = 0.0;
  double se_mean_t = 0.0;
  double se_mean_s = 0.0;
  double cov = 0.0;
  double cov_se = 0.0;
};

struct MomentReport {
  std::vector<ProbeMoments> probes;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
};

/// Empirical means and covariances at probe node pairs over paths drawn
/// from streams (seed, 0..paths-1). Requires paths >= 100.
MomentReport estimate_moments(const PathSource& generator,
                              const std::vector<std::pair<double, double>>& probes,
                              std::size_t paths, std::uint64_t seed, unsigned workers = 0);

/// Rows (t, s, emp_cov, theory_cov, se, z_score) with a header line.
void write_report_csv(std::ostream& out, const MomentReport& report,
                      const std::vector<double>& theory);

struct SweepRow {
  int n = 0;
  double residual = 0.0;
};

/// Residual of a named check on each grid size. Checks:
///   resolvent[:<presets>]     max |resolvent residual| at (0.75T, 0.25T) on BM,
///                             presets a comma list of one|avg (default one)
///   fbm-kernel-cov[:<H>]      max relative error of the kernel covariance
///   gram[:<presets>]          max |<<g>>(0) - exact| on BM
SweepRow convergence_point(const std::string& check, int n);
std::vector<SweepRow> convergence_sweep(const std::string& check, const std::vector<int>& n_values);

/// Mean and standard error of a sample with compensated two-pass sums.
std::pair<double, double> mean_and_se(const std::vector<double>& xs);

/// "%.17g" formatting used by every emitted number.
std::string fmt17(double x);

}  // namespace ggb
