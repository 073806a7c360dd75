#pragma once

#include <cstdint>
#include <vector>

#include "ramsey/runner.hpp"

namespace ramsey {

// Idealised Tau-protocol runs: zero overhead and a fixed number of repeats
// per epoch, so measurement time per epoch is proportional to tau.
struct TauScalingOptions {
  std::int64_t repeats_per_epoch = 300;
  std::size_t epochs = 60;
  std::size_t runs = 10;
};

struct TauScalingEpoch {
  std::size_t epoch = 0;
  double mean_tau_us = 0.0;
  double mean_sigma_before = 0.0;  // sigma used to pick tau
  double mean_sigma_after = 0.0;
  double mean_total_time_us = 0.0;  // cumulative sum of m * tau
  double mean_phase_uncertainty = 0.0;  // tau * sigma_before
  double in_range_fraction = 0.0;  // runs where h / sigma fell inside the grid
};

struct TauScalingReport {
  std::vector<TauScalingEpoch> epochs;
  std::vector<std::size_t> fit_epochs;  // epochs in range for every run
  double beta = 0.0;  // mean sigma_after / sigma_before over fit_epochs
  double slope = 0.0;  // d log sigma / d log T over fit_epochs, pooled over runs
  double slope_stderr = 0.0;
  double slope_ci_low = 0.0;  // 95 %
  double slope_ci_high = 0.0;
  double h = 0.0;
  double grid_step_us = 0.0;
};

// `base` supplies the seed, prior, grid, window and Tau tuning; the truth's
// overhead is replaced by zero. Throws std::runtime_error when fewer than five
// epochs are usable for the fit.
TauScalingReport tau_scaling_experiment(const TruthConfig& truth, const RunConfig& base,
                                        const TauScalingOptions& options);

}  // namespace ramsey
