#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ramsey/runner.hpp"

namespace ramsey {

struct BatchOptions {
  std::size_t points_per_decade = 20;
  std::size_t workers = 0;  // 0: one per hardware thread
  bool keep_traces = true;
};

// Statistics over runs at one abscissa value (sequence count or lab time in s).
struct BatchPoint {
  double x = 0.0;
  double mean_sigma = 0.0;  // mean posterior sigma of omega0, rad/us
  double p05_sigma = 0.0;
  double p95_sigma = 0.0;
  double error_std = 0.0;  // spread of (posterior mean - true omega0) across runs
  double mean_eta2 = 0.0;  // T^2 s
};

struct BatchSummary {
  Protocol protocol = Protocol::bayes;
  std::size_t runs = 0;
  std::vector<BatchPoint> by_sequences;
  std::vector<BatchPoint> by_lab_time;
  // Grid points where the mean trajectory leaves the 5-95 % band.
  std::size_t band_violations = 0;
  std::vector<RunTrace> traces;
};

class BatchError : public std::runtime_error {
 public:
  BatchError(std::size_t run_id, std::uint64_t seed, const std::string& what)
      : std::runtime_error("run " + std::to_string(run_id) + " (seed " + std::to_string(seed) +
                           ") failed: " + what),
        run_id_(run_id),
        seed_(seed) {}

  std::size_t run_id() const { return run_id_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t run_id_;
  std::uint64_t seed_;
};

// Resamples each trace onto common log-spaced grids (last observation
// carried forward) spanning the range every run covers.
BatchSummary summarize_runs(std::span<const RunTrace> traces, const BatchOptions& options = {});

// n_runs independent runs with seeds derived from config.seed and the run index.
BatchSummary run_batch(const RunConfig& config, const TruthConfig& truth, std::size_t n_runs,
                       const BatchOptions& options = {});

// Linear-interpolated percentile (q in [0, 1]) of an unsorted sample.
double percentile(std::vector<double> values, double q);

}  // namespace ramsey
