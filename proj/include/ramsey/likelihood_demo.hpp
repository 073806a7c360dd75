#pragma once

#include <cstdint>
#include <vector>

#include "ramsey/instrument.hpp"
#include "ramsey/runner.hpp"

namespace ramsey {

// Single-epoch likelihood of R for n_s = 1 photon in m_s = 10 sequences and a
// background window at 0.15 photons per sequence, for growing m_b / m_s.
struct LikelihoodCurveOptions {
  double m_s = 10.0;
  double n_s = 1.0;
  double background_rate = 0.15;
  std::vector<double> ratios{1.0, 10.0, 100.0, 1000.0};
  double r_min = 0.001;
  double r_max = 3.0;
  double r_step = 0.001;
};

struct LikelihoodCurve {
  double ratio = 0.0;  // m_b / m_s; 0 marks the known-background (Poisson) limit
  std::vector<double> r;
  std::vector<double> likelihood;  // scaled to a peak of 1
  double peak_r = 0.0;
  double fwhm = 0.0;
};

std::vector<LikelihoodCurve> likelihood_curves(const LikelihoodCurveOptions& options = {});

// Short Bayes runs with background windows of W epochs, so m_b / m_s ~ W.
struct WindowSweepOptions {
  std::vector<std::size_t> windows{1, 3, 10, 30, 100};
  std::size_t runs = 10;
  std::size_t workers = 0;
};

struct WindowSweepPoint {
  std::size_t window = 0;
  double mean_ratio = 0.0;  // m_b / m_s at the final epoch, averaged over runs
  double mean_final_sigma = 0.0;
};

// `base` supplies everything but the window; its protocol is forced to bayes.
std::vector<WindowSweepPoint> window_sweep(const RunConfig& base, const TruthConfig& truth,
                                           const WindowSweepOptions& options = {});

}  // namespace ramsey
