#include "ramsey/likelihood_demo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ramsey/batch.hpp"
#include "ramsey/likelihood.hpp"

namespace ramsey {

namespace {

// Width at half maximum with linear interpolation between grid points.
double full_width_half_max(const std::vector<double>& r, const std::vector<double>& y, std::size_t peak) {
  auto crossing = [&](std::size_t i, std::size_t j) {
    return r[i] + (0.5 - y[i]) * (r[j] - r[i]) / (y[j] - y[i]);
  };
  std::size_t lo = peak;
  while (lo > 0 && y[lo - 1] >= 0.5) --lo;
  std::size_t hi = peak;
  while (hi + 1 < y.size() && y[hi + 1] >= 0.5) ++hi;
  const double left = lo == 0 ? r.front() : crossing(lo - 1, lo);
  const double right = hi + 1 == y.size() ? r.back() : crossing(hi, hi + 1);
  return right - left;
}

LikelihoodCurve make_curve(double ratio, const std::vector<double>& r, auto&& log_l) {
  LikelihoodCurve curve;
  curve.ratio = ratio;
  curve.r = r;
  curve.likelihood.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) curve.likelihood[i] = log_l(r[i]);
  const auto peak = static_cast<std::size_t>(
      std::max_element(curve.likelihood.begin(), curve.likelihood.end()) - curve.likelihood.begin());
  const double top = curve.likelihood[peak];
  for (double& v : curve.likelihood) v = std::exp(v - top);
  curve.peak_r = r[peak];
  curve.fwhm = full_width_half_max(curve.r, curve.likelihood, peak);
  return curve;
}

}  // namespace

std::vector<LikelihoodCurve> likelihood_curves(const LikelihoodCurveOptions& o) {
  if (!(o.r_step > 0.0) || !(o.r_min > 0.0) || !(o.r_max > o.r_min))
    throw std::invalid_argument("likelihood curve: bad R grid");
  std::vector<double> r;
  const auto n = static_cast<std::size_t>(std::floor((o.r_max - o.r_min) / o.r_step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) r.push_back(o.r_min + static_cast<double>(i) * o.r_step);

  std::vector<LikelihoodCurve> curves;
  for (double ratio : o.ratios) {
    if (!(ratio > 0.0)) throw std::invalid_argument("likelihood curve: ratio must be positive");
    const double m_b = ratio * o.m_s;
    const double n_b = o.background_rate * m_b;
    curves.push_back(make_curve(ratio, r, [&](double R) { return log_likelihood(o.n_s, o.m_s, n_b, m_b, R); }));
  }
  // Background rate known exactly: Poisson in the signal rate m_s R lambda_b.
  curves.push_back(make_curve(0.0, r, [&](double R) {
    const double mean = o.m_s * R * o.background_rate;
    return o.n_s * std::log(mean) - mean;
  }));
  return curves;
}

std::vector<WindowSweepPoint> window_sweep(const RunConfig& base, const TruthConfig& truth,
                                           const WindowSweepOptions& options) {
  std::vector<WindowSweepPoint> points;
  for (std::size_t w : options.windows) {
    RunConfig config = base;
    config.protocol = Protocol::bayes;
    config.window = w;
    BatchOptions batch_options;
    batch_options.workers = options.workers;
    const BatchSummary batch = run_batch(config, truth, options.runs, batch_options);

    WindowSweepPoint p;
    p.window = w;
    for (const auto& trace : batch.traces) {
      const auto& last = trace.epochs.back();
      p.mean_final_sigma += last.posterior[static_cast<int>(Param::omega0)].sigma;
      p.mean_ratio += static_cast<double>(last.m_b_window) / static_cast<double>(last.m_s);
    }
    p.mean_final_sigma /= static_cast<double>(batch.traces.size());
    p.mean_ratio /= static_cast<double>(batch.traces.size());
    points.push_back(p);
  }
  return points;
}

}  // namespace ramsey
