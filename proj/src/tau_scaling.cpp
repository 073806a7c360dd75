#include "ramsey/tau_scaling.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace ramsey {

namespace {

struct EpochSample {
  double tau_us;
  double sigma_before;
  double sigma_after;
  double total_time_us;
  bool in_range;
};

std::vector<EpochSample> scaling_run(const TruthConfig& truth, const RunConfig& base,
                                     const TauScalingOptions& options, std::size_t run) {
  const std::uint64_t seed = derive_seed(base.seed, run);
  RunConfig config = base;
  config.unknowns = Unknowns::omega_only;
  ParticleCloud cloud = init_prior(config.prior_spec(), truth.params, derive_seed(seed, 11));
  Rng design_rng = make_rng(seed, 12);
  Rng instrument_rng = make_rng(seed, 13);

  const double min_us = config.grid.tau_us(0);
  const double max_us = static_cast<double>(config.grid.max_ns()) * 1e-3;
  std::deque<std::pair<std::int64_t, std::int64_t>> window;
  std::int64_t n_b_win = 0;
  std::int64_t m_b_win = 0;
  double total_time = 0.0;
  Nanoseconds t_lab{0};

  std::vector<EpochSample> samples;
  for (std::size_t k = 0; k < options.epochs; ++k) {
    const double sigma = moments(cloud)[static_cast<int>(Param::omega0)].sigma;
    const Setting setting = tau_design(sigma, config.tau, config.grid, design_rng);
    const double target = sigma > 0.0 ? config.tau.h / sigma : 0.0;
    const auto outcome =
        simulate_epoch(truth, setting, options.repeats_per_epoch, t_lab, instrument_rng);
    t_lab += outcome.duration;

    window.push_back({outcome.n_b, options.repeats_per_epoch});
    n_b_win += outcome.n_b;
    m_b_win += options.repeats_per_epoch;
    while (window.size() > config.window) {
      n_b_win -= window.front().first;
      m_b_win -= window.front().second;
      window.pop_front();
    }
    bayes_update(cloud, {outcome.n_s, options.repeats_per_epoch, n_b_win, m_b_win},
                 setting.tau_us());
    resample_if_needed(cloud);

    total_time += static_cast<double>(options.repeats_per_epoch) * setting.tau_us();
    samples.push_back({setting.tau_us(), sigma, moments(cloud)[static_cast<int>(Param::omega0)].sigma,
                       total_time, target >= min_us && target <= max_us});
  }
  return samples;
}

}  // namespace

TauScalingReport tau_scaling_experiment(const TruthConfig& truth, const RunConfig& base,
                                        const TauScalingOptions& options) {
  if (options.runs < 1 || options.epochs < 1 || options.repeats_per_epoch < 1)
    throw std::invalid_argument("tau scaling needs runs, epochs and repeats >= 1");
  TruthConfig ideal = truth;
  ideal.overhead = Nanoseconds{0};

  std::vector<std::vector<EpochSample>> runs;
  for (std::size_t r = 0; r < options.runs; ++r) runs.push_back(scaling_run(ideal, base, options, r));

  TauScalingReport report;
  report.h = base.tau.h;
  report.grid_step_us = static_cast<double>(base.grid.step_ns()) * 1e-3;
  const double n_runs = static_cast<double>(options.runs);
  for (std::size_t k = 0; k < options.epochs; ++k) {
    TauScalingEpoch e;
    e.epoch = k;
    bool all_in_range = true;
    for (const auto& run : runs) {
      const auto& s = run[k];
      e.mean_tau_us += s.tau_us / n_runs;
      e.mean_sigma_before += s.sigma_before / n_runs;
      e.mean_sigma_after += s.sigma_after / n_runs;
      e.mean_total_time_us += s.total_time_us / n_runs;
      e.mean_phase_uncertainty += s.tau_us * s.sigma_before / n_runs;
      e.in_range_fraction += (s.in_range ? 1.0 : 0.0) / n_runs;
      all_in_range = all_in_range && s.in_range;
    }
    report.epochs.push_back(e);
    if (all_in_range) report.fit_epochs.push_back(k);
  }
  if (report.fit_epochs.size() < 5)
    throw std::runtime_error("tau scaling fit needs at least 5 in-range epochs, found " +
                             std::to_string(report.fit_epochs.size()));

  std::vector<double> xs;
  std::vector<double> ys;
  double ratio_sum = 0.0;
  for (std::size_t k : report.fit_epochs) {
    for (const auto& run : runs) {
      ratio_sum += run[k].sigma_after / run[k].sigma_before;
      xs.push_back(std::log(run[k].total_time_us));
      ys.push_back(std::log(run[k].sigma_after));
    }
  }
  report.beta = ratio_sum / static_cast<double>(xs.size());

  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  report.slope = sxy / sxx;
  const double intercept = my - report.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + report.slope * xs[i]);
    sse += r * r;
  }
  report.slope_stderr = std::sqrt(sse / (n - 2.0) / sxx);
  const boost::math::students_t dist(n - 2.0);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  report.slope_ci_low = report.slope - t * report.slope_stderr;
  report.slope_ci_high = report.slope + t * report.slope_stderr;
  return report;
}

}  // namespace ramsey
