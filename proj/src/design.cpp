#include "ramsey/design.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ramsey {

SettingGrid::SettingGrid(std::int64_t start_ns, std::int64_t step_ns, std::size_t count)
    : start_ns_(start_ns), step_ns_(step_ns), count_(count) {
  if (start_ns < 0) throw std::invalid_argument("grid start must be >= 0");
  if (step_ns <= 0) throw std::invalid_argument("grid step must be > 0");
  if (count == 0) throw std::invalid_argument("grid must hold at least one setting");
}

SettingGrid SettingGrid::from_range(std::int64_t min_ns, std::int64_t max_ns, std::int64_t step_ns) {
  if (step_ns <= 0) throw std::invalid_argument("grid step must be > 0");
  if (max_ns < min_ns) throw std::invalid_argument("grid max must be >= grid min");
  if ((max_ns - min_ns) % step_ns != 0)
    throw std::invalid_argument("grid range must be a whole number of steps");
  return SettingGrid(min_ns, step_ns, static_cast<std::size_t>((max_ns - min_ns) / step_ns + 1));
}

std::optional<std::size_t> SettingGrid::index_of(Setting s) const {
  const std::int64_t offset = s.tau_ns - start_ns_;
  if (offset < 0 || offset % step_ns_ != 0) return std::nullopt;
  const auto k = static_cast<std::size_t>(offset / step_ns_);
  if (k >= count_) return std::nullopt;
  return k;
}

void TauConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("tau.h must be > 0");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0))
    throw std::invalid_argument("tau.top_fraction must lie in (0, 1]");
}

namespace {

// Settings between exact trig/exp re-evaluations in the recurrence scan.
constexpr std::size_t kAnchorStride = 32;

}  // namespace

UtilityMap utility_map(const ParticleCloud& cloud, const SettingGrid& grid, double lambda_b_estimate,
                       Nanoseconds overhead, const DesignOptions& options) {
  if (!(lambda_b_estimate > 0.0) || !std::isfinite(lambda_b_estimate))
    throw std::domain_error("background rate estimate must be > 0 for utility evaluation");

  const std::size_t count = grid.size();
  const double step_us = static_cast<double>(grid.step_ns()) * 1e-3;

  // Deviations are accumulated relative to the model at the posterior mean,
  // which keeps the variance well conditioned once the cloud is narrow.
  RamseyParams centre = cloud.base();
  {
    const auto m = moments(cloud);
    for (const auto& u : cloud.unknowns()) set(centre, u.param, m[static_cast<int>(u.param)].mean);
  }
  std::vector<double> reference(count);
  for (std::size_t k = 0; k < count; ++k) reference[k] = ratio(centre, grid.tau_us(k));

  std::vector<double> sum1(count, 0.0);
  std::vector<double> sum2(count, 0.0);
  const auto weights = cloud.weights();

  for (std::size_t j = 0; j < cloud.size(); ++j) {
    const double w = weights[j];
    if (w == 0.0) continue;
    const RamseyParams p = cloud.particle(j);
    const double half_ac = 0.5 * p.a * p.c;
    const double rot_c = std::cos(p.omega0 * step_us);
    const double rot_s = std::sin(p.omega0 * step_us);
    const bool decays = !p.t2_is_infinite();
    const double inv_t2_sq = decays ? 1.0 / (p.t2 * p.t2) : 0.0;
    const double env_q = decays ? std::exp(-2.0 * step_us * step_us * inv_t2_sq) : 1.0;

    for (std::size_t block = 0; block < count; block += kAnchorStride) {
      const double tau0 = grid.tau_us(block);
      double cr = std::cos(p.omega0 * tau0);
      double ci = std::sin(p.omega0 * tau0);
      double env = 1.0;
      double env_g = 1.0;
      if (decays) {
        env = std::exp(-tau0 * tau0 * inv_t2_sq);
        env_g = std::exp(-(2.0 * tau0 * step_us + step_us * step_us) * inv_t2_sq);
      }
      const std::size_t end = std::min(count, block + kAnchorStride);
      for (std::size_t k = block; k < end; ++k) {
        const double R = p.a + half_ac * (1.0 + cr) * env;
        const double d = R - reference[k];
        sum1[k] += w * d;
        sum2[k] += w * d * d;
        const double next_cr = cr * rot_c - ci * rot_s;
        ci = cr * rot_s + ci * rot_c;
        cr = next_cr;
        env *= env_g;
        env_g *= env_q;
      }
    }
  }

  const double overhead_us = static_cast<double>(overhead.count()) * 1e-3;
  UtilityMap map;
  map.utility.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    double var_r = sum2[k] - sum1[k] * sum1[k];
    // Cancellation residue from identical particles is not spread.
    if (var_r <= 1e-13 * sum2[k]) var_r = 0.0;
    const double mean_r = reference[k] + sum1[k];
    const double pred_var = lambda_b_estimate * lambda_b_estimate * var_r;
    const double noise_var = lambda_b_estimate * mean_r;
    double u = std::log1p(pred_var / noise_var);
    if (options.divide_by_duration) u /= grid.tau_us(k) + overhead_us;
    map.utility[k] = u;
  }
  return map;
}

DesignChoice bayes_design(const ParticleCloud& cloud, const SettingGrid& grid,
                          double lambda_b_estimate, Nanoseconds overhead, Rng& rng,
                          const DesignOptions& options) {
  DesignChoice choice;
  choice.utility = utility_map(cloud, grid, lambda_b_estimate, overhead, options);
  const auto& u = choice.utility.utility;
  for (double v : u)
    if (!std::isfinite(v)) throw std::runtime_error("non-finite utility value");
  const double best = *std::max_element(u.begin(), u.end());

  if (options.softmax_temperature) {
    const double temperature = *options.softmax_temperature;
    if (!(temperature > 0.0)) throw std::invalid_argument("softmax temperature must be > 0");
    std::vector<double> p(u.size(), 1.0);
    if (best > 0.0)
      for (std::size_t k = 0; k < u.size(); ++k) p[k] = std::exp((u[k] / best - 1.0) / temperature);
    std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
    choice.index = pick(rng);
  } else {
    const double cutoff = best - 1e-12 * std::abs(best);
    std::vector<std::size_t> ties;
    for (std::size_t k = 0; k < u.size(); ++k)
      if (u[k] >= cutoff) ties.push_back(k);
    std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
    choice.index = ties.size() == 1 ? ties.front() : ties[pick(rng)];
  }
  choice.setting = grid.at(choice.index);
  return choice;
}

Setting tau_design(double sigma_omega, const TauConfig& config, const SettingGrid& grid, Rng& rng) {
  config.validate();
  const double max_us = static_cast<double>(grid.max_ns()) * 1e-3;
  const double target_us = sigma_omega > 0.0 ? config.h / sigma_omega : 0.0;
  if (sigma_omega > 0.0 && std::isfinite(target_us) && target_us <= max_us) {
    const double x = (target_us * 1e3 - static_cast<double>(grid.start_ns())) /
                     static_cast<double>(grid.step_ns());
    if (x <= 0.0) return grid.at(0);
    const double lower = std::floor(x);
    auto k = static_cast<std::size_t>(lower);
    if (x - lower > 0.5) ++k;
    return grid.at(std::min(k, grid.size() - 1));
  }
  const auto top = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(config.top_fraction * static_cast<double>(grid.size()) - 1e-9)));
  std::uniform_int_distribution<std::size_t> pick(grid.size() - std::min(top, grid.size()), grid.size() - 1);
  return grid.at(pick(rng));
}

Setting random_design(const SettingGrid& grid, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  return grid.at(pick(rng));
}

}  // namespace ramsey
