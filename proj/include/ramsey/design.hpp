#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ramsey/model.hpp"
#include "ramsey/particles.hpp"
#include "ramsey/rng.hpp"

namespace ramsey {

// Evenly spaced precession times, start + k * step for k < count, in ns.
class SettingGrid {
 public:
  SettingGrid(std::int64_t start_ns, std::int64_t step_ns, std::size_t count);

  // Inclusive range; (max - min) must be a multiple of step.
  static SettingGrid from_range(std::int64_t min_ns, std::int64_t max_ns, std::int64_t step_ns);
  // 0.1 us to 20 us in 50 ns steps: 399 settings.
  static SettingGrid paper_default() { return from_range(100, 20000, 50); }

  std::size_t size() const { return count_; }
  std::int64_t start_ns() const { return start_ns_; }
  std::int64_t step_ns() const { return step_ns_; }
  std::int64_t max_ns() const { return start_ns_ + step_ns_ * static_cast<std::int64_t>(count_ - 1); }
  Setting at(std::size_t k) const { return {start_ns_ + step_ns_ * static_cast<std::int64_t>(k)}; }
  double tau_us(std::size_t k) const { return at(k).tau_us(); }
  std::optional<std::size_t> index_of(Setting s) const;
  bool contains(Setting s) const { return index_of(s).has_value(); }

  friend bool operator==(const SettingGrid&, const SettingGrid&) = default;

 private:
  std::int64_t start_ns_;
  std::int64_t step_ns_;
  std::size_t count_;
};

struct TauConfig {
  double h = 0.5;
  double top_fraction = 0.1;

  void validate() const;
};

// Utility per setting, aligned with the grid.
struct UtilityMap {
  std::vector<double> utility;
};

struct DesignOptions {
  // Divide the information proxy by the per-sequence duration tau + overhead.
  bool divide_by_duration = true;
  // When set, sample from p_k ~ exp((U_k / U_max - 1) / T) instead of argmax.
  std::optional<double> softmax_temperature;
};

struct DesignChoice {
  std::size_t index = 0;
  Setting setting;
  UtilityMap utility;
};

// Variance-ratio information proxy per setting:
//   y_j = R(theta_j, tau) * lambda_b
//   U(tau) = ln(1 + Var_w[y] / E_w[y]) / (tau + overhead)
UtilityMap utility_map(const ParticleCloud& cloud, const SettingGrid& grid, double lambda_b_estimate,
                       Nanoseconds overhead, const DesignOptions& options = {});

// Argmax of utility_map; ties within a relative 1e-12 of the maximum are
// broken uniformly at random.
DesignChoice bayes_design(const ParticleCloud& cloud, const SettingGrid& grid,
                          double lambda_b_estimate, Nanoseconds overhead, Rng& rng,
                          const DesignOptions& options = {});

// tau* = h / sigma. In range: nearest grid point, halfway ties to the smaller
// tau. Beyond the grid (or sigma <= 0): uniform over the largest
// ceil(top_fraction * size) settings.
Setting tau_design(double sigma_omega, const TauConfig& config, const SettingGrid& grid, Rng& rng);

Setting random_design(const SettingGrid& grid, Rng& rng);

}  // namespace ramsey
