#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ramsey/likelihood.hpp"
#include "ramsey/model.hpp"
#include "ramsey/rng.hpp"

namespace ramsey {

struct Bounds {
  double lower = 0.0;
  double upper = 1.0;
};

struct UnknownPrior {
  Param param = Param::omega0;
  Bounds bounds;
};

// Uniform priors over the unknown coordinates plus filter tuning.
struct PriorSpec {
  std::vector<UnknownPrior> unknowns;
  std::size_t particles = 50000;
  double resample_threshold = 0.5;
  double shrinkage = 0.98;

  void validate() const;

  // omega0 ~ U(1, 60) rad/us.
  static PriorSpec omega_only();
  // Adds a ~ U(0.4, 1.2), c ~ U(0.02, 0.3), T2 ~ U(2, 30) us.
  static PriorSpec all_four();
};

struct Moments {
  double mean = 0.0;
  double sigma = 0.0;

  friend bool operator==(const Moments&, const Moments&) = default;
};

struct ParameterSummary {
  Param param = Param::omega0;
  double mean = 0.0;
  double sigma = 0.0;
  double lower90 = 0.0;  // weighted 5th percentile
  double upper90 = 0.0;  // weighted 95th percentile
};

struct PosteriorSummary {
  std::vector<ParameterSummary> params;

  const ParameterSummary* find(Param p) const;
};

// Weighted sample of the posterior over the unknown coordinates. Known
// coordinates are held once in `base`. Weights always sum to one.
class ParticleCloud {
 public:
  ParticleCloud(RamseyParams base, std::vector<UnknownPrior> unknowns,
                std::vector<std::vector<double>> coordinates, std::vector<double> weights,
                std::uint64_t seed, double resample_threshold = 0.5, double shrinkage = 0.98);

  std::size_t size() const { return weights_.size(); }
  const RamseyParams& base() const { return base_; }
  const std::vector<UnknownPrior>& unknowns() const { return unknowns_; }
  std::span<const double> weights() const { return weights_; }
  // Coordinate column of unknown number `u` (index into unknowns()).
  std::span<const double> coordinate(std::size_t u) const { return coords_[u]; }
  std::optional<std::size_t> unknown_index(Param p) const;
  RamseyParams particle(std::size_t j) const;

  double resample_threshold() const { return resample_threshold_; }
  double shrinkage() const { return shrinkage_; }
  double effective_sample_size() const;

  Rng& rng() { return rng_; }

  // Mutating access for the filter operations.
  std::vector<double>& mutable_weights() { return weights_; }
  std::vector<double>& mutable_coordinate(std::size_t u) { return coords_[u]; }

 private:
  RamseyParams base_;
  std::vector<UnknownPrior> unknowns_;
  std::vector<std::vector<double>> coords_;
  std::vector<double> weights_;
  Rng rng_;
  double resample_threshold_;
  double shrinkage_;
};

ParticleCloud init_prior(const PriorSpec& spec, const RamseyParams& base, std::uint64_t seed);

// Multiplies each weight by the epoch likelihood of its ratio at tau and
// renormalises. Positions are untouched. prior_exponent other than -1 is only
// for studying the inconsistent background prior.
void bayes_update(ParticleCloud& cloud, const EpochData& data, double tau_us,
                  double prior_exponent = kConsistentPriorExponent);

// Resamples and jitters when ESS < threshold * N. Returns true if it resampled.
bool resample_if_needed(ParticleCloud& cloud);

// Unconditional systematic resample plus shrinkage kernel jitter.
void resample(ParticleCloud& cloud);

// Weighted mean and standard deviation for every parameter. Fixed
// coordinates report their value with sigma 0.
std::array<Moments, 4> moments(const ParticleCloud& cloud);

PosteriorSummary summarize(const ParticleCloud& cloud);

// Weighted quantile: the smallest value whose cumulative weight reaches q.
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q);

}  // namespace ramsey
