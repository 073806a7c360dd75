#include "ramsey/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ramsey {

void PriorSpec::validate() const {
  if (unknowns.empty()) throw std::invalid_argument("prior needs at least one unknown");
  for (std::size_t i = 0; i < unknowns.size(); ++i) {
    const auto& u = unknowns[i];
    if (!(u.bounds.lower < u.bounds.upper) || !std::isfinite(u.bounds.lower) ||
        !std::isfinite(u.bounds.upper))
      throw std::invalid_argument("prior bounds for " + std::string(to_string(u.param)) +
                                  " must satisfy lower < upper");
    for (std::size_t k = 0; k < i; ++k)
      if (unknowns[k].param == u.param)
        throw std::invalid_argument("duplicate unknown " + std::string(to_string(u.param)));
    // Every particle must be a valid RamseyParams.
    const double lo = u.bounds.lower;
    if ((u.param == Param::a || u.param == Param::t2) && !(lo > 0.0))
      throw std::invalid_argument("prior for " + std::string(to_string(u.param)) + " must be > 0");
    if ((u.param == Param::c || u.param == Param::omega0) && !(lo >= 0.0))
      throw std::invalid_argument("prior for " + std::string(to_string(u.param)) + " must be >= 0");
  }
  if (particles < 100) throw std::invalid_argument("particle count must be >= 100");
  if (!(resample_threshold > 0.0 && resample_threshold < 1.0))
    throw std::invalid_argument("resample threshold must lie in (0, 1)");
  if (!(shrinkage > 0.0 && shrinkage <= 1.0))
    throw std::invalid_argument("shrinkage must lie in (0, 1]");
}

PriorSpec PriorSpec::omega_only() {
  PriorSpec spec;
  spec.unknowns = {{Param::omega0, {1.0, 60.0}}};
  return spec;
}

PriorSpec PriorSpec::all_four() {
  PriorSpec spec;
  spec.unknowns = {{Param::a, {0.4, 1.2}},
                   {Param::c, {0.02, 0.3}},
                   {Param::omega0, {1.0, 60.0}},
                   {Param::t2, {2.0, 30.0}}};
  return spec;
}

const ParameterSummary* PosteriorSummary::find(Param p) const {
  for (const auto& s : params)
    if (s.param == p) return &s;
  return nullptr;
}

ParticleCloud::ParticleCloud(RamseyParams base, std::vector<UnknownPrior> unknowns,
                             std::vector<std::vector<double>> coordinates,
                             std::vector<double> weights, std::uint64_t seed,
                             double resample_threshold, double shrinkage)
    : base_(base),
      unknowns_(std::move(unknowns)),
      coords_(std::move(coordinates)),
      weights_(std::move(weights)),
      rng_(seed),
      resample_threshold_(resample_threshold),
      shrinkage_(shrinkage) {
  if (coords_.size() != unknowns_.size())
    throw std::invalid_argument("one coordinate column per unknown is required");
  if (weights_.empty()) throw std::invalid_argument("cloud must hold at least one particle");
  for (const auto& column : coords_)
    if (column.size() != weights_.size())
      throw std::invalid_argument("coordinate columns must match the weight count");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("weights must not all be zero");
  for (double& w : weights_) w /= total;
}

std::optional<std::size_t> ParticleCloud::unknown_index(Param p) const {
  for (std::size_t u = 0; u < unknowns_.size(); ++u)
    if (unknowns_[u].param == p) return u;
  return std::nullopt;
}

RamseyParams ParticleCloud::particle(std::size_t j) const {
  RamseyParams p = base_;
  for (std::size_t u = 0; u < unknowns_.size(); ++u) set(p, unknowns_[u].param, coords_[u][j]);
  return p;
}

double ParticleCloud::effective_sample_size() const {
  double sum_sq = 0.0;
  for (double w : weights_) sum_sq += w * w;
  return 1.0 / sum_sq;
}

ParticleCloud init_prior(const PriorSpec& spec, const RamseyParams& base, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::vector<std::vector<double>> coords;
  coords.reserve(spec.unknowns.size());
  for (const auto& u : spec.unknowns) {
    std::uniform_real_distribution<double> dist(u.bounds.lower, u.bounds.upper);
    std::vector<double> column(spec.particles);
    for (double& x : column) x = dist(rng);
    coords.push_back(std::move(column));
  }
  std::vector<double> weights(spec.particles, 1.0 / static_cast<double>(spec.particles));
  // The cloud continues on a stream distinct from the one that drew positions.
  return ParticleCloud(base, spec.unknowns, std::move(coords), std::move(weights),
                       derive_seed(seed, 1), spec.resample_threshold, spec.shrinkage);
}

void bayes_update(ParticleCloud& cloud, const EpochData& data, double tau_us,
                  double prior_exponent) {
  data.validate();
  auto& weights = cloud.mutable_weights();
  const std::size_t n = weights.size();
  const bool consistent = prior_exponent == kConsistentPriorExponent;
  const double n_s = static_cast<double>(data.n_s);
  const double m_s = static_cast<double>(data.m_s);
  const double n_b = static_cast<double>(data.n_b);
  const double m_b = static_cast<double>(data.m_b);

  std::vector<double> log_w(n);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (weights[j] <= 0.0) {
      log_w[j] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const double R = ratio(cloud.particle(j), tau_us);
    const double ll = consistent ? log_likelihood(data, R)
                                 : log_likelihood(n_s, m_s, n_b, m_b, R, prior_exponent);
    log_w[j] = std::log(weights[j]) + ll;
    max_log = std::max(max_log, log_w[j]);
  }
  if (!std::isfinite(max_log))
    throw std::runtime_error("posterior weight vanished for every particle (n_s=" +
                             std::to_string(data.n_s) + ", tau=" + std::to_string(tau_us) + ")");
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    weights[j] = std::exp(log_w[j] - max_log);
    total += weights[j];
  }
  for (double& w : weights) w /= total;
}

void resample(ParticleCloud& cloud) {
  const std::size_t n = cloud.size();
  const std::size_t dims = cloud.unknowns().size();
  const auto weights = cloud.weights();
  const auto before = moments(cloud);

  // Systematic resampling.
  std::vector<std::size_t> picks(n);
  {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double step = 1.0 / static_cast<double>(n);
    double target = unit(cloud.rng()) * step;
    double cumulative = weights[0];
    std::size_t source = 0;
    for (std::size_t j = 0; j < n; ++j) {
      while (target > cumulative && source + 1 < n) cumulative += weights[++source];
      picks[j] = source;
      target += step;
    }
  }

  const double a = cloud.shrinkage();
  const double kernel = std::sqrt(std::max(0.0, 1.0 - a * a));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t u = 0; u < dims; ++u) {
    auto& column = cloud.mutable_coordinate(u);
    std::vector<double> next(n);
    for (std::size_t j = 0; j < n; ++j) next[j] = column[picks[j]];
    const auto& prior = cloud.unknowns()[u];
    const auto& m = before[static_cast<int>(prior.param)];
    if (m.sigma > 0.0) {
      for (double& x : next) {
        const double moved = a * x + (1.0 - a) * m.mean + kernel * m.sigma * gauss(cloud.rng());
        x = std::clamp(moved, prior.bounds.lower, prior.bounds.upper);
      }
    }
    column = std::move(next);
  }
  auto& w = cloud.mutable_weights();
  std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
}

bool resample_if_needed(ParticleCloud& cloud) {
  const double n = static_cast<double>(cloud.size());
  if (cloud.effective_sample_size() >= cloud.resample_threshold() * n) return false;
  resample(cloud);
  return true;
}

std::array<Moments, 4> moments(const ParticleCloud& cloud) {
  std::array<Moments, 4> out;
  for (Param p : kAllParams) out[static_cast<int>(p)] = {get(cloud.base(), p), 0.0};
  const auto weights = cloud.weights();
  for (std::size_t u = 0; u < cloud.unknowns().size(); ++u) {
    const auto column = cloud.coordinate(u);
    double mean = 0.0;
    for (std::size_t j = 0; j < column.size(); ++j) mean += weights[j] * column[j];
    double var = 0.0;
    for (std::size_t j = 0; j < column.size(); ++j) {
      const double d = column[j] - mean;
      var += weights[j] * d * d;
    }
    out[static_cast<int>(cloud.unknowns()[u].param)] = {mean, std::sqrt(var)};
  }
  return out;
}

double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q) {
  if (values.empty() || values.size() != weights.size())
    throw std::invalid_argument("weighted_quantile needs matching non-empty inputs");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = q * total;
  double cumulative = 0.0;
  for (std::size_t idx : order) {
    cumulative += weights[idx];
    // Relative slack absorbs rounding in the running sum.
    if (cumulative >= target * (1.0 - 1e-12)) return values[idx];
  }
  return values[order.back()];
}

PosteriorSummary summarize(const ParticleCloud& cloud) {
  PosteriorSummary summary;
  const auto m = moments(cloud);
  for (std::size_t u = 0; u < cloud.unknowns().size(); ++u) {
    const Param p = cloud.unknowns()[u].param;
    ParameterSummary s;
    s.param = p;
    s.mean = m[static_cast<int>(p)].mean;
    s.sigma = m[static_cast<int>(p)].sigma;
    s.lower90 = weighted_quantile(cloud.coordinate(u), cloud.weights(), 0.05);
    s.upper90 = weighted_quantile(cloud.coordinate(u), cloud.weights(), 0.95);
    summary.params.push_back(s);
  }
  return summary;
}

}  // namespace ramsey
