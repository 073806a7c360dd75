#include "ramsey/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ramsey {

void TruthConfig::validate() const {
  params.validate();
  if (!(lambda_b0 > 0.0) || !std::isfinite(lambda_b0))
    throw std::invalid_argument("background rate must be > 0");
  if (overhead.count() <= 0) throw std::invalid_argument("overhead must be > 0");
  switch (drift.kind) {
    case DriftKind::none:
      break;
    case DriftKind::linear:
      if (drift.period.count() <= 0) throw std::invalid_argument("drift period must be > 0");
      if (!(lambda_b0 + drift.amplitude > 0.0))
        throw std::invalid_argument("linear drift reaches a non-positive background rate");
      break;
    case DriftKind::sinusoidal:
      if (drift.period.count() <= 0) throw std::invalid_argument("drift period must be > 0");
      if (!(std::abs(drift.amplitude) < lambda_b0))
        throw std::invalid_argument("sinusoidal drift amplitude must be below the base rate");
      break;
  }
}

double background_rate(const TruthConfig& truth, Nanoseconds t_now) {
  const double t = static_cast<double>(t_now.count());
  const double period = static_cast<double>(truth.drift.period.count());
  switch (truth.drift.kind) {
    case DriftKind::none:
      return truth.lambda_b0;
    case DriftKind::linear:
      return truth.lambda_b0 + truth.drift.amplitude * std::min(t / period, 1.0);
    case DriftKind::sinusoidal:
      return truth.lambda_b0 + truth.drift.amplitude * std::sin(2.0 * std::numbers::pi * t / period);
  }
  return truth.lambda_b0;
}

namespace {

std::int64_t draw_poisson(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

}  // namespace

EpochOutcome simulate_epoch(const TruthConfig& truth, Setting setting, std::int64_t m_s,
                            Nanoseconds t_now, Rng& rng) {
  if (m_s < 1) throw std::invalid_argument("an epoch needs at least one sequence");
  const double lambda_b = background_rate(truth, t_now);
  const double tau_us = setting.tau_us();
  EpochOutcome out;
  out.n_s = draw_poisson(expected_counts(truth.params, tau_us, m_s, lambda_b), rng);
  out.n_b = draw_poisson(static_cast<double>(m_s) * lambda_b, rng);
  out.duration = m_s * (setting.tau() + truth.overhead);
  return out;
}

}  // namespace ramsey
