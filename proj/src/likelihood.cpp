#include "ramsey/likelihood.hpp"

#include <algorithm>
#include <cmath>

namespace ramsey {

void EpochData::validate() const {
  if (m_s < 1) throw std::invalid_argument("m_s must be >= 1, got " + std::to_string(m_s));
  if (m_b < 1) throw std::invalid_argument("m_b must be >= 1, got " + std::to_string(m_b));
  if (n_s < 0 || n_b < 0) throw std::invalid_argument("photon counts must be >= 0");
}

double log_likelihood(double n_s, double m_s, double n_b, double m_b, double R,
                      double prior_exponent) {
  if (!(R > 0.0) || !std::isfinite(R))
    throw std::domain_error("likelihood ratio argument must be finite and > 0");
  const double exponent = n_s + n_b + 1.0 + prior_exponent;
  // ln[(m_s + m_b)/(m_s R + m_b)] = -log1p(m_s (R - 1) / (m_s + m_b))
  const double log_bracket = -std::log1p(m_s * (R - 1.0) / (m_s + m_b));
  const double signal_term = n_s == 0.0 ? 0.0 : n_s * std::log(R);
  return signal_term + exponent * log_bracket;
}

double log_likelihood(const EpochData& data, double R) {
  data.validate();
  return log_likelihood(static_cast<double>(data.n_s), static_cast<double>(data.m_s),
                        static_cast<double>(data.n_b), static_cast<double>(data.m_b), R,
                        kConsistentPriorExponent);
}

double marginal_likelihood_oracle_log(const EpochData& data, double R, double prior_exponent,
                                      const QuadratureOptions& options) {
  data.validate();
  if (!(R > 0.0)) throw std::domain_error("oracle ratio argument must be > 0");

  const double n_s = static_cast<double>(data.n_s);
  const double n_b = static_cast<double>(data.n_b);
  const double signal_rate = static_cast<double>(data.m_s) * R;  // per unit lambda_b
  const double m_b = static_cast<double>(data.m_b);

  // In s = ln(lambda) the integrand (times the Jacobian lambda) is
  //   exp(k s - beta e^s) * const, with k = n_s + n_b + nu + 1.
  const double k = n_s + n_b + prior_exponent + 1.0;
  const double beta = signal_rate + m_b;
  if (!(k > 0.0)) throw QuadratureError("oracle integral is improper for these counts");

  const double log_const = n_s * std::log(signal_rate) - std::lgamma(n_s + 1.0);
  auto log_integrand = [&](double s) { return k * s - beta * std::exp(s); };

  const double s_peak = std::log(k / beta);
  const double log_peak = log_integrand(s_peak);

  // Upper limit: the gamma-shaped peak in lambda plus a generous tail, and
  // never below n_b/m_b + 12 sqrt(n_b)/m_b.
  const double upper_lambda =
      std::max((k + 12.0 * std::sqrt(k) + 30.0) / beta, (n_b + 12.0 * std::sqrt(n_b)) / m_b);
  const double s_hi = std::log(upper_lambda);
  // Below the peak the log integrand drops by k (e^u - 1 - u) at u = s - s_peak;
  // this offset keeps the drop above ~45 for both small and large k.
  const double s_lo = s_peak - (45.0 / k + 10.0 / std::sqrt(k));

  auto simpson = [&](int intervals) {
    const double h = (s_hi - s_lo) / intervals;
    double sum = 0.0;
    for (int i = 0; i <= intervals; ++i) {
      const double weight = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      sum += weight * std::exp(log_integrand(s_lo + i * h) - log_peak);
    }
    return sum * h / 3.0;
  };

  int intervals = options.initial_intervals;
  double previous = simpson(intervals);
  for (int level = 0; level < options.max_refinements; ++level) {
    intervals *= 2;
    const double current = simpson(intervals);
    if (std::abs(current - previous) <= options.relative_tolerance * std::abs(current)) {
      return log_const + log_peak + std::log(current);
    }
    previous = current;
  }
  throw QuadratureError("oracle quadrature did not converge after " +
                        std::to_string(options.max_refinements) + " refinements");
}

}  // namespace ramsey
