#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ramsey {

// Counts from one epoch: n_s signal photons over m_s sequences, and the
// background window total n_b over m_b sequences.
struct EpochData {
  std::int64_t n_s = 0;
  std::int64_t m_s = 1;
  std::int64_t n_b = 0;
  std::int64_t m_b = 1;

  void validate() const;
  EpochData doubled() const { return {2 * n_s, 2 * m_s, 2 * n_b, 2 * m_b}; }
};

// Prior exponent on the background rate that makes the likelihood
// self-consistent under data doubling.
inline constexpr double kConsistentPriorExponent = -1.0;

// Log relative likelihood of the ratio R with the background rate
// integrated out:
//   n_s ln R + (n_s + n_b) [ln(m_s + m_b) - ln(m_s R + m_b)]
// Defined up to an R-independent constant. Throws std::domain_error for R <= 0.
double log_likelihood(const EpochData& data, double R);

// Same family for real-valued counts and an arbitrary background prior
// exponent nu; the exponent on the bracket becomes n_s + n_b + 1 + nu.
// nu = -1 reproduces log_likelihood above.
double log_likelihood(double n_s, double m_s, double n_b, double m_b, double R,
                      double prior_exponent = kConsistentPriorExponent);

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureOptions {
  double relative_tolerance = 1e-10;
  int initial_intervals = 64;
  int max_refinements = 18;
};

// Log of the brute-force marginal
//   int Poisson(n_s; m_s R lambda) lambda^(n_b + nu) exp(-m_b lambda) dlambda
// evaluated by successively refined Simpson quadrature in log(lambda).
// Throws QuadratureError if refinement does not stabilise or the integral
// is improper (n_s + n_b + nu <= -1).
double marginal_likelihood_oracle_log(const EpochData& data, double R, double prior_exponent,
                                      const QuadratureOptions& options = {});

}  // namespace ramsey
