#include "ramsey/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ramsey {

bool RamseyParams::is_valid() const {
  return std::isfinite(a) && a > 0.0 && std::isfinite(c) && c >= 0.0 && std::isfinite(omega0) &&
         omega0 >= 0.0 && (t2_is_infinite() || (std::isfinite(t2) && t2 > 0.0));
}

void RamseyParams::validate() const {
  if (!(std::isfinite(a) && a > 0.0)) throw std::invalid_argument("a must be > 0, got " + std::to_string(a));
  if (!(std::isfinite(c) && c >= 0.0)) throw std::invalid_argument("c must be >= 0, got " + std::to_string(c));
  if (!(std::isfinite(omega0) && omega0 >= 0.0))
    throw std::invalid_argument("omega0 must be >= 0, got " + std::to_string(omega0));
  if (!(t2_is_infinite() || (std::isfinite(t2) && t2 > 0.0)))
    throw std::invalid_argument("t2 must be > 0 or infinite, got " + std::to_string(t2));
}

std::string_view to_string(Param p) {
  switch (p) {
    case Param::a: return "a";
    case Param::c: return "c";
    case Param::omega0: return "omega0";
    case Param::t2: return "t2";
  }
  return "?";
}

double get(const RamseyParams& p, Param which) {
  switch (which) {
    case Param::a: return p.a;
    case Param::c: return p.c;
    case Param::omega0: return p.omega0;
    case Param::t2: return p.t2;
  }
  return 0.0;
}

void set(RamseyParams& p, Param which, double value) {
  switch (which) {
    case Param::a: p.a = value; break;
    case Param::c: p.c = value; break;
    case Param::omega0: p.omega0 = value; break;
    case Param::t2: p.t2 = value; break;
  }
}

double ratio(const RamseyParams& p, double tau_us) {
  double envelope = 1.0;
  if (!p.t2_is_infinite()) {
    const double x = tau_us / p.t2;
    envelope = std::exp(-x * x);
  }
  return p.a * (1.0 + 0.5 * p.c * (1.0 + std::cos(p.omega0 * tau_us)) * envelope);
}

CountRates count_rates(const RamseyParams& p, double tau_us, double lambda_b) {
  return {ratio(p, tau_us) * lambda_b, lambda_b};
}

double expected_counts(const RamseyParams& p, double tau_us, std::int64_t m_s, double lambda_b) {
  return static_cast<double>(m_s) * ratio(p, tau_us) * lambda_b;
}

}  // namespace ramsey
