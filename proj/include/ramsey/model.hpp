#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <limits>
#include <string_view>

namespace ramsey {

using Nanoseconds = std::chrono::nanoseconds;

inline constexpr double kInfiniteT2 = std::numeric_limits<double>::infinity();

// Parameters of the ratio model. Angular frequency in rad/us, times in us.
// A T2 of +infinity means no dephasing envelope.
struct RamseyParams {
  double a = 0.8;
  double c = 0.13;
  double omega0 = 9.4;
  double t2 = kInfiniteT2;

  bool t2_is_infinite() const { return t2 == kInfiniteT2; }
  bool is_valid() const;
  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class Param : int { a = 0, c = 1, omega0 = 2, t2 = 3 };
inline constexpr std::array<Param, 4> kAllParams{Param::a, Param::c, Param::omega0, Param::t2};

std::string_view to_string(Param p);
double get(const RamseyParams& p, Param which);
void set(RamseyParams& p, Param which, double value);

// A precession-time setting, held in integer nanoseconds so that grid
// membership and lab-time accounting are exact.
struct Setting {
  std::int64_t tau_ns = 0;

  double tau_us() const { return static_cast<double>(tau_ns) * 1e-3; }
  Nanoseconds tau() const { return Nanoseconds(tau_ns); }
  friend bool operator==(const Setting&, const Setting&) = default;
};

struct CountRates {
  double lambda_s = 0.0;
  double lambda_b = 0.0;
};

// R = a {1 + (c/2) [1 + cos(omega0 tau)] exp[-(tau/T2)^2]}
double ratio(const RamseyParams& p, double tau_us);

CountRates count_rates(const RamseyParams& p, double tau_us, double lambda_b);

// Mean signal photon count over m_s sequences: m_s * R * lambda_b.
double expected_counts(const RamseyParams& p, double tau_us, std::int64_t m_s, double lambda_b);

}  // namespace ramsey
