#pragma once

#include <cstdint>

#include "ramsey/model.hpp"
#include "ramsey/rng.hpp"

namespace ramsey {

enum class DriftKind { none, linear, sinusoidal };

// Background-rate drift. `amplitude` is in photons per sequence.
//   linear:     lambda_b0 + amplitude * min(t / period, 1)
//   sinusoidal: lambda_b0 + amplitude * sin(2 pi t / period)
struct DriftModel {
  DriftKind kind = DriftKind::none;
  double amplitude = 0.0;
  Nanoseconds period{10'000'000'000};
};

struct TruthConfig {
  RamseyParams params{0.8, 0.13, 9.4, 10.0};
  double lambda_b0 = 0.15;
  Nanoseconds overhead{4070};
  DriftModel drift;

  // Rejects lambda_b0 <= 0, overhead <= 0 and drifts that can reach a
  // non-positive rate.
  void validate() const;
};

struct EpochOutcome {
  std::int64_t n_s = 0;
  std::int64_t n_b = 0;
  Nanoseconds duration{0};  // m_s * (tau + overhead)
};

double background_rate(const TruthConfig& truth, Nanoseconds t_now);

// One epoch of m_s sequences at `setting`, starting at lab time t_now.
// Signal and background photons come from the same sequences.
EpochOutcome simulate_epoch(const TruthConfig& truth, Setting setting, std::int64_t m_s,
                            Nanoseconds t_now, Rng& rng);

}  // namespace ramsey
