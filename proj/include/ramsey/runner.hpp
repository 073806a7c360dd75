#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ramsey/design.hpp"
#include "ramsey/instrument.hpp"
#include "ramsey/particles.hpp"

namespace ramsey {

enum class Protocol { bayes, tau, random };
enum class Unknowns { omega_only, all_four };
enum class Workflow { series, concurrent, concurrent_deterministic };

std::string_view to_string(Protocol p);
std::string_view to_string(Unknowns u);
std::string_view to_string(Workflow w);
std::optional<Protocol> parse_protocol(std::string_view s);
std::optional<Unknowns> parse_unknowns(std::string_view s);
std::optional<Workflow> parse_workflow(std::string_view s);

struct RunConfig {
  Protocol protocol = Protocol::bayes;
  Unknowns unknowns = Unknowns::omega_only;

  // Exactly one budget. The run stops after the epoch that exhausts it.
  std::optional<std::size_t> max_epochs;
  std::optional<Nanoseconds> lab_time_budget = Nanoseconds{2'000'000'000};

  // Time allocated per epoch. Unset: 4 ms for tau/random; for bayes 4.4 ms
  // (omega only) or 13 ms (all four).
  std::optional<Nanoseconds> epoch_time;

  std::size_t window = 20;  // background moving window, epochs
  std::uint64_t seed = 1;
  Workflow workflow = Workflow::concurrent_deterministic;
  double lambda_b_guess = 0.15;  // used before any background data exist
  double prior_exponent = kConsistentPriorExponent;

  std::size_t particles = 50000;
  double resample_threshold = 0.5;
  double shrinkage = 0.98;
  std::array<Bounds, 4> prior_bounds{Bounds{0.4, 1.2}, Bounds{0.02, 0.3}, Bounds{1.0, 60.0},
                                     Bounds{2.0, 30.0}};

  TauConfig tau;
  DesignOptions design;
  SettingGrid grid = SettingGrid::paper_default();
  bool record_utility = false;
  bool keep_final_cloud = false;

  Nanoseconds effective_epoch_time() const;
  PriorSpec prior_spec() const;
  void validate(const TruthConfig& truth) const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  Setting setting;
  std::int64_t m_s = 0;
  std::int64_t n_s = 0;
  std::int64_t n_b = 0;  // this epoch only
  std::int64_t n_b_window = 0;
  std::int64_t m_b_window = 0;
  std::int64_t cumulative_sequences = 0;
  Nanoseconds t_lab{0};  // cumulative at the end of the epoch
  double t_calc_s = 0.0;
  // Last epoch whose data informed `setting`; -1 means the prior alone.
  std::int64_t design_through = -1;
  // Posterior after incorporating this epoch, indexed by Param.
  std::array<Moments, 4> posterior{};
};

struct RunTrace {
  std::size_t run_id = 0;
  std::uint64_t seed = 0;
  Protocol protocol = Protocol::bayes;
  Unknowns unknowns = Unknowns::omega_only;
  RamseyParams truth;
  std::vector<EpochRecord> epochs;
  PosteriorSummary final_summary;
  std::vector<UtilityMap> utilities;  // per epoch, when record_utility is set
  std::optional<ParticleCloud> final_cloud;  // when keep_final_cloud is set
};

RunTrace run_single(const RunConfig& config, const TruthConfig& truth, std::size_t run_id = 0);

// Sequences that fit in `allotted`: floor(allotted / (tau + overhead)), at least 1.
std::int64_t sequences_in(Nanoseconds allotted, Setting setting, Nanoseconds overhead);

// gamma = 2 pi * 28 GHz/T, in rad s^-1 T^-1.
inline constexpr double kGyromagneticRatio = 2.0 * 3.14159265358979323846 * 28e9;

struct SensitivityPoint {
  double t_lab_s = 0.0;
  double sigma_b_t = 0.0;
  double eta2 = 0.0;  // T^2 s
};

SensitivityPoint sensitivity(double sigma_omega_rad_per_us, double t_lab_s);

// Time for one epoch at `setting` to reach SNR ~ 1: the photon count n with
// 1/sqrt(n) = c/a, converted to sequences and lab time.
struct SnrEstimate {
  double photons = 0.0;
  double sequences = 0.0;
  Nanoseconds duration{0};
};

SnrEstimate snr_time(const TruthConfig& truth, Setting setting);

}  // namespace ramsey
