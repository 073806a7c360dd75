#include "ramsey/runner.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <variant>

namespace ramsey {

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::bayes: return "bayes";
    case Protocol::tau: return "tau";
    case Protocol::random: return "random";
  }
  return "?";
}

std::string_view to_string(Unknowns u) {
  return u == Unknowns::omega_only ? "omega" : "all";
}

std::string_view to_string(Workflow w) {
  switch (w) {
    case Workflow::series: return "series";
    case Workflow::concurrent: return "concurrent";
    case Workflow::concurrent_deterministic: return "concurrent-deterministic";
  }
  return "?";
}

std::optional<Protocol> parse_protocol(std::string_view s) {
  if (s == "bayes") return Protocol::bayes;
  if (s == "tau") return Protocol::tau;
  if (s == "random") return Protocol::random;
  return std::nullopt;
}

std::optional<Unknowns> parse_unknowns(std::string_view s) {
  if (s == "omega" || s == "omega-only") return Unknowns::omega_only;
  if (s == "all" || s == "all-four") return Unknowns::all_four;
  return std::nullopt;
}

std::optional<Workflow> parse_workflow(std::string_view s) {
  if (s == "series") return Workflow::series;
  if (s == "concurrent") return Workflow::concurrent;
  if (s == "concurrent-deterministic") return Workflow::concurrent_deterministic;
  return std::nullopt;
}

Nanoseconds RunConfig::effective_epoch_time() const {
  if (epoch_time) return *epoch_time;
  if (protocol != Protocol::bayes) return Nanoseconds{4'000'000};
  return unknowns == Unknowns::omega_only ? Nanoseconds{4'400'000} : Nanoseconds{13'000'000};
}

PriorSpec RunConfig::prior_spec() const {
  PriorSpec spec;
  spec.particles = particles;
  spec.resample_threshold = resample_threshold;
  spec.shrinkage = shrinkage;
  auto add = [&](Param p) { spec.unknowns.push_back({p, prior_bounds[static_cast<int>(p)]}); };
  if (unknowns == Unknowns::all_four) {
    for (Param p : kAllParams) add(p);
  } else {
    add(Param::omega0);
  }
  return spec;
}

void RunConfig::validate(const TruthConfig& truth) const {
  truth.validate();
  prior_spec().validate();
  tau.validate();
  if (max_epochs.has_value() == lab_time_budget.has_value())
    throw std::invalid_argument("exactly one of the epoch budget and lab-time budget must be set");
  if (max_epochs && *max_epochs == 0) throw std::invalid_argument("epoch budget must be >= 1");
  if (lab_time_budget && lab_time_budget->count() <= 0)
    throw std::invalid_argument("lab-time budget must be > 0");
  if (effective_epoch_time() <= truth.overhead)
    throw std::invalid_argument("epoch time must exceed the per-sequence overhead");
  if (window < 1) throw std::invalid_argument("background window must be >= 1 epoch");
  if (!(lambda_b_guess > 0.0)) throw std::invalid_argument("background guess must be > 0");
  if (design.softmax_temperature && !(*design.softmax_temperature > 0.0))
    throw std::invalid_argument("softmax temperature must be > 0");
}

std::int64_t sequences_in(Nanoseconds allotted, Setting setting, Nanoseconds overhead) {
  const auto per_sequence = setting.tau() + overhead;
  return std::max<std::int64_t>(1, allotted / per_sequence);
}

SensitivityPoint sensitivity(double sigma_omega_rad_per_us, double t_lab_s) {
  if (!(t_lab_s > 0.0)) throw std::invalid_argument("sensitivity needs t_lab > 0");
  const double sigma_b = sigma_omega_rad_per_us * 1e6 / kGyromagneticRatio;
  return {t_lab_s, sigma_b, sigma_b * sigma_b * t_lab_s};
}

SnrEstimate snr_time(const TruthConfig& truth, Setting setting) {
  const auto& p = truth.params;
  SnrEstimate est;
  est.photons = (p.a / p.c) * (p.a / p.c);
  est.sequences = est.photons / (p.a * truth.lambda_b0);
  const double per_sequence_ns = static_cast<double>((setting.tau() + truth.overhead).count());
  est.duration = Nanoseconds(static_cast<std::int64_t>(std::llround(est.sequences * per_sequence_ns)));
  return est;
}

namespace {

// Single-slot blocking channel between the two actors of a concurrent run.
template <typename T>
class Rendezvous {
 public:
  void send(T value) {
    {
      std::unique_lock lock(mutex_);
      ready_.wait(lock, [&] { return !slot_.has_value(); });
      slot_ = std::move(value);
    }
    ready_.notify_all();
  }

  T receive() {
    T value;
    {
      std::unique_lock lock(mutex_);
      ready_.wait(lock, [&] { return slot_.has_value(); });
      value = std::move(*slot_);
      slot_.reset();
    }
    ready_.notify_all();
    return value;
  }

 private:
  std::mutex mutex_;
  std::condition_variable ready_;
  std::optional<T> slot_;
};

struct StartEpoch {
  Setting setting;
  Nanoseconds t_start{0};
};
struct StopEpoch {
  Nanoseconds elapsed{0};
};
struct Shutdown {};
using InstrumentCommand = std::variant<StartEpoch, StopEpoch, Shutdown>;

struct EpochReport {
  std::int64_t m_s = 0;
  EpochOutcome outcome;
};

// Posterior plus background window, i.e. everything the inference side owns.
class Estimator {
 public:
  Estimator(const RunConfig& config, const TruthConfig& truth, std::uint64_t seed)
      : config_(config),
        cloud_(init_prior(config.prior_spec(), truth.params, derive_seed(seed, 11))),
        design_rng_(make_rng(seed, 12)),
        latest_(moments(cloud_)) {}

  // Window totals after appending this epoch.
  std::pair<std::int64_t, std::int64_t> push_background(std::int64_t n_b, std::int64_t m_s) {
    window_.push_back({n_b, m_s});
    window_n_b_ += n_b;
    window_m_b_ += m_s;
    while (window_.size() > config_.window) {
      window_n_b_ -= window_.front().first;
      window_m_b_ -= window_.front().second;
      window_.pop_front();
    }
    return {window_n_b_, window_m_b_};
  }

  void incorporate(EpochRecord& record) {
    const auto [n_b_win, m_b_win] = push_background(record.n_b, record.m_s);
    record.n_b_window = n_b_win;
    record.m_b_window = m_b_win;
    const EpochData data{record.n_s, record.m_s, n_b_win, m_b_win};
    bayes_update(cloud_, data, record.setting.tau_us(), config_.prior_exponent);
    resample_if_needed(cloud_);
    latest_ = moments(cloud_);
    for (const auto& u : cloud_.unknowns()) {
      const auto& m = latest_[static_cast<int>(u.param)];
      if (!std::isfinite(m.mean) || !std::isfinite(m.sigma)) {
        std::ostringstream msg;
        msg << "non-finite posterior summary at epoch " << record.epoch << " (tau "
            << record.setting.tau_us() << " us, n_s " << record.n_s << ")";
        throw std::runtime_error(msg.str());
      }
    }
    record.posterior = latest_;
  }

  double lambda_b_estimate() const {
    if (window_m_b_ == 0) return config_.lambda_b_guess;
    if (window_n_b_ == 0) return 0.5 / static_cast<double>(window_m_b_);
    return static_cast<double>(window_n_b_) / static_cast<double>(window_m_b_);
  }

  Setting design(Nanoseconds overhead, std::vector<UtilityMap>* utilities) {
    switch (config_.protocol) {
      case Protocol::bayes: {
        auto choice = bayes_design(cloud_, config_.grid, lambda_b_estimate(), overhead, design_rng_,
                                   config_.design);
        if (utilities) utilities->push_back(std::move(choice.utility));
        return choice.setting;
      }
      case Protocol::tau:
        return tau_design(latest_[static_cast<int>(Param::omega0)].sigma, config_.tau, config_.grid,
                          design_rng_);
      case Protocol::random:
        return random_design(config_.grid, design_rng_);
    }
    return config_.grid.at(0);
  }

  const ParticleCloud& cloud() const { return cloud_; }

 private:
  const RunConfig& config_;
  ParticleCloud cloud_;
  Rng design_rng_;
  std::array<Moments, 4> latest_;
  std::deque<std::pair<std::int64_t, std::int64_t>> window_;
  std::int64_t window_n_b_ = 0;
  std::int64_t window_m_b_ = 0;
};

using Clock = std::chrono::steady_clock;

bool budget_exhausted(const RunConfig& config, std::size_t epochs_done, Nanoseconds t_lab) {
  if (config.max_epochs) return epochs_done >= *config.max_epochs;
  return t_lab >= *config.lab_time_budget;
}

void run_series(const RunConfig& config, const TruthConfig& truth, Estimator& estimator,
                Rng& instrument_rng, RunTrace& trace) {
  const bool charge_calc = config.protocol == Protocol::bayes;
  const Nanoseconds allotted = config.effective_epoch_time();
  auto* utilities = config.record_utility ? &trace.utilities : nullptr;
  Nanoseconds t_lab{0};
  std::int64_t cumulative = 0;
  for (std::size_t i = 0; !budget_exhausted(config, i, t_lab); ++i) {
    const auto start = Clock::now();
    const Setting setting = estimator.design(truth.overhead, utilities);
    const auto calc = std::chrono::duration_cast<Nanoseconds>(Clock::now() - start);

    EpochRecord record;
    record.epoch = i;
    record.setting = setting;
    record.design_through = static_cast<std::int64_t>(i) - 1;
    record.m_s = sequences_in(allotted, setting, truth.overhead);
    if (charge_calc) {
      // The instrument idles while the design is computed.
      t_lab += calc;
      record.t_calc_s = std::chrono::duration<double>(calc).count();
    }
    const auto outcome = simulate_epoch(truth, setting, record.m_s, t_lab, instrument_rng);
    record.n_s = outcome.n_s;
    record.n_b = outcome.n_b;
    t_lab += outcome.duration;
    cumulative += record.m_s;
    record.t_lab = t_lab;
    record.cumulative_sequences = cumulative;
    estimator.incorporate(record);
    trace.epochs.push_back(record);
  }
}

// Epoch i measures with a setting designed while epoch i-1 was measured, so
// it reflects data through epoch i-2. The inference actor owns the
// posterior; the instrument actor owns the photon stream. They exchange one
// setting and one report per epoch.
void run_concurrent(const RunConfig& config, const TruthConfig& truth, Estimator& estimator,
                    Rng instrument_rng, RunTrace& trace) {
  const bool deterministic = config.workflow == Workflow::concurrent_deterministic;
  const Nanoseconds allotted = config.effective_epoch_time();
  auto* utilities = config.record_utility ? &trace.utilities : nullptr;

  Rendezvous<InstrumentCommand> commands;
  Rendezvous<EpochReport> reports;

  std::jthread instrument([&truth, &commands, &reports, rng = std::move(instrument_rng)]() mutable {
    std::optional<StartEpoch> current;
    for (;;) {
      auto command = commands.receive();
      if (std::holds_alternative<Shutdown>(command)) return;
      if (auto* start = std::get_if<StartEpoch>(&command)) {
        current = *start;
        continue;
      }
      const auto elapsed = std::get<StopEpoch>(command).elapsed;
      EpochReport report;
      report.m_s = sequences_in(elapsed, current->setting, truth.overhead);
      report.outcome = simulate_epoch(truth, current->setting, report.m_s, current->t_start, rng);
      reports.send(report);
    }
  });

  std::int64_t pending_through = -1;
  Nanoseconds t_lab{0};
  std::int64_t cumulative = 0;
  bool failed = false;
  // Any throw must release the instrument thread before the join.
  try {
    Setting pending = estimator.design(truth.overhead, utilities);
    for (std::size_t i = 0; !budget_exhausted(config, i, t_lab); ++i) {
      commands.send(StartEpoch{pending, t_lab});

      const auto start = Clock::now();
      if (i > 0) estimator.incorporate(trace.epochs[i - 1]);
      const Setting next = estimator.design(truth.overhead, utilities);
      const auto calc = std::chrono::duration_cast<Nanoseconds>(Clock::now() - start);

      const Nanoseconds elapsed = deterministic ? allotted : calc;
      commands.send(StopEpoch{elapsed});
      const EpochReport report = reports.receive();

      EpochRecord record;
      record.epoch = i;
      record.setting = pending;
      record.design_through = pending_through;
      record.m_s = report.m_s;
      record.n_s = report.outcome.n_s;
      record.n_b = report.outcome.n_b;
      record.t_calc_s = std::chrono::duration<double>(elapsed).count();
      t_lab += report.outcome.duration;
      cumulative += record.m_s;
      record.t_lab = t_lab;
      record.cumulative_sequences = cumulative;
      trace.epochs.push_back(record);

      pending = next;
      pending_through = static_cast<std::int64_t>(i) - 1;
    }
    if (!trace.epochs.empty()) estimator.incorporate(trace.epochs.back());
  } catch (...) {
    failed = true;
    commands.send(Shutdown{});
    throw;
  }
  if (!failed) commands.send(Shutdown{});
  // The design for the epoch after the budget is never measured.
  if (utilities && utilities->size() > trace.epochs.size()) utilities->resize(trace.epochs.size());
}

}  // namespace

RunTrace run_single(const RunConfig& config, const TruthConfig& truth, std::size_t run_id) {
  config.validate(truth);
  RunTrace trace;
  trace.run_id = run_id;
  trace.seed = derive_seed(config.seed, run_id);
  trace.protocol = config.protocol;
  trace.unknowns = config.unknowns;
  trace.truth = truth.params;

  Estimator estimator(config, truth, trace.seed);
  Rng instrument_rng = make_rng(trace.seed, 13);
  // Tau and random designs cost nothing and their analysis time is not
  // charged, so only bayes runs distinguish the workflows.
  if (config.protocol == Protocol::bayes && config.workflow != Workflow::series) {
    run_concurrent(config, truth, estimator, std::move(instrument_rng), trace);
  } else {
    run_series(config, truth, estimator, instrument_rng, trace);
  }
  trace.final_summary = summarize(estimator.cloud());
  if (config.keep_final_cloud) trace.final_cloud = estimator.cloud();
  return trace;
}

}  // namespace ramsey
