#include "ramsey/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

namespace ramsey {

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

double lab_seconds(const EpochRecord& r) { return std::chrono::duration<double>(r.t_lab).count(); }
double sequences(const EpochRecord& r) { return static_cast<double>(r.cumulative_sequences); }

std::vector<double> log_grid(double lo, double hi, std::size_t per_decade) {
  std::vector<double> grid;
  if (!(lo > 0.0) || !(hi >= lo)) return grid;
  const double step = 1.0 / static_cast<double>(per_decade);
  const double first = std::ceil(std::log10(lo) / step - 1e-9) * step;
  for (double e = first; e <= std::log10(hi) + 1e-12; e += step) grid.push_back(std::pow(10.0, e));
  return grid;
}

// Latest record at or before x.
template <typename Key>
const EpochRecord* carried_forward(const RunTrace& trace, double x, Key key) {
  auto it = std::upper_bound(trace.epochs.begin(), trace.epochs.end(), x,
                             [&](double value, const EpochRecord& r) { return value < key(r); });
  if (it == trace.epochs.begin()) return nullptr;
  return &*std::prev(it);
}

template <typename Key>
std::vector<BatchPoint> resample(std::span<const RunTrace> traces, Key key, std::size_t per_decade,
                                 std::size_t& violations) {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& t : traces) {
    if (t.epochs.empty()) return {};
    lo = std::max(lo, key(t.epochs.front()));
    hi = std::min(hi, key(t.epochs.back()));
  }
  std::vector<BatchPoint> points;
  for (double x : log_grid(lo, hi, per_decade)) {
    std::vector<double> sigmas;
    std::vector<double> errors;
    double eta2 = 0.0;
    for (const auto& t : traces) {
      const EpochRecord* r = carried_forward(t, x, key);
      if (r == nullptr) continue;
      const auto& m = r->posterior[static_cast<int>(Param::omega0)];
      sigmas.push_back(m.sigma);
      errors.push_back(m.mean - t.truth.omega0);
      eta2 += sensitivity(m.sigma, lab_seconds(*r)).eta2;
    }
    if (sigmas.size() != traces.size()) continue;
    BatchPoint p;
    p.x = x;
    double sum = 0.0;
    for (double s : sigmas) sum += s;
    p.mean_sigma = sum / static_cast<double>(sigmas.size());
    p.p05_sigma = percentile(sigmas, 0.05);
    p.p95_sigma = percentile(sigmas, 0.95);
    double err_mean = 0.0;
    for (double e : errors) err_mean += e;
    err_mean /= static_cast<double>(errors.size());
    double err_var = 0.0;
    for (double e : errors) err_var += (e - err_mean) * (e - err_mean);
    p.error_std = std::sqrt(err_var / static_cast<double>(std::max<std::size_t>(1, errors.size() - 1)));
    p.mean_eta2 = eta2 / static_cast<double>(sigmas.size());
    if (p.mean_sigma < p.p05_sigma || p.mean_sigma > p.p95_sigma) ++violations;
    points.push_back(p);
  }
  return points;
}

}  // namespace

BatchSummary summarize_runs(std::span<const RunTrace> traces, const BatchOptions& options) {
  if (traces.empty()) throw std::invalid_argument("batch summary needs at least one run");
  BatchSummary summary;
  summary.protocol = traces.front().protocol;
  summary.runs = traces.size();
  summary.by_sequences = resample(traces, sequences, options.points_per_decade, summary.band_violations);
  summary.by_lab_time = resample(traces, lab_seconds, options.points_per_decade, summary.band_violations);
  return summary;
}

BatchSummary run_batch(const RunConfig& config, const TruthConfig& truth, std::size_t n_runs,
                       const BatchOptions& options) {
  if (n_runs < 2) throw std::invalid_argument("a batch needs at least two runs");
  config.validate(truth);

  std::vector<RunTrace> traces(n_runs);
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::optional<BatchError> failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t run = next.fetch_add(1);
      if (run >= n_runs) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      try {
        traces[run] = run_single(config, truth, run);
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure || run < failure->run_id())
          failure.emplace(run, derive_seed(config.seed, run), e.what());
      }
    }
  };

  std::size_t workers = options.workers != 0 ? options.workers : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, n_runs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) throw *failure;

  BatchSummary summary = summarize_runs(traces, options);
  if (options.keep_traces) summary.traces = std::move(traces);
  return summary;
}

}  // namespace ramsey
