#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "ramsey/runner.hpp"

using namespace ramsey;

namespace {

RunConfig small(Protocol p, std::size_t epochs = 60) {
  RunConfig c;
  c.protocol = p;
  c.particles = 500;
  c.max_epochs = epochs;
  c.lab_time_budget.reset();
  return c;
}

bool same_trace(const RunTrace& a, const RunTrace& b) {
  if (a.epochs.size() != b.epochs.size()) return false;
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    const auto& x = a.epochs[i];
    const auto& y = b.epochs[i];
    if (!(x.setting == y.setting) || x.m_s != y.m_s || x.n_s != y.n_s || x.n_b != y.n_b || x.t_lab != y.t_lab)
      return false;
    for (int k = 0; k < 4; ++k)
      if (x.posterior[k].mean != y.posterior[k].mean || x.posterior[k].sigma != y.posterior[k].sigma) return false;
  }
  return true;
}

void check_accounting(const RunTrace& trace, Nanoseconds overhead) {
  Nanoseconds t{0};
  std::int64_t seq = 0;
  for (const auto& r : trace.epochs) {
    t += r.m_s * (r.setting.tau() + overhead);
    seq += r.m_s;
    CHECK(r.t_lab == t);
    CHECK(r.cumulative_sequences == seq);
  }
}

}  // namespace

TEST_CASE("sequences per allotment") {
  CHECK(sequences_in(Nanoseconds{4'000'000}, Setting{10'000}, Nanoseconds{4070}) == 284);
  CHECK(sequences_in(Nanoseconds{1000}, Setting{20'000}, Nanoseconds{4070}) == 1);
}

TEST_CASE("tau and random runs: accounting, lag and window") {
  TruthConfig truth;
  for (Protocol p : {Protocol::tau, Protocol::random}) {
    auto cfg = small(p, 80);
    cfg.window = 7;
    const auto trace = run_single(cfg, truth, 3);
    REQUIRE(trace.epochs.size() == 80);
    check_accounting(trace, truth.overhead);
    for (std::size_t i = 0; i < trace.epochs.size(); ++i) {
      const auto& r = trace.epochs[i];
      CHECK(r.epoch == i);
      CHECK(r.t_calc_s == 0.0);
      CHECK(r.design_through == static_cast<std::int64_t>(i) - 1);
      CHECK(r.m_s == sequences_in(Nanoseconds{4'000'000}, r.setting, truth.overhead));
      std::int64_t m_b = 0, n_b = 0;
      for (std::size_t k = i + 1 - std::min<std::size_t>(7, i + 1); k <= i; ++k) {
        m_b += trace.epochs[k].m_s;
        n_b += trace.epochs[k].n_b;
      }
      CHECK(r.m_b_window == m_b);
      CHECK(r.n_b_window == n_b);
    }
  }
}

TEST_CASE("concurrent-deterministic bayes: one-epoch design lag") {
  TruthConfig truth;
  auto cfg = small(Protocol::bayes, 40);
  const auto trace = run_single(cfg, truth);
  check_accounting(trace, truth.overhead);
  for (std::size_t i = 0; i < trace.epochs.size(); ++i) {
    const auto& r = trace.epochs[i];
    // The setting for epoch i never sees data from epoch i-1.
    CHECK(r.design_through == std::max<std::int64_t>(-1, static_cast<std::int64_t>(i) - 2));
    CHECK(r.t_calc_s == doctest::Approx(0.0044));
    CHECK(r.m_s == sequences_in(Nanoseconds{4'400'000}, r.setting, truth.overhead));
  }
}

TEST_CASE("series bayes designs from all previous data and charges design time") {
  TruthConfig truth;
  auto cfg = small(Protocol::bayes, 20);
  cfg.workflow = Workflow::series;
  const auto trace = run_single(cfg, truth);
  Nanoseconds t{0};
  for (std::size_t i = 0; i < trace.epochs.size(); ++i) {
    const auto& r = trace.epochs[i];
    CHECK(r.design_through == static_cast<std::int64_t>(i) - 1);
    CHECK(r.t_calc_s > 0.0);
    t += r.m_s * (r.setting.tau() + truth.overhead);
    CHECK(r.t_lab >= t);
  }
}

TEST_CASE("concurrent bayes uses measured design time as epoch length") {
  TruthConfig truth;
  auto cfg = small(Protocol::bayes, 20);
  cfg.workflow = Workflow::concurrent;
  const auto trace = run_single(cfg, truth);
  REQUIRE(trace.epochs.size() == 20);
  check_accounting(trace, truth.overhead);
  for (const auto& r : trace.epochs) {
    CHECK(r.t_calc_s > 0.0);
    const auto allotted = Nanoseconds{static_cast<std::int64_t>(std::llround(r.t_calc_s * 1e9))};
    CHECK(r.m_s == sequences_in(allotted, r.setting, truth.overhead));
  }
}

TEST_CASE("cumulative fields never decrease") {
  TruthConfig truth;
  const auto trace = run_single(small(Protocol::random, 100), truth);
  for (std::size_t i = 1; i < trace.epochs.size(); ++i) {
    CHECK(trace.epochs[i].t_lab >= trace.epochs[i - 1].t_lab);
    CHECK(trace.epochs[i].cumulative_sequences >= trace.epochs[i - 1].cumulative_sequences);
  }
}

TEST_CASE("lab-time budget completes the epoch that exhausts it") {
  TruthConfig truth;
  auto cfg = small(Protocol::tau);
  cfg.max_epochs.reset();
  cfg.lab_time_budget = Nanoseconds{50'000'000};
  const auto trace = run_single(cfg, truth);
  REQUIRE(trace.epochs.size() >= 2);
  CHECK(trace.epochs.back().t_lab >= *cfg.lab_time_budget);
  CHECK(trace.epochs[trace.epochs.size() - 2].t_lab < *cfg.lab_time_budget);
}

TEST_CASE("deterministic runs reproduce exactly; seeds matter") {
  TruthConfig truth;
  for (Protocol p : {Protocol::bayes, Protocol::tau, Protocol::random}) {
    auto cfg = small(p, 30);
    const auto a = run_single(cfg, truth, 2);
    const auto b = run_single(cfg, truth, 2);
    CHECK(same_trace(a, b));
    const auto other_run = run_single(cfg, truth, 3);
    CHECK_FALSE(same_trace(a, other_run));
    cfg.seed = 99;
    CHECK_FALSE(same_trace(a, run_single(cfg, truth, 2)));
  }
}

TEST_CASE("four unknowns run and report every coordinate") {
  TruthConfig truth;
  auto cfg = small(Protocol::bayes, 10);
  cfg.unknowns = Unknowns::all_four;
  cfg.record_utility = true;
  cfg.keep_final_cloud = true;
  const auto trace = run_single(cfg, truth);
  CHECK(trace.final_summary.params.size() == 4);
  CHECK(trace.utilities.size() == trace.epochs.size());
  REQUIRE(trace.final_cloud.has_value());
  CHECK(trace.final_cloud->unknowns().size() == 4);
  for (const auto& m : trace.epochs.back().posterior) CHECK(m.sigma > 0.0);
}

TEST_CASE("configuration validation") {
  TruthConfig truth;
  auto cfg = small(Protocol::tau);
  cfg.lab_time_budget = Nanoseconds{1'000'000'000};
  CHECK_THROWS_AS(cfg.validate(truth), std::invalid_argument);
  cfg = small(Protocol::tau);
  cfg.max_epochs.reset();
  CHECK_THROWS_AS(cfg.validate(truth), std::invalid_argument);
  cfg = small(Protocol::tau);
  cfg.epoch_time = Nanoseconds{4070};
  CHECK_THROWS_AS(cfg.validate(truth), std::invalid_argument);
  cfg = small(Protocol::tau);
  cfg.window = 0;
  CHECK_THROWS_AS(cfg.validate(truth), std::invalid_argument);
  CHECK(small(Protocol::tau).effective_epoch_time() == Nanoseconds{4'000'000});
  auto four = small(Protocol::bayes);
  four.unknowns = Unknowns::all_four;
  CHECK(four.effective_epoch_time() == Nanoseconds{13'000'000});
}

TEST_CASE("names round-trip") {
  for (Protocol p : {Protocol::bayes, Protocol::tau, Protocol::random}) CHECK(parse_protocol(to_string(p)) == p);
  for (Unknowns u : {Unknowns::omega_only, Unknowns::all_four}) CHECK(parse_unknowns(to_string(u)) == u);
  for (Workflow w : {Workflow::series, Workflow::concurrent, Workflow::concurrent_deterministic})
    CHECK(parse_workflow(to_string(w)) == w);
  CHECK_FALSE(parse_protocol("greedy").has_value());
}

TEST_CASE("sensitivity conversion") {
  const auto s = sensitivity(1.0, 1.0);
  CHECK(s.sigma_b_t == doctest::Approx(5.684e-6).epsilon(1e-3));
  CHECK(s.eta2 == doctest::Approx(3.231e-11).epsilon(1e-3));
  CHECK(s.eta2 == doctest::Approx(s.sigma_b_t * s.sigma_b_t * s.t_lab_s));
  CHECK(sensitivity(0.0, 2.0).eta2 == 0.0);
  CHECK_THROWS(sensitivity(1.0, 0.0));
  // sigma ~ t^-1/2 keeps eta^2 flat.
  const double k = 0.02;
  const double ref = sensitivity(k, 1.0).eta2;
  for (double t : {0.5, 2.0, 7.0, 30.0}) CHECK(sensitivity(k / std::sqrt(t), t).eta2 == doctest::Approx(ref));
}

TEST_CASE("time to unit SNR") {
  TruthConfig truth;
  const auto est = snr_time(truth, Setting{10'000});
  CHECK(est.photons == doctest::Approx(37.87).epsilon(1e-3));
  CHECK(est.sequences == doctest::Approx(315.6).epsilon(1e-3));
  CHECK(std::chrono::duration<double>(est.duration).count() == doctest::Approx(4.44e-3).epsilon(1e-2));
}
