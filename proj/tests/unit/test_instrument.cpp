#include <doctest.h>

#include <cmath>
#include <memory>

#include "ramsey/instrument.hpp"

using namespace ramsey;

TEST_CASE("signal counts follow the model mean") {
  TruthConfig truth;
  truth.params.t2 = kInfiniteT2;
  Rng rng(42);
  double sum = 0.0, sum_b = 0.0;
  const int epochs = 10000;
  for (int i = 0; i < epochs; ++i) {
    const auto out = simulate_epoch(truth, Setting{0}, 100, Nanoseconds{0}, rng);
    sum += static_cast<double>(out.n_s);
    sum_b += static_cast<double>(out.n_b);
  }
  const double mean = 13.56;
  CHECK(std::abs(sum / epochs - mean) < 3.0 * std::sqrt(mean / epochs) * std::sqrt(mean));
  CHECK(std::abs(sum_b / epochs - 15.0) < 5.0 * std::sqrt(15.0 / epochs));
}

TEST_CASE("epoch duration is exact") {
  TruthConfig truth;
  Rng rng(1);
  const auto out = simulate_epoch(truth, Setting{10000}, 284, Nanoseconds{0}, rng);
  CHECK(out.duration == Nanoseconds{284 * (10000 + 4070)});
}

TEST_CASE("vanishing background gives no photons") {
  TruthConfig truth;
  truth.lambda_b0 = 1e-12;
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto out = simulate_epoch(truth, Setting{5000}, 1, Nanoseconds{0}, rng);
    CHECK(out.n_s == 0);
    CHECK(out.n_b == 0);
  }
}

TEST_CASE("same seed, same counts") {
  TruthConfig truth;
  Rng a(77), b(77);
  for (int i = 0; i < 200; ++i) {
    const auto x = simulate_epoch(truth, Setting{3000 + 50 * i}, 300, Nanoseconds{i}, a);
    const auto y = simulate_epoch(truth, Setting{3000 + 50 * i}, 300, Nanoseconds{i}, b);
    CHECK(x.n_s == y.n_s);
    CHECK(x.n_b == y.n_b);
  }
}

TEST_CASE("drift models") {
  TruthConfig truth;
  for (std::int64_t t : {0LL, 1'000'000'000LL, 123'456'789'000LL})
    CHECK(background_rate(truth, Nanoseconds{t}) == 0.15);

  truth.drift.kind = DriftKind::sinusoidal;
  truth.drift.amplitude = 0.0;
  CHECK(background_rate(truth, Nanoseconds{2'500'000'000}) == 0.15);

  truth.drift.amplitude = 0.015;
  double lo = 1.0, hi = 0.0;
  for (std::int64_t t = 0; t < 20'000'000'000; t += 10'000'000) {
    const double r = background_rate(truth, Nanoseconds{t});
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(lo >= 0.135 - 1e-15);
  CHECK(hi <= 0.165 + 1e-15);
  CHECK(hi - lo > 0.0299);

  truth.drift.kind = DriftKind::linear;
  truth.drift.amplitude = 0.05;
  CHECK(background_rate(truth, Nanoseconds{5'000'000'000}) == doctest::Approx(0.175));
  CHECK(background_rate(truth, Nanoseconds{50'000'000'000}) == doctest::Approx(0.2));
}

TEST_CASE("truth validation") {
  TruthConfig truth;
  CHECK_NOTHROW(truth.validate());
  truth.overhead = Nanoseconds{0};
  CHECK_THROWS(truth.validate());
  truth = {};
  truth.overhead = Nanoseconds{-1000};
  CHECK_THROWS(truth.validate());
  truth = {};
  truth.lambda_b0 = 0.0;
  CHECK_THROWS(truth.validate());
  truth = {};
  truth.drift = {DriftKind::sinusoidal, 0.15, Nanoseconds{1'000'000}};
  CHECK_THROWS(truth.validate());
  truth.drift = {DriftKind::linear, -0.2, Nanoseconds{1'000'000}};
  CHECK_THROWS(truth.validate());
  truth.drift = {DriftKind::linear, -0.1, Nanoseconds{1'000'000}};
  CHECK_NOTHROW(truth.validate());
  truth = {};
  CHECK_THROWS(simulate_epoch(truth, Setting{1000}, 0, Nanoseconds{0}, *std::make_unique<Rng>(1)));
}
