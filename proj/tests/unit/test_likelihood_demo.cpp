#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ramsey/likelihood_demo.hpp"

using namespace ramsey;

TEST_CASE("curves peak at the ratio estimate and narrow with more background data") {
  const auto curves = likelihood_curves();
  REQUIRE(curves.size() == 5);
  CHECK(curves.back().ratio == 0.0);
  for (const auto& c : curves) {
    CAPTURE(c.ratio);
    // One photon in ten sequences at 0.15 per sequence: R = 1 / 1.5.
    CHECK(std::abs(c.peak_r - 2.0 / 3.0) <= 0.001);
    CHECK(*std::max_element(c.likelihood.begin(), c.likelihood.end()) == 1.0);
    CHECK(c.r.size() >= 2999);
    CHECK(c.fwhm > 0.0);
  }
  for (std::size_t i = 1; i < curves.size(); ++i) CHECK(curves[i].fwhm <= curves[i - 1].fwhm);
  // The largest window is already close to the known-rate limit.
  CHECK(curves[3].fwhm / curves[4].fwhm - 1.0 < 0.01);
}

TEST_CASE("curve options are checked") {
  LikelihoodCurveOptions o;
  o.r_step = 0.0;
  CHECK_THROWS(likelihood_curves(o));
  o = {};
  o.ratios = {-1.0};
  CHECK_THROWS(likelihood_curves(o));
}

TEST_CASE("window sweep reports the background-to-signal ratio") {
  RunConfig base;
  base.particles = 300;
  base.lab_time_budget = Nanoseconds{100'000'000};
  WindowSweepOptions o;
  o.windows = {1, 4};
  o.runs = 2;
  const auto points = window_sweep(base, TruthConfig{}, o);
  REQUIRE(points.size() == 2);
  CHECK(points[0].window == 1);
  CHECK(points[0].mean_ratio == 1.0);
  CHECK(points[1].mean_ratio > 2.0);
  CHECK(points[1].mean_ratio < 8.0);
  for (const auto& p : points) CHECK(p.mean_final_sigma > 0.0);
}
