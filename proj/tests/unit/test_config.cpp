#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "ramsey/config.hpp"

using namespace ramsey;

namespace {

std::size_t error_line(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  FAIL("expected a ConfigError for: " << text);
  return 0;
}

std::string error_message(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("an empty file gives the reference setup") {
  const Config c = parse_config_text("");
  CHECK(c.truth.params.a == 0.8);
  CHECK(c.truth.params.c == 0.13);
  CHECK(c.truth.params.omega0 == 9.4);
  CHECK(c.truth.params.t2 == 10.0);
  CHECK(c.truth.lambda_b0 == 0.15);
  CHECK(c.truth.overhead == Nanoseconds{4070});
  CHECK(c.run.grid.start_ns() == 100);
  CHECK(c.run.grid.max_ns() == 20'000);
  CHECK(c.run.grid.step_ns() == 50);
  CHECK(c.run.grid.size() == 399);
  CHECK(c.run.protocol == Protocol::bayes);
  CHECK(c.run.unknowns == Unknowns::omega_only);
  CHECK(c.run.window == 20);
  CHECK(c.run.particles == 50'000);
  CHECK(c.run.tau.h == 0.5);
  CHECK(c.run.prior_exponent == -1.0);
  CHECK(c.run.lab_time_budget == Nanoseconds{2'000'000'000});
  CHECK_FALSE(c.run.max_epochs.has_value());
  CHECK(c.run.seed == 1);
}

TEST_CASE("overrides, comments and units") {
  const Config c = parse_config_text(
      "# comment line\n"
      "tau.h = 0.7   # trailing comment\n"
      "truth.overhead = 4.07us\n"
      "run.t_epoch = 13ms\n"
      "run.epochs = 40\n"
      "truth.t2 = inf\n"
      "prior.omega0.max = 30\n"
      "run.protocol = tau\n"
      "run.unknowns = all\n"
      "design.softmax_temperature = 0.2\n"
      "grid.max = 10us\n");
  CHECK(c.run.tau.h == 0.7);
  CHECK(c.truth.overhead == Nanoseconds{4070});
  CHECK(c.run.effective_epoch_time() == Nanoseconds{13'000'000});
  CHECK(c.run.max_epochs == std::optional<std::size_t>{40});
  CHECK_FALSE(c.run.lab_time_budget.has_value());
  CHECK(c.truth.params.t2_is_infinite());
  CHECK(c.run.prior_bounds[static_cast<int>(Param::omega0)].upper == 30.0);
  CHECK(c.run.protocol == Protocol::tau);
  CHECK(c.run.unknowns == Unknowns::all_four);
  CHECK(c.run.design.softmax_temperature == std::optional<double>{0.2});
  CHECK(c.run.grid.max_ns() == 10'000);
  CHECK(c.run.grid.size() == 199);

  CHECK(parse_config_text("truth.overhead = 4070ns").truth.overhead == Nanoseconds{4070});
  CHECK(parse_config_text("truth.overhead = 4.07").truth.overhead == Nanoseconds{4070});
  CHECK(parse_config_text("run.lab_time = 0.5s").run.lab_time_budget == Nanoseconds{500'000'000});
  CHECK(parse_config_text("truth.overhead = 4.07\xC2\xB5s").truth.overhead == Nanoseconds{4070});
}

TEST_CASE("errors point at the offending line") {
  CHECK(error_line("tau.h = 0.5\n\ntruth.overhead = -1\n") == 3);
  CHECK(error_message("truth.overhead = -1").find("truth.overhead") != std::string::npos);
  CHECK(error_line("run.seed = 3\nbogus.key = 1\n") == 2);
  CHECK(error_line("tau.h = 1\n# x\ntau.h = 2\n") == 3);
  CHECK(error_message("tau.h = 1\ntau.h = 2\n").find("line 1") != std::string::npos);
  CHECK(error_line("truth.overhead = 4kg\n") == 1);
  CHECK(error_line("tau.h = 2us\n") == 1);
  CHECK(error_line("truth.overhead = 4.0701ns\n") == 1);
  CHECK(error_line("tau.h\n") == 1);
  CHECK(error_line("tau.h = \n") == 1);
  CHECK(error_line("run.epochs = 10\nrun.lab_time = 1s\n") == 2);
  CHECK(error_line("run.protocol = greedy\n") == 1);
  CHECK(error_line("prior.particles = 12.5\n") == 1);
  CHECK(error_line("prior.resample_threshold = 1\n") == 1);
  CHECK(error_line("grid.step = 70ns\n") == 1);
}

TEST_CASE("cross-field problems are reported without a line") {
  // The epoch must fit at least one sequence; known only after every line.
  CHECK(error_line("run.t_epoch = 4us\n") == 0);
}

TEST_CASE("effective text round-trips") {
  const std::string text =
      "truth.omega0 = 7.25\n"
      "truth.drift = sinusoidal\n"
      "truth.drift_amplitude = 0.01\n"
      "truth.drift_period = 2s\n"
      "run.protocol = random\n"
      "run.workflow = series\n"
      "run.window = 7\n"
      "run.seed = 99\n"
      "prior.particles = 2000\n"
      "prior.shrinkage = 0.995\n"
      "prior.t2.max = 40us\n"
      "design.cost_weighted = false\n"
      "inference.prior_exponent = 0\n"
      "batch.runs = 5\n";
  const Config first = parse_config_text(text);
  const std::string effective = to_config_text(first);
  const Config second = parse_config_text(effective);
  CHECK(to_config_text(second) == effective);
  CHECK(second.truth.params.omega0 == 7.25);
  CHECK(second.truth.drift.kind == DriftKind::sinusoidal);
  CHECK(second.run.protocol == Protocol::random);
  CHECK(second.run.workflow == Workflow::series);
  CHECK(second.run.seed == 99);
  CHECK(second.run.shrinkage == 0.995);
  CHECK_FALSE(second.run.design.divide_by_duration);
  CHECK(second.run.prior_exponent == 0.0);
  CHECK(second.batch_runs == 5);

  const Config defaults = parse_config_text("");
  CHECK(to_config_text(parse_config_text(to_config_text(defaults))) == to_config_text(defaults));
}

TEST_CASE("default seed applies only without run.seed") {
  CHECK(parse_config_text("", "x", 42).run.seed == 42);
  CHECK(parse_config_text("run.seed = 7", "x", 42).run.seed == 7);
}

TEST_CASE("files") {
  const auto dir = std::filesystem::temp_directory_path() / "ramsey_config_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "a.cfg";
  {
    std::ofstream out(path);
    out << "run.window = 3\nrun.window = 4\n";
  }
  try {
    parse_config_file(path);
    FAIL("duplicate key accepted");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("a.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_file(dir / "missing.cfg"), ConfigError);
  std::filesystem::remove_all(dir);
}
