#include "ramsey/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ramsey/trace_io.hpp"

namespace ramsey {

ConfigError::ConfigError(std::string source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Thrown by value parsers; rethrown with the line attached.
struct ValueError {
  std::string message;
};

double parse_real(std::string_view v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    // Distinguish a number with trailing text from plain garbage.
    if (ec == std::errc{} && ptr != v.data())
      throw ValueError{"unexpected unit or text '" + std::string(ptr, end) + "' after number"};
    throw ValueError{"expected a number, got '" + std::string(v) + "'"};
  }
  return out;
}

std::int64_t parse_integer(std::string_view v) {
  std::int64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ValueError{"expected an integer, got '" + std::string(v) + "'"};
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ValueError{"expected true or false, got '" + std::string(v) + "'"};
}

// Number with optional ns/us/ms/s suffix; bare numbers are microseconds.
Nanoseconds parse_time(std::string_view v) {
  std::size_t split = v.size();
  while (split > 0 && std::isalpha(static_cast<unsigned char>(v[split - 1]))) --split;
  // "µs" is two bytes of UTF-8 before 's'.
  std::string_view number = trim(v.substr(0, split));
  std::string_view unit = v.substr(split);
  if (number.size() >= 2 && number.substr(number.size() - 2) == "\xC2\xB5" && unit == "s") {
    number = trim(number.substr(0, number.size() - 2));
    unit = "us";
  }
  double scale = 1e3;
  if (unit.empty() || unit == "us") scale = 1e3;
  else if (unit == "ns") scale = 1.0;
  else if (unit == "ms") scale = 1e6;
  else if (unit == "s") scale = 1e9;
  else throw ValueError{"unknown time unit '" + std::string(unit) + "' (expected ns, us, ms or s)"};
  if (number.empty()) throw ValueError{"missing number before unit '" + std::string(unit) + "'"};
  const double ns = parse_real(number) * scale;
  if (!std::isfinite(ns)) throw ValueError{"time must be finite"};
  const double rounded = std::round(ns);
  if (std::abs(ns - rounded) > 1e-6 * std::max(1.0, std::abs(ns)))
    throw ValueError{"time '" + std::string(v) + "' is not a whole number of nanoseconds"};
  return Nanoseconds(static_cast<std::int64_t>(rounded));
}

// Like parse_time but returns real-valued microseconds without requiring a
// whole number of nanoseconds.
double parse_time_us(std::string_view v) {
  std::size_t split = v.size();
  while (split > 0 && std::isalpha(static_cast<unsigned char>(v[split - 1]))) --split;
  const std::string_view number = trim(v.substr(0, split));
  const std::string_view unit = v.substr(split);
  double scale = 1.0;
  if (unit.empty() || unit == "us") scale = 1.0;
  else if (unit == "ns") scale = 1e-3;
  else if (unit == "ms") scale = 1e3;
  else if (unit == "s") scale = 1e6;
  else throw ValueError{"unknown time unit '" + std::string(unit) + "' (expected ns, us, ms or s)"};
  if (number.empty()) throw ValueError{"missing number before unit '" + std::string(unit) + "'"};
  return parse_real(number) * scale;
}

std::string format_time(Nanoseconds t) { return std::to_string(t.count()) + "ns"; }

void require(bool ok, const std::string& message) {
  if (!ok) throw ValueError{message};
}

struct Schema {
  using Setter = std::function<void(Config&, std::string_view)>;
  std::map<std::string, Setter, std::less<>> setters;

  void real(const std::string& key, std::function<void(Config&, double)> set) {
    setters[key] = [set](Config& c, std::string_view v) { set(c, parse_real(v)); };
  }
  void time(const std::string& key, std::function<void(Config&, Nanoseconds)> set) {
    setters[key] = [set](Config& c, std::string_view v) { set(c, parse_time(v)); };
  }
  void integer(const std::string& key, std::function<void(Config&, std::int64_t)> set) {
    setters[key] = [set](Config& c, std::string_view v) { set(c, parse_integer(v)); };
  }
  void text(const std::string& key, Setter set) { setters[key] = std::move(set); }
};

int index_of(Param p) { return static_cast<int>(p); }

Schema make_schema() {
  Schema s;
  s.real("truth.a", [](Config& c, double v) { require(v > 0.0, "truth.a must be > 0"); c.truth.params.a = v; });
  s.real("truth.c", [](Config& c, double v) { require(v >= 0.0, "truth.c must be >= 0"); c.truth.params.c = v; });
  s.real("truth.omega0", [](Config& c, double v) {
    require(v >= 0.0, "truth.omega0 must be >= 0 rad/us");
    c.truth.params.omega0 = v;
  });
  s.text("truth.t2", [](Config& c, std::string_view v) {
    if (v == "inf" || v == "infinite") {
      c.truth.params.t2 = kInfiniteT2;
      return;
    }
    const double t2 = parse_time_us(v);
    require(t2 > 0.0 && std::isfinite(t2), "truth.t2 must be > 0 or inf");
    c.truth.params.t2 = t2;
  });
  s.real("truth.lambda_b", [](Config& c, double v) {
    require(v > 0.0, "truth.lambda_b must be > 0 photons per sequence");
    c.truth.lambda_b0 = v;
  });
  s.time("truth.overhead", [](Config& c, Nanoseconds v) {
    require(v.count() > 0, "truth.overhead must be > 0");
    c.truth.overhead = v;
  });
  s.text("truth.drift", [](Config& c, std::string_view v) {
    if (v == "none") c.truth.drift.kind = DriftKind::none;
    else if (v == "linear") c.truth.drift.kind = DriftKind::linear;
    else if (v == "sinusoidal") c.truth.drift.kind = DriftKind::sinusoidal;
    else throw ValueError{"truth.drift must be none, linear or sinusoidal"};
  });
  s.real("truth.drift_amplitude", [](Config& c, double v) { c.truth.drift.amplitude = v; });
  s.time("truth.drift_period", [](Config& c, Nanoseconds v) {
    require(v.count() > 0, "truth.drift_period must be > 0");
    c.truth.drift.period = v;
  });

  // Grid keys are collected and the grid is built after the last line.
  s.time("grid.min", [](Config&, Nanoseconds) {});
  s.time("grid.max", [](Config&, Nanoseconds) {});
  s.time("grid.step", [](Config&, Nanoseconds) {});

  s.text("run.protocol", [](Config& c, std::string_view v) {
    const auto p = parse_protocol(v);
    require(p.has_value(), "run.protocol must be bayes, tau or random");
    c.run.protocol = *p;
  });
  s.text("run.unknowns", [](Config& c, std::string_view v) {
    const auto u = parse_unknowns(v);
    require(u.has_value(), "run.unknowns must be omega or all");
    c.run.unknowns = *u;
  });
  s.text("run.workflow", [](Config& c, std::string_view v) {
    const auto w = parse_workflow(v);
    require(w.has_value(), "run.workflow must be series, concurrent or concurrent-deterministic");
    c.run.workflow = *w;
  });
  s.integer("run.epochs", [](Config& c, std::int64_t v) {
    require(v >= 1, "run.epochs must be >= 1");
    c.run.max_epochs = static_cast<std::size_t>(v);
    c.run.lab_time_budget.reset();
  });
  s.time("run.lab_time", [](Config& c, Nanoseconds v) {
    require(v.count() > 0, "run.lab_time must be > 0");
    c.run.lab_time_budget = v;
    c.run.max_epochs.reset();
  });
  s.time("run.t_epoch", [](Config& c, Nanoseconds v) {
    require(v.count() > 0, "run.t_epoch must be > 0");
    c.run.epoch_time = v;
  });
  s.integer("run.window", [](Config& c, std::int64_t v) {
    require(v >= 1, "run.window must be >= 1");
    c.run.window = static_cast<std::size_t>(v);
  });
  s.integer("run.seed", [](Config& c, std::int64_t v) {
    require(v >= 0, "run.seed must be >= 0");
    c.run.seed = static_cast<std::uint64_t>(v);
  });
  s.real("run.lambda_b_guess", [](Config& c, double v) {
    require(v > 0.0, "run.lambda_b_guess must be > 0");
    c.run.lambda_b_guess = v;
  });

  s.integer("prior.particles", [](Config& c, std::int64_t v) {
    require(v >= 100, "prior.particles must be >= 100");
    c.run.particles = static_cast<std::size_t>(v);
  });
  s.real("prior.resample_threshold", [](Config& c, double v) {
    require(v > 0.0 && v < 1.0, "prior.resample_threshold must lie in (0, 1)");
    c.run.resample_threshold = v;
  });
  s.real("prior.shrinkage", [](Config& c, double v) {
    require(v > 0.0 && v <= 1.0, "prior.shrinkage must lie in (0, 1]");
    c.run.shrinkage = v;
  });
  for (Param p : {Param::a, Param::c, Param::omega0}) {
    const std::string name(to_string(p));
    s.real("prior." + name + ".min", [p](Config& c, double v) { c.run.prior_bounds[index_of(p)].lower = v; });
    s.real("prior." + name + ".max", [p](Config& c, double v) { c.run.prior_bounds[index_of(p)].upper = v; });
  }
  s.text("prior.t2.min", [](Config& c, std::string_view v) {
    c.run.prior_bounds[index_of(Param::t2)].lower = parse_time_us(v);
  });
  s.text("prior.t2.max", [](Config& c, std::string_view v) {
    c.run.prior_bounds[index_of(Param::t2)].upper = parse_time_us(v);
  });

  s.real("tau.h", [](Config& c, double v) { require(v > 0.0, "tau.h must be > 0"); c.run.tau.h = v; });
  s.real("tau.top_fraction", [](Config& c, double v) {
    require(v > 0.0 && v <= 1.0, "tau.top_fraction must lie in (0, 1]");
    c.run.tau.top_fraction = v;
  });

  s.text("design.cost_weighted", [](Config& c, std::string_view v) { c.run.design.divide_by_duration = parse_bool(v); });
  s.text("design.softmax_temperature", [](Config& c, std::string_view v) {
    if (v == "off" || v == "none") {
      c.run.design.softmax_temperature.reset();
      return;
    }
    const double t = parse_real(v);
    require(t > 0.0, "design.softmax_temperature must be > 0 or off");
    c.run.design.softmax_temperature = t;
  });

  s.real("inference.prior_exponent", [](Config& c, double v) { c.run.prior_exponent = v; });

  s.integer("batch.runs", [](Config& c, std::int64_t v) {
    require(v >= 2, "batch.runs must be >= 2");
    c.batch_runs = static_cast<std::size_t>(v);
  });
  s.integer("batch.points_per_decade", [](Config& c, std::int64_t v) {
    require(v >= 1, "batch.points_per_decade must be >= 1");
    c.points_per_decade = static_cast<std::size_t>(v);
  });
  return s;
}

}  // namespace

Config parse_config_text(std::string_view text, std::string_view source, std::uint64_t default_seed) {
  static const Schema schema = make_schema();
  Config config;
  config.run.seed = default_seed;
  config.run.lab_time_budget = Nanoseconds{2'000'000'000};
  const std::string src(source);
  std::map<std::string, std::size_t, std::less<>> seen;
  std::int64_t grid_min = config.run.grid.start_ns();
  std::int64_t grid_max = config.run.grid.max_ns();
  std::int64_t grid_step = config.run.grid.step_ns();
  std::size_t grid_line = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(src, line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto setter = schema.setters.find(key);
    if (setter == schema.setters.end()) throw ConfigError(src, line_no, "unknown key '" + std::string(key) + "'");
    if (value.empty()) throw ConfigError(src, line_no, "missing value for '" + std::string(key) + "'");
    if (const auto prev = seen.find(key); prev != seen.end())
      throw ConfigError(src, line_no, "duplicate key '" + std::string(key) + "' (first on line " +
                                          std::to_string(prev->second) + ")");
    if ((key == "run.epochs" && seen.contains("run.lab_time")) ||
        (key == "run.lab_time" && seen.contains("run.epochs")))
      throw ConfigError(src, line_no, "set only one of run.epochs and run.lab_time");
    seen.emplace(std::string(key), line_no);
    try {
      setter->second(config, value);
      if (key.starts_with("grid.")) {
        const auto ns = parse_time(value).count();
        if (key == "grid.min") grid_min = ns;
        else if (key == "grid.max") grid_max = ns;
        else grid_step = ns;
        grid_line = line_no;
      }
    } catch (const ValueError& e) {
      throw ConfigError(src, line_no, e.message);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(src, line_no, e.what());
    }
  }

  try {
    config.run.grid = SettingGrid::from_range(grid_min, grid_max, grid_step);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(src, grid_line, e.what());
  }
  try {
    config.run.validate(config.truth);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(src, 0, e.what());
  }
  return config;
}

Config parse_config_file(const std::filesystem::path& path, std::uint64_t default_seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open configuration file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string(), default_seed);
}

std::string to_config_text(const Config& c) {
  std::ostringstream out;
  const auto& t = c.truth;
  const auto& r = c.run;
  out << "# effective configuration\n";
  out << "truth.a = " << format_number(t.params.a) << "\n";
  out << "truth.c = " << format_number(t.params.c) << "\n";
  out << "truth.omega0 = " << format_number(t.params.omega0) << "\n";
  out << "truth.t2 = "
      << (t.params.t2_is_infinite() ? std::string("inf") : format_number(t.params.t2) + "us") << "\n";
  out << "truth.lambda_b = " << format_number(t.lambda_b0) << "\n";
  out << "truth.overhead = " << format_time(t.overhead) << "\n";
  const char* drift = t.drift.kind == DriftKind::none ? "none"
                      : t.drift.kind == DriftKind::linear ? "linear"
                                                          : "sinusoidal";
  out << "truth.drift = " << drift << "\n";
  out << "truth.drift_amplitude = " << format_number(t.drift.amplitude) << "\n";
  out << "truth.drift_period = " << format_time(t.drift.period) << "\n";
  out << "grid.min = " << r.grid.start_ns() << "ns\n";
  out << "grid.max = " << r.grid.max_ns() << "ns\n";
  out << "grid.step = " << r.grid.step_ns() << "ns\n";
  out << "run.protocol = " << to_string(r.protocol) << "\n";
  out << "run.unknowns = " << to_string(r.unknowns) << "\n";
  out << "run.workflow = " << to_string(r.workflow) << "\n";
  if (r.max_epochs) out << "run.epochs = " << *r.max_epochs << "\n";
  if (r.lab_time_budget) out << "run.lab_time = " << format_time(*r.lab_time_budget) << "\n";
  out << "run.t_epoch = " << format_time(r.effective_epoch_time()) << "\n";
  out << "run.window = " << r.window << "\n";
  out << "run.seed = " << r.seed << "\n";
  out << "run.lambda_b_guess = " << format_number(r.lambda_b_guess) << "\n";
  out << "prior.particles = " << r.particles << "\n";
  out << "prior.resample_threshold = " << format_number(r.resample_threshold) << "\n";
  out << "prior.shrinkage = " << format_number(r.shrinkage) << "\n";
  for (Param p : {Param::a, Param::c, Param::omega0}) {
    const auto& b = r.prior_bounds[index_of(p)];
    out << "prior." << to_string(p) << ".min = " << format_number(b.lower) << "\n";
    out << "prior." << to_string(p) << ".max = " << format_number(b.upper) << "\n";
  }
  const auto& t2 = r.prior_bounds[index_of(Param::t2)];
  out << "prior.t2.min = " << format_number(t2.lower) << "us\n";
  out << "prior.t2.max = " << format_number(t2.upper) << "us\n";
  out << "tau.h = " << format_number(r.tau.h) << "\n";
  out << "tau.top_fraction = " << format_number(r.tau.top_fraction) << "\n";
  out << "design.cost_weighted = " << (r.design.divide_by_duration ? "true" : "false") << "\n";
  out << "design.softmax_temperature = "
      << (r.design.softmax_temperature ? format_number(*r.design.softmax_temperature) : std::string("off"))
      << "\n";
  out << "inference.prior_exponent = " << format_number(r.prior_exponent) << "\n";
  out << "batch.runs = " << c.batch_runs << "\n";
  out << "batch.points_per_decade = " << c.points_per_decade << "\n";
  return out.str();
}

}  // namespace ramsey
