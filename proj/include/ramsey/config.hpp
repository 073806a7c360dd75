#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ramsey/instrument.hpp"
#include "ramsey/runner.hpp"

namespace ramsey {

// `key = value` lines, '#' comments. Time values take an ns/us/ms/s suffix
// (bare numbers are microseconds). See README for the key list.
struct Config {
  RunConfig run;
  TruthConfig truth;
  std::size_t batch_runs = 20;
  std::size_t points_per_decade = 20;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, std::size_t line, const std::string& message);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// `default_seed` applies when the text has no run.seed key.
Config parse_config_text(std::string_view text, std::string_view source = "config",
                         std::uint64_t default_seed = 1);
Config parse_config_file(const std::filesystem::path& path, std::uint64_t default_seed = 1);

// Every key with its effective value; parse_config_text(to_config_text(c))
// reproduces c.
std::string to_config_text(const Config& config);

}  // namespace ramsey
