#pragma once

#include <map>
#include <string>

#include "nvrotor/su11_echo.hpp"
#include "nvrotor/system_model.hpp"

namespace nvrotor {

/// Flat "section.key" -> value map from a sectioned plain-text config file.
/// Lines are `key = value`; sections are `[name]`; '#' and ';' start comments.
using KeyValueMap = std::map<std::string, std::string>;

KeyValueMap parse_config_text(const std::string& text, const std::string& origin);
KeyValueMap parse_config_file(const std::string& path);

/// Later maps win; used to apply command-line overrides onto file values.
KeyValueMap merge_keys(const KeyValueMap& base, const KeyValueMap& overrides);

struct RunConfig {
  SystemConfig system;
  ThermalSpec thermal;
  DephasingSpec dephasing;
  std::string output_dir = ".";
  KeyValueMap raw;  // merged keys, for provenance
};

/// Builds and validates a RunConfig from merged keys. All keys are SI;
/// trap.omega0 / field.d_nv accept *_over_2pi alternatives (Hz). Missing
/// required keys raise ConfigError naming the offending key.
RunConfig build_run_config(const KeyValueMap& merged);

/// Strict double parse ("inf" accepted); throws ConfigError on trailing junk.
double parse_double(const std::string& key, const std::string& value);

} // namespace nvrotor
