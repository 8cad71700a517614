#include "nvrotor/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "nvrotor/constants.hpp"

namespace nvrotor {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

} // namespace

KeyValueMap parse_config_text(const std::string& text, const std::string& origin) {
  KeyValueMap kv;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t cpos = line.find_first_of("#;");
    if (cpos != std::string::npos) line = line.substr(0, cpos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");
    kv[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

KeyValueMap parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

KeyValueMap merge_keys(const KeyValueMap& base, const KeyValueMap& overrides) {
  KeyValueMap out = base;
  for (const auto& [k, v] : overrides) out[k] = v;
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  if (value == "inf" || value == "+inf") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as a number");
  return v;
}

namespace {

double require(const KeyValueMap& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError("missing required config key '" + key + "'");
  return parse_double(key, it->second);
}

std::optional<double> optional_key(const KeyValueMap& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) return std::nullopt;
  return parse_double(key, it->second);
}

} // namespace

RunConfig build_run_config(const KeyValueMap& merged) {
  RunConfig rc;
  rc.raw = merged;
  rc.system.geometry.a = require(merged, "geometry.a");
  rc.system.geometry.b = require(merged, "geometry.b");
  rc.system.geometry.mass_density = require(merged, "geometry.mass_density");
  rc.system.trap.epsilon = require(merged, "trap.epsilon");
  rc.system.trap.delta = require(merged, "trap.delta");
  rc.system.trap.udc_over_uac = require(merged, "trap.udc_over_uac");

  const auto w0 = optional_key(merged, "trap.omega0");
  const auto w0hz = optional_key(merged, "trap.omega0_over_2pi");
  if (w0 && w0hz) throw ConfigError("give only one of trap.omega0 and trap.omega0_over_2pi");
  if (!w0 && !w0hz) throw ConfigError("missing required config key 'trap.omega0'");
  rc.system.trap.omega0 = w0 ? *w0 : two_pi * *w0hz;

  rc.system.field.b0 = require(merged, "field.b0");
  rc.system.field.gamma_e = require(merged, "field.gamma_e");
  const auto dnv = optional_key(merged, "field.d_nv");
  const auto dnvhz = optional_key(merged, "field.d_nv_over_2pi");
  if (dnv && dnvhz) throw ConfigError("give only one of field.d_nv and field.d_nv_over_2pi");
  if (!dnv && !dnvhz) throw ConfigError("missing required config key 'field.d_nv'");
  rc.system.field.d_nv = dnv ? *dnv : two_pi * *dnvhz;

  rc.thermal.n_gamma = optional_key(merged, "thermal.n_gamma").value_or(0.0);
  if (rc.thermal.n_gamma < 0.0) throw ConfigError("thermal.n_gamma must be >= 0");
  rc.thermal.n_beta = optional_key(merged, "thermal.n_beta");

  const auto t2 = optional_key(merged, "dephasing.t2");
  const auto g2 = optional_key(merged, "dephasing.gamma2");
  if (t2 && g2) throw ConfigError("give only one of dephasing.t2 and dephasing.gamma2");
  if (t2)
    rc.dephasing = DephasingSpec::from_t2(*t2);
  else if (g2)
    rc.dephasing = DephasingSpec::from_gamma2(*g2);

  const auto out = merged.find("output.dir");
  if (out != merged.end()) rc.output_dir = out->second;

  validate(rc.system);
  return rc;
}

} // namespace nvrotor
