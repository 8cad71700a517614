#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nvrotor/config.hpp"
#include "nvrotor/constants.hpp"
#include "nvrotor/fock_oracle.hpp"
#include "nvrotor/su11_echo.hpp"
#include "nvrotor/sweep.hpp"
#include "nvrotor/system_model.hpp"

namespace fs = std::filesystem;
using namespace nvrotor;

namespace {

// shorthand flag -> config key
const std::map<std::string, std::string> kAliases = {
    {"a", "geometry.a"},
    {"b", "geometry.b"},
    {"mass-density", "geometry.mass_density"},
    {"epsilon", "trap.epsilon"},
    {"delta", "trap.delta"},
    {"udc-over-uac", "trap.udc_over_uac"},
    {"omega0", "trap.omega0"},
    {"omega0-over-2pi", "trap.omega0_over_2pi"},
    {"b0", "field.b0"},
    {"gamma-e", "field.gamma_e"},
    {"d-nv", "field.d_nv"},
    {"d-nv-over-2pi", "field.d_nv_over_2pi"},
    {"n-gamma", "thermal.n_gamma"},
    {"n-beta", "thermal.n_beta"},
    {"t2", "dephasing.t2"},
    {"gamma2", "dephasing.gamma2"},
};

KeyValueMap overrides_from_extras(std::vector<std::string> extras) {
  std::reverse(extras.begin(), extras.end());  // CLI11 keeps remaining() reversed
  KeyValueMap kv;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string tok = extras[i];
    if (tok.rfind("--", 0) != 0)
      throw ConfigError("unexpected argument '" + tok + "' (expected --<section>.<key> <value>)");
    tok = tok.substr(2);
    std::string value;
    const std::size_t eq = tok.find('=');
    if (eq != std::string::npos) {
      value = tok.substr(eq + 1);
      tok = tok.substr(0, eq);
    } else {
      if (i + 1 >= extras.size())
        throw ConfigError("override '--" + tok + "' is missing a value");
      value = extras[++i];
    }
    std::string key = tok;
    if (key.find('.') == std::string::npos) {
      const auto it = kAliases.find(key);
      if (it == kAliases.end())
        throw ConfigError("unknown option or override '--" + tok + "'");
      key = it->second;
    }
    kv[key] = value;
  }
  return kv;
}

KeyValueMap load_base_keys(const std::string& config_path) {
  std::string path = config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("NVROTOR_CONFIG")) path = env;
  }
  if (path.empty()) return {};
  return parse_config_file(path);
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

void print_rate(const char* name, double rad_s) {
  std::printf("  %-24s %.9e rad/s  (%.9e Hz)\n", name, rad_s, rad_s / two_pi);
}

std::vector<double> tau_grid_from_flags(const DispersiveRates& d, double tau_min,
                                        double tau_max, int points) {
  if (tau_min != 0.0)
    throw ConfigError("tau grid must start at 0 (branch continuity requires an anchored grid)");
  if (points < 2) throw ConfigError("tau grid needs at least 2 points");
  if (tau_max <= 0.0) tau_max = 1.2 * pi / d.freq_gamma;
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = tau_max * i / double(points - 1);
  return g;
}

int cmd_params(const RunConfig& rc, const std::string& csv_name, const std::string& out_dir) {
  const SecularRates sec = secular_rates(rc.system);
  std::printf("inertia:\n");
  std::printf("  %-24s %.9e kg\n", "mass", sec.inertia.mass);
  std::printf("  %-24s %.9e kg m^2\n", "I (perpendicular)", sec.inertia.i_perp);
  std::printf("  %-24s %.9e kg m^2\n", "I3 (symmetry axis)", sec.inertia.i_sym);
  std::printf("secular rates at b0 = %.6e T:\n", rc.system.field.b0);
  print_rate("omega_L", sec.omega_l);
  print_rate("Delta", sec.delta_q);
  print_rate("omega_alpha", sec.omega_alpha);
  print_rate("omega_beta", sec.omega_beta);
  print_rate("omega_gamma", sec.omega_gamma);
  print_rate("g_beta", sec.g_beta);
  print_rate("g_gamma", sec.g_gamma);
  print_rate("xi_beta", sec.xi_beta);
  std::printf("  %-24s %.9e rad\n", "beta0", sec.beta0);
  std::printf("  %-24s %.9e rad\n", "gamma0", sec.gamma0);

  const DispersiveRates d = dispersive_rates(rc.system);
  std::printf("dispersive rates (%s branch):\n",
              d.branch == Branch::PositiveDelta ? "Delta > 0" : "Delta < 0");
  print_rate("freq_beta", d.freq_beta);
  print_rate("freq_gamma", d.freq_gamma);
  print_rate("chi_beta", d.chi_beta);
  print_rate("chi_gamma", d.chi_gamma);
  print_rate("delta_omega_beta", d.delta_omega_beta);
  std::printf("  %-24s %s\n", "beta mode stable", beta_mode_stable(d) ? "yes" : "no");

  const ValidityReport v = validity_report(rc.system, 0.1, 0.0, rc.thermal.n_gamma);
  std::printf("dispersive validity (threshold 0.1):\n");
  std::printf("  %-24s %.6e\n", "(wL/Delta) <beta^2>", v.dispersive_terms[0]);
  std::printf("  %-24s %.6e\n", "(wL/Delta)^2 <gamma^2>", v.dispersive_terms[1]);
  std::printf("  %-24s %.6e\n", "trap-shift term", v.dispersive_terms[2]);
  std::printf("  %-24s %s\n", "dispersive_ok", v.dispersive_ok ? "yes" : "no");
  std::printf("  %-24s epsilon %s, udc/uac %s\n", "drive ratios",
              v.epsilon_ok ? "ok" : "too large", v.udc_ratio_ok ? "ok" : "too large");

  const double bac = find_anti_crossing(rc.system);
  std::printf("special fields:\n");
  std::printf("  %-24s %.6e T\n", "anti-crossing", bac);
  double bstar = -1.0;
  try {
    bstar = find_bstar(rc.system);
    std::printf("  %-24s %.6e T\n", "B* (beta instability)", bstar);
  } catch (const ComputeError& e) {
    std::printf("  %-24s no root (%s)\n", "B* (beta instability)", e.what());
  }

  if (!csv_name.empty()) {
    Table t;
    t.provenance.push_back("# nvrotor params");
    t.columns = {{"b0", "T"},           {"mass", "kg"},
                 {"i_perp", "kg m^2"},  {"i_sym", "kg m^2"},
                 {"omega_l", "rad/s"},  {"delta", "rad/s"},
                 {"omega_alpha", "rad/s"}, {"omega_beta", "rad/s"},
                 {"omega_gamma", "rad/s"}, {"g_beta", "rad/s"},
                 {"g_gamma", "rad/s"},  {"xi_beta", "rad/s"},
                 {"freq_beta", "rad/s"}, {"freq_gamma", "rad/s"},
                 {"chi_beta", "rad/s"}, {"chi_gamma", "rad/s"},
                 {"anti_crossing", "T"}, {"bstar", "T"},
                 {"valid", "1"}};
    t.rows.push_back({rc.system.field.b0, sec.inertia.mass, sec.inertia.i_perp,
                      sec.inertia.i_sym, sec.omega_l, sec.delta_q, sec.omega_alpha,
                      sec.omega_beta, sec.omega_gamma, sec.g_beta, sec.g_gamma,
                      sec.xi_beta, d.freq_beta, d.freq_gamma, d.chi_beta, d.chi_gamma,
                      bac, bstar, v.dispersive_ok ? 1.0 : 0.0});
    ensure_out_dir(out_dir);
    write_table(t, (fs::path(out_dir) / csv_name).string());
  }
  return 0;
}

Table trace_to_table(const std::vector<ProbabilityPoint>& trace, const RunConfig& rc,
                     bool include_beta, const char* what) {
  Table t;
  t.provenance.push_back(std::string("# nvrotor ") + what);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# b0 = %g; n_gamma = %g; gamma2 = %g; include_beta = %d",
                rc.system.field.b0, rc.thermal.n_gamma, rc.dephasing.gamma2,
                int(include_beta));
  t.provenance.push_back(buf);
  t.columns = {{"tau", "s"},
               {"p_up", "1"},
               {"p_down", "1"},
               {"re_overlap_beta", "1"},
               {"im_overlap_beta", "1"},
               {"re_overlap_gamma", "1"},
               {"im_overlap_gamma", "1"},
               {"valid", "1"}};
  for (const auto& p : trace)
    t.rows.push_back({p.tau, p.p_up, p.p_down, p.overlap_beta.real(),
                      p.overlap_beta.imag(), p.overlap_gamma.real(),
                      p.overlap_gamma.imag(), 1.0});
  return t;
}

int cmd_echo(const RunConfig& rc, double tau_min, double tau_max, int points,
             bool no_beta, const std::string& out_dir, const std::string& name) {
  const DispersiveRates d = dispersive_rates(rc.system);
  const std::vector<double> taus = tau_grid_from_flags(d, tau_min, tau_max, points);
  TraceOptions opts;
  opts.include_beta = !no_beta;
  const auto trace = protocol_trace(d, rc.thermal, rc.dephasing, taus, opts);
  const Table t = trace_to_table(trace, rc, !no_beta, "echo trace");
  ensure_out_dir(out_dir);
  const std::string path = (fs::path(out_dir) / name).string();
  write_table(t, path);
  std::printf("wrote %s (%zu rows)\n", path.c_str(), t.rows.size());
  return 0;
}

int cmd_oracle(const RunConfig& rc, double tau_min, double tau_max, int points,
               bool no_beta, double tol, const std::string& out_dir,
               const std::string& name) {
  const DispersiveRates d = dispersive_rates(rc.system);
  const std::vector<double> taus = tau_grid_from_flags(d, tau_min, tau_max, points);
  TraceOptions copts;
  copts.include_beta = !no_beta;
  const auto closed = protocol_trace(d, rc.thermal, rc.dephasing, taus, copts);

  OracleOptions oopts;
  oopts.include_beta = !no_beta;
  oopts.tol = tol > 0.0 ? 5.0 * tol : 1e-12;
  const OracleTrace oracle = oracle_trace(d, rc.thermal, rc.dephasing, taus, oopts);

  Table t;
  t.provenance.push_back("# nvrotor oracle cross-check");
  char buf[256];
  std::snprintf(buf, sizeof buf, "# tol = %g; gamma_final_dim = %d; beta_final_dim = %d",
                tol, oracle.gamma.final_dim, oracle.beta.final_dim);
  t.provenance.push_back(buf);
  t.columns = {{"tau", "s"}, {"p_up_closed", "1"}, {"p_up_oracle", "1"},
               {"abs_diff", "1"}, {"valid", "1"}};
  double max_diff = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double diff = std::abs(closed[i].p_up - oracle.points[i].p_up);
    max_diff = std::max(max_diff, diff);
    t.rows.push_back({taus[i], closed[i].p_up, oracle.points[i].p_up, diff, 1.0});
  }
  ensure_out_dir(out_dir);
  const std::string path = (fs::path(out_dir) / name).string();
  write_table(t, path);
  std::printf("oracle dims: gamma %d, beta %d; converged: %s\n", oracle.gamma.final_dim,
              oracle.beta.final_dim, oracle.converged() ? "yes" : "no");
  std::printf("max |closed - oracle| = %.6e (tol %.6e)\n", max_diff, tol);
  if (!oracle.converged())
    throw ConvergenceError("oracle did not converge within the dim cap");
  return max_diff < tol ? 0 : 1;
}

void apply_system_overrides(SweepSpec& spec, const KeyValueMap& kv) {
  auto set_if = [&](const char* key, double* target, double scale = 1.0) {
    const auto it = kv.find(key);
    if (it != kv.end()) *target = scale * parse_double(key, it->second);
  };
  set_if("geometry.a", &spec.base.geometry.a);
  set_if("geometry.b", &spec.base.geometry.b);
  set_if("geometry.mass_density", &spec.base.geometry.mass_density);
  set_if("trap.epsilon", &spec.base.trap.epsilon);
  set_if("trap.delta", &spec.base.trap.delta);
  set_if("trap.udc_over_uac", &spec.base.trap.udc_over_uac);
  set_if("trap.omega0", &spec.base.trap.omega0);
  set_if("trap.omega0_over_2pi", &spec.base.trap.omega0, two_pi);
  set_if("field.b0", &spec.base.field.b0);
  set_if("field.gamma_e", &spec.base.field.gamma_e);
  set_if("field.d_nv", &spec.base.field.d_nv);
  set_if("field.d_nv_over_2pi", &spec.base.field.d_nv, two_pi);
  set_if("thermal.n_gamma", &spec.thermal.n_gamma);
  if (kv.count("thermal.n_beta"))
    spec.thermal.n_beta = parse_double("thermal.n_beta", kv.at("thermal.n_beta"));
  if (kv.count("dephasing.t2"))
    spec.dephasing = DephasingSpec::from_t2(parse_double("dephasing.t2", kv.at("dephasing.t2")));
  if (kv.count("dephasing.gamma2"))
    spec.dephasing =
        DephasingSpec::from_gamma2(parse_double("dephasing.gamma2", kv.at("dephasing.gamma2")));
}

int cmd_figure(const std::string& fig, const KeyValueMap& merged, const std::string& out_dir) {
  const auto id = parse_figure_id(fig);
  if (!id) {
    std::string valid;
    for (FigureId i : all_figure_ids()) valid += std::string(" ") + figure_id_name(i);
    throw ConfigError("unknown figure id '" + fig + "'; valid ids:" + valid);
  }
  SweepSpec spec = preset(*id);
  apply_system_overrides(spec, merged);
  const Table t = run_sweep(spec);
  ensure_out_dir(out_dir);
  const std::string path = (fs::path(out_dir) / (std::string(figure_id_name(*id)) + ".csv")).string();
  write_table(t, path);
  std::printf("wrote %s (%zu rows)\n", path.c_str(), t.rows.size());
  return 0;
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < value.size()) {
    std::size_t c = value.find_first_of(", ", pos);
    if (c == std::string::npos) c = value.size();
    const std::string cell = value.substr(pos, c - pos);
    if (!cell.empty()) out.push_back(parse_double(key, cell));
    pos = c + 1;
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

int cmd_sweep(const std::string& spec_file, const KeyValueMap& merged,
              const std::string& out_dir) {
  const KeyValueMap sk = parse_config_file(spec_file);
  // the sweep file may carry its own system sections; command-line overrides win
  const KeyValueMap all = merge_keys(sk, merged);
  const RunConfig rc = build_run_config(all);

  SweepSpec spec;
  spec.base = rc.system;
  spec.thermal = rc.thermal;
  spec.dephasing = rc.dephasing;
  spec.label = fs::path(spec_file).stem().string();

  auto need = [&](const char* key) -> std::string {
    const auto it = all.find(key);
    if (it == all.end()) throw ConfigError(std::string("missing required sweep key '") + key + "'");
    return it->second;
  };
  const std::string var = need("sweep.variable");
  if (var == "b0") spec.variable = SweepVariable::B0;
  else if (var == "tau") spec.variable = SweepVariable::Tau;
  else if (var == "n_gamma") spec.variable = SweepVariable::NGamma;
  else if (var == "t2") spec.variable = SweepVariable::T2;
  else if (var == "omega0") spec.variable = SweepVariable::Omega0;
  else if (var == "grid_b0_omega0") spec.variable = SweepVariable::GridB0Omega0;
  else throw ConfigError("sweep.variable must be one of b0|tau|n_gamma|t2|omega0|grid_b0_omega0");

  spec.range.start = parse_double("sweep.start", need("sweep.start"));
  spec.range.stop = parse_double("sweep.stop", need("sweep.stop"));
  spec.range.points = int(parse_double("sweep.points", need("sweep.points")));
  if (all.count("sweep.scale")) {
    const std::string sc = all.at("sweep.scale");
    if (sc == "log") spec.range.scale = SweepScale::Log;
    else if (sc == "linear") spec.range.scale = SweepScale::Linear;
    else throw ConfigError("sweep.scale must be linear or log");
  }
  {
    spec.columns.clear();
    const std::string cols = need("sweep.columns");
    std::size_t pos = 0;
    while (pos < cols.size()) {
      std::size_t c = cols.find_first_of(", ", pos);
      if (c == std::string::npos) c = cols.size();
      const std::string cell = cols.substr(pos, c - pos);
      if (!cell.empty()) spec.columns.push_back(cell);
      pos = c + 1;
    }
  }
  if (all.count("sweep.include_beta"))
    spec.options.include_beta = parse_double("sweep.include_beta", all.at("sweep.include_beta")) != 0.0;
  if (all.count("sweep.pstar_time")) {
    const std::string pt = all.at("sweep.pstar_time");
    if (pt == "slow") spec.options.pstar_time = PstarTime::SlowMode;
    else if (pt == "gamma") spec.options.pstar_time = PstarTime::Gamma;
    else throw ConfigError("sweep.pstar_time must be slow or gamma");
  }
  if (all.count("sweep.n_gamma_curves"))
    spec.options.n_gamma_curves = parse_list("sweep.n_gamma_curves", all.at("sweep.n_gamma_curves"));
  if (all.count("sweep.t2_curves"))
    spec.options.t2_curves = parse_list("sweep.t2_curves", all.at("sweep.t2_curves"));
  if (spec.variable == SweepVariable::GridB0Omega0) {
    spec.options.omega0_range.start = parse_double("sweep.omega0_start", need("sweep.omega0_start"));
    spec.options.omega0_range.stop = parse_double("sweep.omega0_stop", need("sweep.omega0_stop"));
    spec.options.omega0_range.points = int(parse_double("sweep.omega0_points", need("sweep.omega0_points")));
  }

  const Table t = run_sweep(spec);
  ensure_out_dir(out_dir);
  std::string name = spec.label + ".csv";
  if (all.count("sweep.output")) name = all.at("sweep.output");
  const std::string path = (fs::path(out_dir) / name).string();
  write_table(t, path);
  std::printf("wrote %s (%zu rows)\n", path.c_str(), t.rows.size());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled spin-libration simulator for an electrically levitated nanodiamond"};
  app.require_subcommand(1);
  app.allow_extras(false);

  std::string config_path, out_dir = ".";
  app.add_option("--config", config_path, "sectioned key-value config file (env NVROTOR_CONFIG)");
  app.add_option("--out", out_dir, "output directory for CSV files");

  auto* sp = app.add_subcommand("params", "derived rates, validity, special fields");
  std::string params_csv;
  sp->add_option("--csv", params_csv, "also write a one-row CSV with this file name");
  sp->allow_extras();

  auto* se = app.add_subcommand("echo", "closed-form interference probability trace");
  double tau_min = 0.0, tau_max = 0.0;
  int tau_points = 241;
  bool no_beta = false;
  std::string echo_name = "echo.csv";
  se->add_option("--tau-min", tau_min, "first tau of the grid; must be 0");
  se->add_option("--tau-max", tau_max, "last tau of the grid in s (default 1.2 pi/freq_gamma)");
  se->add_option("--tau-points", tau_points, "grid size");
  se->add_flag("--no-beta", no_beta, "evaluate the gamma mode only");
  se->add_option("--output", echo_name, "output CSV name");
  se->allow_extras();

  auto* so = app.add_subcommand("oracle", "closed form vs truncated-Fock brute force");
  double otol = 1e-4;
  double otau_min = 0.0, otau_max = 0.0;
  int otau_points = 25;
  bool ono_beta = false;
  std::string oracle_name = "oracle.csv";
  so->add_option("--tol", otol, "comparison tolerance on P_up");
  so->add_option("--tau-min", otau_min, "first tau of the grid; must be 0");
  so->add_option("--tau-max", otau_max, "last tau of the grid in s");
  so->add_option("--tau-points", otau_points, "grid size");
  so->add_flag("--no-beta", ono_beta, "evaluate the gamma mode only");
  so->add_option("--output", oracle_name, "output CSV name");
  so->allow_extras();

  auto* sw = app.add_subcommand("sweep", "run a declarative sweep from a spec file");
  std::string spec_file;
  sw->add_option("specfile", spec_file, "sweep spec file")->required();
  sw->allow_extras();

  auto* sf = app.add_subcommand("figure", "reproduce a named figure preset");
  std::string fig_id;
  sf->add_option("id", fig_id, "figure id, e.g. fig1c or figS2b")->required();
  sf->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const KeyValueMap overrides = overrides_from_extras(sub->remaining());
    const KeyValueMap merged = merge_keys(load_base_keys(config_path), overrides);

    if (sub == sf) return cmd_figure(fig_id, merged, out_dir);
    if (sub == sw) return cmd_sweep(spec_file, merged, out_dir);

    const RunConfig rc = build_run_config(merged);
    if (sub == sp) return cmd_params(rc, params_csv, out_dir);
    if (sub == se) return cmd_echo(rc, tau_min, tau_max, tau_points, no_beta, out_dir, echo_name);
    if (sub == so)
      return cmd_oracle(rc, otau_min, otau_max, otau_points, ono_beta, otol, out_dir, oracle_name);
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "convergence error: %s\n", e.what());
    return 4;
  } catch (const ComputeError& e) {
    std::fprintf(stderr, "computation error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
