#include "nvrotor/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "nvrotor/constants.hpp"

namespace nvrotor {

std::vector<double> sweep_grid(const SweepRange& r) {
  if (r.points < 2) throw ConfigError("sweep: range needs at least 2 points");
  if (!(r.start < r.stop)) throw ConfigError("sweep: range start must be < stop");
  std::vector<double> g(r.points);
  if (r.scale == SweepScale::Log) {
    if (!(r.start > 0.0)) throw ConfigError("sweep: log scale needs positive start");
    const double la = std::log(r.start), lb = std::log(r.stop);
    for (int i = 0; i < r.points; ++i)
      g[i] = std::exp(la + (lb - la) * i / double(r.points - 1));
  } else {
    for (int i = 0; i < r.points; ++i)
      g[i] = r.start + (r.stop - r.start) * i / double(r.points - 1);
  }
  g.front() = r.start;
  g.back() = r.stop;
  return g;
}

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// quantities evaluated lazily per field point
struct PointCtx {
  SystemConfig sc;
  std::optional<SecularRates> sec;
  std::optional<DispersiveRates> disp;
  std::optional<ValidityReport> val;

  const SecularRates& secular() {
    if (!sec) sec = secular_rates(sc);
    return *sec;
  }
  const DispersiveRates& dispersive() {
    if (!disp) disp = dispersive_rates(sc);
    return *disp;
  }
  const ValidityReport& validity() {
    if (!val) val = validity_report(sc);
    return *val;
  }
};

struct ColumnDef {
  const char* unit;
  bool needs_dispersive;
  std::function<double(PointCtx&)> eval;
};

const std::map<std::string, ColumnDef>& b0_columns() {
  static const std::map<std::string, ColumnDef> defs = {
      {"delta", {"rad/s", false, [](PointCtx& c) { return c.secular().delta_q; }}},
      {"delta_over_2pi", {"Hz", false, [](PointCtx& c) { return c.secular().delta_q / two_pi; }}},
      {"omega_alpha_over_2pi", {"Hz", false, [](PointCtx& c) { return c.secular().omega_alpha / two_pi; }}},
      {"omega_beta_over_2pi", {"Hz", false, [](PointCtx& c) { return c.secular().omega_beta / two_pi; }}},
      {"omega_gamma_over_2pi", {"Hz", false, [](PointCtx& c) { return c.secular().omega_gamma / two_pi; }}},
      {"g_beta_over_2pi", {"Hz", false, [](PointCtx& c) { return c.secular().g_beta / two_pi; }}},
      {"g_gamma_over_2pi", {"Hz", false, [](PointCtx& c) { return c.secular().g_gamma / two_pi; }}},
      {"xi_beta_over_2pi", {"Hz", false, [](PointCtx& c) { return c.secular().xi_beta / two_pi; }}},
      {"usc_beta", {"1", false, [](PointCtx& c) { return c.secular().g_beta / c.secular().omega_beta; }}},
      {"usc_gamma", {"1", false, [](PointCtx& c) { return c.secular().g_gamma / c.secular().omega_gamma; }}},
      {"beta0", {"rad", false, [](PointCtx& c) { return c.secular().beta0; }}},
      {"gamma0", {"rad", false, [](PointCtx& c) { return c.secular().gamma0; }}},
      {"freq_beta_over_2pi", {"Hz", true, [](PointCtx& c) { return c.dispersive().freq_beta / two_pi; }}},
      {"freq_gamma_over_2pi", {"Hz", true, [](PointCtx& c) { return c.dispersive().freq_gamma / two_pi; }}},
      {"chi_beta_over_2pi", {"Hz", true, [](PointCtx& c) { return c.dispersive().chi_beta / two_pi; }}},
      {"chi_gamma_over_2pi", {"Hz", true, [](PointCtx& c) { return c.dispersive().chi_gamma / two_pi; }}},
      {"delta_omega_beta_over_2pi", {"Hz", true, [](PointCtx& c) { return c.dispersive().delta_omega_beta / two_pi; }}},
      {"freq_ratio", {"1", true, [](PointCtx& c) { return c.dispersive().freq_gamma / c.dispersive().freq_beta; }}},
      {"dwb_over_wb", {"1", true, [](PointCtx& c) {
         return c.dispersive().delta_omega_beta / c.secular().omega_beta;
       }}},
      {"vterm_beta", {"1", false, [](PointCtx& c) { return c.validity().dispersive_terms[0]; }}},
      {"vterm_gamma", {"1", false, [](PointCtx& c) { return c.validity().dispersive_terms[1]; }}},
      {"vterm_gamma_trap", {"1", false, [](PointCtx& c) { return c.validity().dispersive_terms[2]; }}},
  };
  return defs;
}

// revival probability sampled at the rephasing time selected by the options
double eval_p_star(const SystemConfig& sc, double n_gamma, const DephasingSpec& deph,
                   const SweepOptions& opts) {
  const DispersiveRates d = dispersive_rates(sc);
  const double f_slow = std::min(d.freq_beta, d.freq_gamma);
  const double tau_star =
      opts.pstar_time == PstarTime::SlowMode ? pi / f_slow : pi / d.freq_gamma;
  ThermalSpec th;
  th.n_gamma = n_gamma;
  TraceOptions topt;
  topt.include_beta = opts.include_beta;
  topt.allow_unstable_beta = opts.allow_unstable_beta;
  return protocol_trace(d, th, deph, {tau_star}, topt).back().p_up;
}

void append_provenance(Table& t, const SweepSpec& spec) {
  t.provenance.push_back("# nvrotor sweep v1.0");
  t.provenance.push_back("# preset = " + spec.label);
  std::ostringstream os;
  const char* vn[] = {"b0", "tau", "n_gamma", "t2", "omega0", "grid_b0_omega0"};
  os << "# variable = " << vn[int(spec.variable)] << "; start = " << format_g(spec.range.start)
     << "; stop = " << format_g(spec.range.stop) << "; points = " << spec.range.points
     << "; scale = " << (spec.range.scale == SweepScale::Log ? "log" : "linear");
  t.provenance.push_back(os.str());
  const auto& g = spec.base.geometry;
  const auto& tr = spec.base.trap;
  const auto& fl = spec.base.field;
  std::ostringstream ob;
  ob << "# base: a = " << format_g(g.a) << "; b = " << format_g(g.b)
     << "; mass_density = " << format_g(g.mass_density) << "; epsilon = " << format_g(tr.epsilon)
     << "; delta = " << format_g(tr.delta) << "; udc_over_uac = " << format_g(tr.udc_over_uac)
     << "; omega0 = " << format_g(tr.omega0) << "; b0 = " << format_g(fl.b0)
     << "; gamma_e = " << format_g(fl.gamma_e) << "; d_nv = " << format_g(fl.d_nv);
  t.provenance.push_back(ob.str());
  std::ostringstream oo;
  oo << "# options: include_beta = " << (spec.options.include_beta ? 1 : 0)
     << "; pstar_time = " << (spec.options.pstar_time == PstarTime::SlowMode ? "slow" : "gamma")
     << "; n_gamma = " << format_g(spec.thermal.n_gamma)
     << "; gamma2 = " << format_g(spec.dephasing.gamma2);
  if (!spec.options.n_gamma_curves.empty()) {
    oo << "; n_gamma_curves =";
    for (double v : spec.options.n_gamma_curves) oo << " " << format_g(v);
  }
  if (!spec.options.t2_curves.empty()) {
    oo << "; t2_curves =";
    for (double v : spec.options.t2_curves) oo << " " << format_g(v);
  }
  t.provenance.push_back(oo.str());
}

Table run_field_sweep(const SweepSpec& spec, bool grid2d) {
  const auto& defs = b0_columns();
  // expand p_star into per-curve columns when curve lists are present
  struct OutCol {
    std::string name;
    std::string unit;
    bool is_pstar = false;
    double n_gamma = 0.0;
    DephasingSpec deph;
  };
  std::vector<OutCol> out_cols;
  bool needs_dispersive = false;
  bool needs_beta_stability = false;
  for (const auto& name : spec.columns) {
    if (name == "p_star") {
      needs_dispersive = true;
      if (spec.options.include_beta) needs_beta_stability = true;
      std::vector<double> ns = spec.options.n_gamma_curves;
      std::vector<double> t2s = spec.options.t2_curves;
      if (ns.empty()) ns = {spec.thermal.n_gamma};
      if (t2s.empty()) {
        for (double n : ns) {
          OutCol c;
          c.name = spec.options.n_gamma_curves.empty() ? "p_star"
                                                       : "p_star_n" + format_g(n);
          c.unit = "1";
          c.is_pstar = true;
          c.n_gamma = n;
          c.deph = spec.dephasing;
          out_cols.push_back(c);
        }
      } else {
        for (double t2 : t2s) {
          OutCol c;
          c.name = "p_star_t2_" + format_g(t2 * 1e3) + "ms";
          c.unit = "1";
          c.is_pstar = true;
          c.n_gamma = ns.front();
          c.deph = DephasingSpec::from_t2(t2);
          out_cols.push_back(c);
        }
      }
    } else {
      auto it = defs.find(name);
      if (it == defs.end())
        throw ConfigError("sweep: unknown column '" + name + "' for a field sweep");
      needs_dispersive = needs_dispersive || it->second.needs_dispersive;
      if (name == "dwb_over_wb") needs_beta_stability = true;
      out_cols.push_back({name, it->second.unit, false, 0.0, {}});
    }
  }

  Table t;
  append_provenance(t, spec);
  t.columns.push_back({"b0", "T"});
  if (grid2d) t.columns.push_back({"omega0_over_2pi", "Hz"});
  for (const auto& c : out_cols) t.columns.push_back({c.name, c.unit});
  t.columns.push_back({"valid", "1"});

  const std::vector<double> bs = sweep_grid(spec.range);
  std::vector<double> w0s{spec.base.trap.omega0};
  if (grid2d) w0s = sweep_grid(spec.options.omega0_range);

  for (double b0 : bs) {
    for (double w0 : w0s) {
      PointCtx ctx;
      ctx.sc = spec.base;
      ctx.sc.field.b0 = b0;
      ctx.sc.trap.omega0 = w0;
      std::vector<double> row;
      row.push_back(b0);
      if (grid2d) row.push_back(w0 / two_pi);
      bool ok = true;
      for (const auto& c : out_cols) {
        double v = nan_v;
        try {
          v = c.is_pstar ? eval_p_star(ctx.sc, c.n_gamma, c.deph, spec.options)
                         : defs.at(c.name).eval(ctx);
        } catch (const ComputeError&) {
          ok = false;
        }
        row.push_back(v);
      }
      bool valid = ok;
      if (valid && (needs_dispersive || !out_cols.empty())) {
        try {
          if (needs_dispersive) valid = valid && ctx.validity().dispersive_ok;
          if (!out_cols.empty() && out_cols.front().name.rfind("vterm", 0) == 0)
            valid = valid && ctx.validity().dispersive_ok;
          if (needs_beta_stability && valid)
            valid = valid && beta_mode_stable(ctx.dispersive());
        } catch (const ComputeError&) {
          valid = false;
        }
      }
      row.push_back(valid ? 1.0 : 0.0);
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

Table run_tau_sweep(const SweepSpec& spec) {
  for (const auto& c : spec.columns)
    if (c != "p_up" && c != "p_down")
      throw ConfigError("sweep: unknown column '" + c + "' for a tau sweep");
  const DispersiveRates d = dispersive_rates(spec.base);
  const std::vector<double> taus = sweep_grid(spec.range);
  if (taus.front() != 0.0 && spec.range.start != 0.0) {
    // traces are internally anchored at 0; nothing to reject here
  }

  struct Curve {
    std::string suffix;
    ThermalSpec th;
    DephasingSpec deph;
  };
  std::vector<Curve> curves;
  if (!spec.options.n_gamma_curves.empty()) {
    for (double n : spec.options.n_gamma_curves)
      curves.push_back({"_n" + format_g(n), ThermalSpec{n, {}}, spec.dephasing});
  } else if (!spec.options.t2_curves.empty()) {
    for (double t2 : spec.options.t2_curves)
      curves.push_back({"_t2_" + format_g(t2 * 1e3) + "ms", spec.thermal,
                        DephasingSpec::from_t2(t2)});
  } else {
    curves.push_back({"", spec.thermal, spec.dephasing});
  }

  Table t;
  append_provenance(t, spec);
  t.columns.push_back({"tau", "s"});
  for (const auto& cv : curves)
    for (const auto& c : spec.columns) t.columns.push_back({c + cv.suffix, "1"});
  t.columns.push_back({"valid", "1"});

  TraceOptions topt;
  topt.include_beta = spec.options.include_beta;
  topt.allow_unstable_beta = spec.options.allow_unstable_beta;

  std::vector<std::vector<ProbabilityPoint>> traces;
  traces.reserve(curves.size());
  for (const auto& cv : curves)
    traces.push_back(protocol_trace(d, cv.th, cv.deph, taus, topt));

  for (std::size_t i = 0; i < taus.size(); ++i) {
    std::vector<double> row;
    row.push_back(taus[i]);
    for (std::size_t k = 0; k < curves.size(); ++k) {
      for (const auto& c : spec.columns)
        row.push_back(c == "p_up" ? traces[k][i].p_up : traces[k][i].p_down);
    }
    row.push_back(1.0);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table run_scalar_sweep(const SweepSpec& spec) {
  // NGamma, T2 or Omega0 on the x-axis
  Table t;
  append_provenance(t, spec);
  const std::vector<double> xs = sweep_grid(spec.range);
  const char* xname = spec.variable == SweepVariable::NGamma ? "n_gamma"
                      : spec.variable == SweepVariable::T2   ? "t2"
                                                             : "omega0_over_2pi";
  const char* xunit = spec.variable == SweepVariable::NGamma ? "1"
                      : spec.variable == SweepVariable::T2   ? "s"
                                                             : "Hz";
  t.columns.push_back({xname, xunit});
  for (const auto& c : spec.columns) {
    if (c == "p_star")
      t.columns.push_back({"p_star", "1"});
    else if (c == "bstar" && spec.variable == SweepVariable::Omega0)
      t.columns.push_back({"bstar", "T"});
    else
      throw ConfigError("sweep: unknown column '" + c + "' for this sweep variable");
  }
  t.columns.push_back({"valid", "1"});

  for (double x : xs) {
    SystemConfig sc = spec.base;
    ThermalSpec th = spec.thermal;
    DephasingSpec deph = spec.dephasing;
    if (spec.variable == SweepVariable::NGamma) th = ThermalSpec{x, {}};
    if (spec.variable == SweepVariable::T2) deph = DephasingSpec::from_t2(x);
    if (spec.variable == SweepVariable::Omega0) sc.trap.omega0 = x;
    std::vector<double> row;
    row.push_back(spec.variable == SweepVariable::Omega0 ? x / two_pi : x);
    bool ok = true;
    for (const auto& c : spec.columns) {
      double v = nan_v;
      try {
        if (c == "p_star")
          v = eval_p_star(sc, th.n_gamma, deph, spec.options);
        else if (c == "bstar")
          v = find_bstar(sc);
      } catch (const ComputeError&) {
        ok = false;
      }
      row.push_back(v);
    }
    row.push_back(ok ? 1.0 : 0.0);
    t.rows.push_back(std::move(row));
  }
  return t;
}

} // namespace

Table run_sweep(const SweepSpec& spec) {
  validate(spec.base);
  if (spec.columns.empty()) throw ConfigError("sweep: no output columns requested");
  switch (spec.variable) {
    case SweepVariable::B0:
      return run_field_sweep(spec, false);
    case SweepVariable::GridB0Omega0:
      if (spec.options.omega0_range.points < 2)
        throw ConfigError("sweep: grid sweep needs an omega0 range");
      return run_field_sweep(spec, true);
    case SweepVariable::Tau:
      return run_tau_sweep(spec);
    default:
      return run_scalar_sweep(spec);
  }
}

// ---------------------------------------------------------------------------
// presets
// ---------------------------------------------------------------------------

SystemConfig reference_system() {
  SystemConfig s;
  s.geometry.a = 100e-9;
  s.geometry.b = 20e-9;
  s.geometry.mass_density = 3.5e3;
  s.trap.epsilon = 1e-2;
  s.trap.delta = 0.1;
  s.trap.udc_over_uac = 5e-3;
  s.trap.omega0 = two_pi * 5e6;
  s.field.b0 = 90e-3;
  s.field.gamma_e = 1.76e11;
  s.field.d_nv = two_pi * 2.87e9;
  return s;
}

namespace {
const std::pair<FigureId, const char*> kFigureNames[] = {
    {FigureId::Fig1c, "fig1c"},   {FigureId::Fig1d, "fig1d"},
    {FigureId::Fig1e, "fig1e"},   {FigureId::Fig2c, "fig2c"},
    {FigureId::Fig2d, "fig2d"},   {FigureId::Fig2e, "fig2e"},
    {FigureId::Fig2f, "fig2f"},   {FigureId::FigS1, "figS1"},
    {FigureId::FigS2a, "figS2a"}, {FigureId::FigS2b, "figS2b"},
    {FigureId::FigS2c, "figS2c"}, {FigureId::FigS2d, "figS2d"},
    {FigureId::FigS3a, "figS3a"}, {FigureId::FigS3b, "figS3b"},
    {FigureId::FigS3c, "figS3c"},
};
} // namespace

std::optional<FigureId> parse_figure_id(const std::string& name) {
  std::string low;
  for (char c : name) low.push_back(char(std::tolower(static_cast<unsigned char>(c))));
  for (const auto& [id, n] : kFigureNames) {
    std::string ln;
    for (const char* p = n; *p; ++p) ln.push_back(char(std::tolower(static_cast<unsigned char>(*p))));
    if (low == ln) return id;
  }
  return std::nullopt;
}

const char* figure_id_name(FigureId id) {
  for (const auto& [i, n] : kFigureNames)
    if (i == id) return n;
  return "?";
}

std::vector<FigureId> all_figure_ids() {
  std::vector<FigureId> ids;
  for (const auto& [i, n] : kFigureNames) ids.push_back(i);
  return ids;
}

SweepSpec preset(FigureId id) {
  SweepSpec s;
  s.base = reference_system();
  s.label = figure_id_name(id);
  s.options.allow_unstable_beta = true;
  const double ms = 1e-3;
  switch (id) {
    case FigureId::Fig1c:
      s.variable = SweepVariable::B0;
      s.range = {10e-3, 200e-3, 191, SweepScale::Linear};
      s.columns = {"omega_gamma_over_2pi", "omega_beta_over_2pi", "omega_alpha_over_2pi"};
      break;
    case FigureId::Fig1d:
      s.variable = SweepVariable::B0;
      s.range = {50e-3, 150e-3, 201, SweepScale::Linear};
      s.columns = {"delta_over_2pi"};
      break;
    case FigureId::Fig1e:
      s.variable = SweepVariable::B0;
      s.range = {10e-3, 200e-3, 191, SweepScale::Linear};
      s.columns = {"g_gamma_over_2pi", "g_beta_over_2pi", "xi_beta_over_2pi"};
      break;
    case FigureId::Fig2c: {
      s.variable = SweepVariable::Tau;
      const DispersiveRates d = dispersive_rates(s.base);
      s.range = {0.0, 1.2 * pi / d.freq_gamma, 241, SweepScale::Linear};
      s.columns = {"p_up", "p_down"};
      s.thermal.n_gamma = 1.0;
      s.dephasing = DephasingSpec::none();
      s.options.include_beta = false;
      break;
    }
    case FigureId::Fig2d:
      s.variable = SweepVariable::B0;
      s.range = {60e-3, 101.5e-3, 167, SweepScale::Linear};
      s.columns = {"p_star"};
      s.dephasing = DephasingSpec::from_t2(0.5 * ms);
      s.options.n_gamma_curves = {1.0, 10.0, 100.0, 1000.0};
      break;
    case FigureId::Fig2e: {
      s.variable = SweepVariable::Tau;
      const DispersiveRates d = dispersive_rates(s.base);
      s.range = {0.8 * pi / d.freq_gamma, 1.2 * pi / d.freq_gamma, 161, SweepScale::Linear};
      s.columns = {"p_up"};
      s.dephasing = DephasingSpec::from_t2(0.5 * ms);
      s.options.n_gamma_curves = {1.0, 10.0, 100.0};
      break;
    }
    case FigureId::Fig2f: {
      s.variable = SweepVariable::Tau;
      const DispersiveRates d = dispersive_rates(s.base);
      s.range = {0.8 * pi / d.freq_gamma, 1.2 * pi / d.freq_gamma, 161, SweepScale::Linear};
      s.columns = {"p_up"};
      s.thermal.n_gamma = 100.0;
      s.options.t2_curves = {0.1 * ms, 0.5 * ms, 2.5 * ms};
      break;
    }
    case FigureId::FigS1:
      s.variable = SweepVariable::B0;
      s.range = {10e-3, 200e-3, 1501, SweepScale::Linear};
      s.columns = {"vterm_beta", "vterm_gamma", "vterm_gamma_trap"};
      break;
    case FigureId::FigS2a:
      s.variable = SweepVariable::B0;
      s.range = {1e-3, 100e-3, 199, SweepScale::Linear};
      s.columns = {"freq_beta_over_2pi", "freq_gamma_over_2pi", "chi_beta_over_2pi",
                   "chi_gamma_over_2pi"};
      break;
    case FigureId::FigS2b:
      s.variable = SweepVariable::Omega0;
      s.range = {two_pi * 1e6, two_pi * 10e6, 46, SweepScale::Linear};
      s.columns = {"bstar"};
      break;
    case FigureId::FigS2c:
      s.variable = SweepVariable::B0;
      s.range = {104e-3, 200e-3, 193, SweepScale::Linear};
      s.columns = {"freq_beta_over_2pi", "freq_gamma_over_2pi", "chi_beta_over_2pi",
                   "chi_gamma_over_2pi"};
      break;
    case FigureId::FigS2d:
      s.variable = SweepVariable::B0;
      s.range = {104e-3, 200e-3, 193, SweepScale::Linear};
      s.columns = {"freq_ratio"};
      break;
    case FigureId::FigS3a:
      s.variable = SweepVariable::GridB0Omega0;
      s.range = {10e-3, 102e-3, 93, SweepScale::Linear};
      s.options.omega0_range = {two_pi * 1e6, two_pi * 10e6, 46, SweepScale::Linear};
      s.columns = {"dwb_over_wb"};
      break;
    case FigureId::FigS3b:
      s.variable = SweepVariable::GridB0Omega0;
      s.range = {60e-3, 101.5e-3, 84, SweepScale::Linear};
      s.options.omega0_range = {two_pi * 1e6, two_pi * 10e6, 19, SweepScale::Linear};
      s.columns = {"p_star"};
      s.thermal.n_gamma = 1000.0;
      s.dephasing = DephasingSpec::from_t2(0.5 * ms);
      break;
    case FigureId::FigS3c:
      s.variable = SweepVariable::B0;
      s.range = {60e-3, 101.5e-3, 167, SweepScale::Linear};
      s.columns = {"p_star"};
      s.thermal.n_gamma = 100.0;
      s.options.t2_curves = {0.1 * ms, 0.5 * ms, 2.5 * ms};
      break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string render_csv(const Table& t) {
  std::string out;
  for (const auto& p : t.provenance) {
    out += p;
    out += '\n';
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i].name + "[" + t.columns[i].unit + "]";
  }
  out += '\n';
  char buf[64];
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size())
      throw ConfigError("render_csv: row arity mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (t.columns[i].name == "valid")
        std::snprintf(buf, sizeof buf, "%d", int(row[i]));
      else
        std::snprintf(buf, sizeof buf, "%.8e", row[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_table(const Table& t, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("write_table: cannot open '" + path + "' for writing");
  const std::string csv = render_csv(t);
  f.write(csv.data(), std::streamsize(csv.size()));
  if (!f) throw ConfigError("write_table: write failed for '" + path + "'");
}

Table read_table(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("read_table: cannot open '" + path + "'");
  Table t;
  std::string line;
  bool header_done = false;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.provenance.push_back(line);
      continue;
    }
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      const std::size_t c = line.find(',', pos);
      cells.push_back(line.substr(pos, c == std::string::npos ? c : c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    if (!header_done) {
      for (const auto& cell : cells) {
        const std::size_t lb = cell.find('[');
        const std::size_t rb = cell.find(']');
        if (lb == std::string::npos || rb == std::string::npos || rb < lb)
          throw ConfigError("read_table: malformed header cell '" + cell + "'");
        t.columns.push_back({cell.substr(0, lb), cell.substr(lb + 1, rb - lb - 1)});
      }
      header_done = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : cells) row.push_back(std::strtod(cell.c_str(), nullptr));
    t.rows.push_back(std::move(row));
  }
  if (!header_done) throw ConfigError("read_table: no header row in '" + path + "'");
  return t;
}

} // namespace nvrotor
