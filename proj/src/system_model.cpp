#include "nvrotor/system_model.hpp"

#include <cmath>
#include <vector>

#include "nvrotor/constants.hpp"
#include "nvrotor/roots.hpp"

namespace nvrotor {

void validate(const SystemConfig& s) {
  const auto& g = s.geometry;
  if (!(g.a > 0.0) || !(g.b > 0.0)) throw ConfigError("geometry: semiaxes must be positive");
  if (g.b > g.a) throw ConfigError("geometry: minor semiaxis b exceeds major semiaxis a");
  if (!(g.mass_density > 0.0)) throw ConfigError("geometry: mass_density must be positive");
  const auto& t = s.trap;
  if (!(t.epsilon > 0.0)) throw ConfigError("trap: epsilon must be positive");
  if (t.delta < 0.0 || t.delta >= 1.0) throw ConfigError("trap: delta must lie in [0,1)");
  if (t.udc_over_uac < 0.0) throw ConfigError("trap: udc_over_uac must be non-negative");
  if (!(t.omega0 > 0.0)) throw ConfigError("trap: omega0 must be positive");
  const auto& f = s.field;
  if (!(f.b0 > 0.0)) throw ConfigError("field: b0 must be positive");
  if (!(f.gamma_e > 0.0)) throw ConfigError("field: gamma_e must be positive");
  if (!(f.d_nv > 0.0)) throw ConfigError("field: d_nv must be positive");
}

InertiaTensor derive_inertia(const Geometry& g) {
  if (!(g.a > 0.0) || !(g.b > 0.0) || g.b > g.a || !(g.mass_density > 0.0))
    throw ConfigError("derive_inertia: invalid geometry");
  InertiaTensor it;
  it.mass = (4.0 / 3.0) * pi * g.mass_density * g.a * g.b * g.b;
  it.i_sym = 0.4 * it.mass * g.b * g.b;
  it.i_perp = 0.2 * it.mass * (g.a * g.a + g.b * g.b);
  return it;
}

QuadrupoleClosed quadrupole_anisotropy_closed(const Geometry& g, double q) {
  if (!(g.b < g.a) && g.a != g.b)
    throw ConfigError("quadrupole_anisotropy_closed: requires b <= a");
  QuadrupoleClosed out;
  out.value = q * (g.a * g.a + 2.0 * g.b * g.b) / 4.0;
  out.outside_expansion = g.b / g.a > 0.5;
  return out;
}

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// Surface-quadrature value of the anisotropy integral at one order.
double quad_value(const Geometry& g, double q, int order) {
  std::vector<double> xi, wx;
  gauss_legendre(order, xi, wx);
  const double a2 = g.a * g.a, b2 = g.b * g.b;
  // uniform phi grid integrates cos^2 exactly for order > 2
  double sum_cos2 = 0.0;
  const double wphi = two_pi / order;
  for (int j = 0; j < order; ++j) {
    const double phi = (j + 0.5) * wphi;
    sum_cos2 += std::cos(phi) * std::cos(phi);
  }
  double surf = 0.0, num = 0.0;
  for (int i = 0; i < order; ++i) {
    const double x2 = xi[i] * xi[i];
    const double rad = std::sqrt(a2 * (1.0 - x2) + b2 * x2);
    surf += wx[i] * rad;
    const double inner = a2 * x2 * two_pi - b2 * (1.0 - x2) * sum_cos2 * wphi;
    num += wx[i] * rad * inner;
  }
  const double area = two_pi * g.b * surf;
  return q * g.b / area * num;
}

} // namespace

QuadrupoleExact quadrupole_anisotropy_exact(const Geometry& g, double q, int quad_order) {
  if (quad_order < 16) throw ConfigError("quadrupole_anisotropy_exact: quad_order must be >= 16");
  QuadrupoleExact out;
  const double coarse = quad_value(g, q, quad_order);
  out.value = quad_value(g, q, 2 * quad_order);
  const double scale = std::max(std::abs(out.value),
                                1e-6 * std::abs(q) * (g.a * g.a + 2.0 * g.b * g.b) / 4.0);
  out.rel_change = std::abs(out.value - coarse) / scale;
  out.converged = out.rel_change <= 1e-6;
  return out;
}

SecularRates secular_rates(const SystemConfig& s) {
  validate(s);
  SecularRates r;
  r.inertia = derive_inertia(s.geometry);
  const double I = r.inertia.i_perp;
  const double I3 = r.inertia.i_sym;
  const auto& t = s.trap;

  r.omega_l = s.field.gamma_e * s.field.b0;
  r.delta_q = s.field.d_nv - r.omega_l;
  const double wb2 = 2.0 * t.delta * t.epsilon * t.udc_over_uac +
                     2.0 * t.delta * t.delta * t.epsilon * t.epsilon;
  if (wb2 <= 0.0)
    throw ComputeError("secular_rates: degenerate trap, omega_beta = 0 (delta = 0 and U_dc = 0)");
  r.omega_beta = t.omega0 * std::sqrt(wb2);
  r.omega_alpha = t.omega0 * std::sqrt((1.0 + t.delta / 3.0) *
                                       (3.0 * t.epsilon * t.udc_over_uac +
                                        4.5 * t.delta * t.delta * t.epsilon * t.epsilon));
  r.omega_gamma = std::sqrt(hbar * r.omega_l / I3);
  r.beta0 = std::sqrt(hbar / (2.0 * I * r.omega_beta));
  r.gamma0 = std::sqrt(hbar / (std::sqrt(2.0) * I3 * r.omega_gamma));
  r.g_gamma = r.omega_l * r.gamma0 / std::sqrt(2.0);
  r.g_beta = r.omega_l * r.beta0 / std::sqrt(2.0);
  r.xi_beta = r.omega_l * r.beta0 * r.beta0 / 2.0;
  return r;
}

DispersiveRates dispersive_rates(const SystemConfig& s, double min_abs_delta) {
  DispersiveRates d;
  d.secular = secular_rates(s);
  const SecularRates& r = d.secular;
  const double I = r.inertia.i_perp;
  const double I3 = r.inertia.i_sym;
  const double wL = r.omega_l;
  const double dq = r.delta_q;
  if (std::abs(dq) < min_abs_delta)
    throw ComputeError("dispersive_rates: anti-crossing, |Delta| below floor");

  if (dq > 0.0) {
    d.branch = Branch::PositiveDelta;
    const double shift2 = hbar * wL * (1.0 + wL / dq) / I;  // delta omega_beta^2
    const double rad_b = r.omega_beta * r.omega_beta + shift2;
    if (rad_b <= 0.0)
      throw ComputeError("dispersive_rates: imaginary beta frequency (negative radicand)");
    d.freq_beta = std::sqrt(rad_b);
    d.chi_beta = shift2 / d.freq_beta;
    d.freq_gamma = std::sqrt(hbar * wL * (1.0 + wL / dq) / I3);
    d.chi_gamma = hbar * wL * (1.0 + 2.0 * wL / dq) / (2.0 * I3 * d.freq_gamma);
    d.delta_omega_beta = std::sqrt(shift2);
  } else {
    d.branch = Branch::NegativeDelta;
    const double ad = -dq;
    const double shift2 = hbar * wL * (wL / ad - 1.0) / I;
    const double rad_b = r.omega_beta * r.omega_beta + shift2;
    if (rad_b <= 0.0)
      throw ComputeError("dispersive_rates: imaginary beta frequency (negative radicand)");
    d.freq_beta = std::sqrt(rad_b);
    d.chi_beta = (d.freq_beta * d.freq_beta - r.omega_beta * r.omega_beta) / d.freq_beta;
    d.freq_gamma = std::sqrt(hbar * wL * wL / (I3 * ad));
    d.chi_gamma = std::sqrt(2.0 * hbar * wL * wL / (I3 * ad)) * (1.0 - ad / (2.0 * wL));
    d.delta_omega_beta = std::sqrt(std::abs(shift2));
  }
  return d;
}

bool beta_mode_stable(const DispersiveRates& d) {
  if (d.branch == Branch::NegativeDelta) return true;
  return d.freq_beta > 2.0 * d.chi_beta;
}

ValidityReport validity_report(const SystemConfig& s, double threshold,
                               double n_beta, double n_gamma) {
  const SecularRates r = secular_rates(s);
  if (r.delta_q == 0.0)
    throw ComputeError("validity_report: Delta = 0");
  ValidityReport v;
  v.epsilon_ok = s.trap.epsilon < 0.1;
  v.udc_ratio_ok = s.trap.udc_over_uac < 0.1;
  const double b2 = r.beta0 * r.beta0 * (2.0 * n_beta + 1.0);
  const double g2 = r.gamma0 * r.gamma0 * (2.0 * n_gamma + 1.0);
  const double wL = r.omega_l, dq = r.delta_q;
  const double I3 = r.inertia.i_sym;
  v.dispersive_terms[0] = std::abs(wL / dq) * b2;
  v.dispersive_terms[1] = (wL / dq) * (wL / dq) * g2;
  v.dispersive_terms[2] =
      std::abs(I3 * 0.5 * r.omega_gamma * r.omega_gamma * g2 / (2.0 * hbar * dq));
  v.dispersive_ok = v.dispersive_terms[0] < threshold &&
                    v.dispersive_terms[1] < threshold &&
                    v.dispersive_terms[2] < threshold;
  if (r.delta_q > 0.0) {
    bool stable = true;
    try {
      stable = beta_mode_stable(dispersive_rates(s));
    } catch (const ComputeError&) {
      stable = false;
    }
    v.beta_stable = stable;
  } else {
    v.beta_stable = true;
  }
  return v;
}

double find_anti_crossing(const SystemConfig& s, FieldBracket bracket) {
  validate(s);
  auto f = [&](double b) { return s.field.d_nv - s.field.gamma_e * b; };
  return bisect(f, bracket.lo, bracket.hi);
}

double find_bstar(const SystemConfig& s, FieldBracket bracket) {
  validate(s);
  if (bracket.lo == 0.0 && bracket.hi == 0.0) {
    bracket.lo = 1e-3;
    bracket.hi = find_anti_crossing(s) * (1.0 - 1e-9);
  }
  auto f = [&](double b) {
    SystemConfig sc = s;
    sc.field.b0 = b;
    const DispersiveRates d = dispersive_rates(sc);
    return d.freq_beta - 2.0 * d.chi_beta;
  };
  return bisect(f, bracket.lo, bracket.hi);
}

double find_resonance_fields(const SystemConfig& s, int n, Branch branch,
                             FieldBracket bracket, RatioKind ratio) {
  validate(s);
  if (n < 1) throw ConfigError("find_resonance_fields: n must be >= 1");
  auto f = [&](double b) {
    SystemConfig sc = s;
    sc.field.b0 = b;
    const DispersiveRates d = dispersive_rates(sc);
    if (d.branch != branch)
      throw ComputeError("find_resonance_fields: bracket leaves the requested branch");
    const double r = ratio == RatioKind::GammaOverBeta ? d.freq_gamma / d.freq_beta
                                                       : d.freq_beta / d.freq_gamma;
    return r - static_cast<double>(n);
  };
  return bisect(f, bracket.lo, bracket.hi);
}

} // namespace nvrotor
