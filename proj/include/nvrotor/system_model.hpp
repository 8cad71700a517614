#pragma once

#include <cstddef>

#include "nvrotor/errors.hpp"

namespace nvrotor {

// ---------------------------------------------------------------------------
// raw physical inputs
// ---------------------------------------------------------------------------

/// Solid prolate spheroid, symmetry semiaxis a, equatorial semiaxis b.
struct Geometry {
  double a = 0.0;             // major semiaxis, m
  double b = 0.0;             // minor semiaxis, m
  double mass_density = 0.0;  // kg/m^3
};

struct TrapConfig {
  double epsilon = 0.0;       // dimensionless drive parameter
  double delta = 0.0;         // trap asymmetry, [0,1)
  double udc_over_uac = 0.0;  // DC/AC voltage ratio
  double omega0 = 0.0;        // AC drive angular frequency, rad/s
};

struct FieldSpinConfig {
  double b0 = 0.0;       // applied magnetic field, T
  double gamma_e = 0.0;  // gyromagnetic ratio, rad/(s T)
  double d_nv = 0.0;     // zero-field splitting, rad/s
};

struct SystemConfig {
  Geometry geometry;
  TrapConfig trap;
  FieldSpinConfig field;
};

/// Throws ConfigError if any invariant is violated.
void validate(const SystemConfig& s);

// ---------------------------------------------------------------------------
// derived mechanical and spin quantities
// ---------------------------------------------------------------------------

struct InertiaTensor {
  double mass = 0.0;    // kg
  double i_perp = 0.0;  // about axes orthogonal to the symmetry axis, kg m^2
  double i_sym = 0.0;   // about the symmetry axis, kg m^2
};

/// Mass and inertia moments of the homogeneous spheroid:
/// m = (4/3) pi rho a b^2, I3 = (2/5) m b^2, I = (1/5) m (a^2 + b^2).
InertiaTensor derive_inertia(const Geometry& g);

/// Closed-form quadrupole anisotropy, small-b/a expansion: q (a^2 + 2 b^2)/4.
struct QuadrupoleClosed {
  double value = 0.0;
  bool outside_expansion = false;  // set when b/a > 0.5
};
QuadrupoleClosed quadrupole_anisotropy_closed(const Geometry& g, double q);

/// Deterministic quadrature of the exact surface integral for the
/// quadrupole anisotropy of the uniformly charged spheroid.
/// Evaluated at quad_order and 2*quad_order Gauss-Legendre nodes in xi
/// (uniform grid in phi); the refinement difference is reported.
struct QuadrupoleExact {
  double value = 0.0;       // 2*quad_order refinement
  double rel_change = 0.0;  // |coarse - fine| / scale
  bool converged = false;   // rel_change <= 1e-6
};
QuadrupoleExact quadrupole_anisotropy_exact(const Geometry& g, double q, int quad_order = 48);

/// Secular-approximation rates of the trapped rotor + NV spin.
struct SecularRates {
  double omega_l = 0.0;      // Larmor rate, rad/s
  double delta_q = 0.0;      // qubit splitting D_nv - omega_l, rad/s (signed)
  double omega_alpha = 0.0;  // rad/s
  double omega_beta = 0.0;   // rad/s
  double omega_gamma = 0.0;  // rad/s
  double beta0 = 0.0;        // zero-point amplitude, rad
  double gamma0 = 0.0;       // zero-point amplitude, rad
  double g_beta = 0.0;       // coupling rate, rad/s
  double g_gamma = 0.0;      // coupling rate, rad/s
  double xi_beta = 0.0;      // rad/s
  InertiaTensor inertia;
};

SecularRates secular_rates(const SystemConfig& s);

// ---------------------------------------------------------------------------
// dispersive-regime rates, branch-resolved by the sign of the qubit splitting
// ---------------------------------------------------------------------------

enum class Branch { PositiveDelta, NegativeDelta };

/// For Delta > 0 the fields hold (omega~_beta, omega~_gamma, chi_beta,
/// chi_gamma); for Delta < 0 they hold (Omega_beta, Omega_gamma, chi~_beta,
/// chi~_gamma). freq/chi always refer to the trapped oscillator and the
/// spin-conditioned quadratic shift entering H_down (H_up for Delta < 0).
struct DispersiveRates {
  Branch branch = Branch::PositiveDelta;
  double freq_beta = 0.0;         // rad/s
  double freq_gamma = 0.0;        // rad/s
  double chi_beta = 0.0;          // rad/s
  double chi_gamma = 0.0;         // rad/s
  double delta_omega_beta = 0.0;  // branch frequency difference, rad/s
  SecularRates secular;
};

/// Throws ComputeError at the anti-crossing (|Delta| below min_abs_delta)
/// or if a frequency radicand turns negative.
DispersiveRates dispersive_rates(const SystemConfig& s, double min_abs_delta = 1.0);

/// Stability of the beta mode in the spin-down potential (Delta > 0):
/// freq_beta > 2 chi_beta. Always true on the Delta < 0 branch.
bool beta_mode_stable(const DispersiveRates& d);

// ---------------------------------------------------------------------------
// dispersive validity
// ---------------------------------------------------------------------------

/// Left-hand sides of the three dispersive-regime conditions, evaluated with
/// zero-point variances scaled by (2 n + 1) for thermal occupations.
struct ValidityReport {
  bool epsilon_ok = false;
  bool udc_ratio_ok = false;
  double dispersive_terms[3] = {0.0, 0.0, 0.0};
  bool dispersive_ok = false;
  bool beta_stable = false;
};

ValidityReport validity_report(const SystemConfig& s, double threshold = 0.1,
                               double n_beta = 0.0, double n_gamma = 0.0);

// ---------------------------------------------------------------------------
// special field values (bisection, explicit brackets, 1e-6 relative accuracy)
// ---------------------------------------------------------------------------

struct FieldBracket {
  double lo = 1e-3;  // T
  double hi = 1.0;   // T
};

/// Root of Delta(B0) = 0.
double find_anti_crossing(const SystemConfig& s, FieldBracket bracket = {});

/// Root of omega~_beta - 2 chi_beta = 0 on the Delta > 0 branch, i.e. the
/// field where the spin-down beta potential flattens. Default bracket spans
/// up to just below the anti-crossing.
double find_bstar(const SystemConfig& s, FieldBracket bracket = {0.0, 0.0});

enum class RatioKind { GammaOverBeta, BetaOverGamma };

/// Root of freq_ratio(B0) - n = 0 on the requested branch.
/// The ratio orientation is explicit because the source material is
/// inconsistent about it.
double find_resonance_fields(const SystemConfig& s, int n, Branch branch,
                             FieldBracket bracket,
                             RatioKind ratio = RatioKind::GammaOverBeta);

} // namespace nvrotor
