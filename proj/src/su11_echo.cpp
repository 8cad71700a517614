#include "nvrotor/su11_echo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nvrotor/constants.hpp"

namespace nvrotor {

namespace detail {

double reduced_phase(double freq, double tau) {
  // p = freq*tau with its rounding error, then Cody-Waite reduction mod pi
  const double p = freq * tau;
  const double perr = std::fma(freq, tau, -p);
  constexpr double pi_hi = 3.14159265358979311600;
  constexpr double pi_lo = 1.22464679914735317723e-16;
  const double k = std::nearbyint(p / pi_hi);
  const double m = k * pi_hi;
  const double merr = std::fma(k, pi_hi, -m);
  const double r = ((p - m) - merr) - k * pi_lo + perr;
  return 2.0 * r;  // 2*freq*tau mod 2*pi, in (-2*pi, 2*pi)
}

namespace {

struct KernelParts {
  cplx phi, psi, theta;
  cplx de;           // 1 - |eta|^2 e^{i theta}, cancellation-free
  cplx g;            // |eta0| / de
  cplx one_minus_g;  // |eta|^2 (1 - e^{i theta}) / de
};

// Shared denominator and kernel c-numbers. |eta0| is used in place of
// 1 - |eta|^2 (exactly equal by unitarity), which keeps the revival
// neighborhoods free of catastrophic cancellation.
KernelParts kernel_parts(const Su11Factor& f, double freq, double tau) {
  const double th = reduced_phase(freq, tau);
  const cplx x{std::cos(th), std::sin(th)};
  const double sh = std::sin(0.5 * th);
  const cplx one_minus_x{2.0 * sh * sh, -2.0 * sh * std::cos(0.5 * th)};
  const double aeta0 = std::abs(f.eta0);
  const double eta_sq = std::norm(f.eta);
  KernelParts kp;
  kp.de = aeta0 + eta_sq * one_minus_x;
  if (std::abs(kp.de) < 1e-14)
    throw ComputeError("echo_kernel: pole, 1 - |eta|^2 e^{2 i freq tau} vanished");
  kp.g = aeta0 / kp.de;
  kp.one_minus_g = eta_sq * one_minus_x / kp.de;
  kp.phi = std::conj(f.eta) + std::conj(f.eta0) * f.eta * x / kp.de;
  kp.psi = f.eta * std::conj(x) + std::conj(f.eta) * f.eta0 / kp.de;
  kp.theta = f.eta0 * std::conj(f.eta0) / (kp.de * kp.de);
  return kp;
}

} // namespace
} // namespace detail

Su11Factor branch_factorization(double freq, double chi, double tau) {
  if (!(freq > 0.0)) throw ConfigError("branch_factorization: freq must be positive");
  if (tau < 0.0) throw ConfigError("branch_factorization: tau must be non-negative");
  Su11Factor f;
  f.lambda0 = cplx{0.0, -2.0 * tau * (freq - chi)};
  f.lambda = cplx{0.0, chi * tau};
  // (lambda0/2)^2 - lambda^2 = tau^2 freq (2 chi - freq), real
  const double z2 = tau * tau * freq * (2.0 * chi - freq);
  f.zeta = z2 >= 0.0 ? cplx{std::sqrt(z2), 0.0} : cplx{0.0, std::sqrt(-z2)};
  cplx cosh_z, sinhc_z;
  if (std::abs(f.zeta) < 1e-4) {
    // series in zeta^2, accurate to ~1e-20 at the switch point
    sinhc_z = 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0));
    cosh_z = 1.0 + z2 / 2.0 * (1.0 + z2 / 12.0 * (1.0 + z2 / 30.0));
  } else {
    sinhc_z = std::sinh(f.zeta) / f.zeta;
    cosh_z = std::cosh(f.zeta);
  }
  f.denom = cosh_z - 0.5 * f.lambda0 * sinhc_z;
  if (std::abs(f.denom) < 1e-14)
    throw ComputeError("branch_factorization: singular denominator (caustic)");
  f.eta = f.lambda * sinhc_z / f.denom;
  f.eta0 = 1.0 / (f.denom * f.denom);
  return f;
}

EchoKernel echo_kernel(const Su11Factor& f, double freq, double tau) {
  const auto kp = detail::kernel_parts(f, freq, tau);
  EchoKernel k;
  k.phi = kp.phi;
  k.theta = kp.theta;
  k.psi = kp.psi;
  return k;
}

cplx overlap_squared(const Su11Factor& f, double n_bar, double freq, double tau) {
  if (n_bar < 0.0) throw ConfigError("overlap_squared: n_bar must be non-negative");
  const auto kp = detail::kernel_parts(f, freq, tau);
  const cplx q = n_bar * kp.one_minus_g + 1.0;
  const cplx r = q * q - n_bar * n_bar * kp.phi * kp.psi;
  return kp.g / r;
}

cplx thermal_overlap(const EchoKernel& k, const Su11Factor& f, double n_bar,
                     double freq, double tau, cplx prev) {
  if (n_bar < 0.0) throw ConfigError("thermal_overlap: n_bar must be non-negative");
  const auto kp = detail::kernel_parts(f, freq, tau);
  const cplx q = n_bar * kp.one_minus_g + 1.0;
  const cplx r = q * q - n_bar * n_bar * k.phi * k.psi;
  const cplx root = std::sqrt(kp.g / r);
  return std::abs(root - prev) <= std::abs(-root - prev) ? root : -root;
}

std::vector<cplx> mode_overlap_trace(double freq, double chi, double n_bar,
                                     const std::vector<double>& taus) {
  std::vector<cplx> out(taus.size());
  cplx prev{1.0, 0.0};
  double tau_prev = 0.0;
  auto value_at = [&](double tau) {
    const Su11Factor f = branch_factorization(freq, chi, tau);
    return overlap_squared(f, n_bar, freq, tau);
  };
  // advance the branch from tau_prev to tau along steps <= pi/(64 freq),
  // halving locally when the root assignment looks ambiguous
  auto advance_to = [&](double tau) {
    const double step = pi / (64.0 * freq);
    while (tau_prev < tau) {
      double t = std::min(tau_prev + step, tau);
      for (int halve = 0;; ++halve) {
        const cplx root = std::sqrt(value_at(t));
        const double d_pos = std::abs(root - prev);
        const double d_neg = std::abs(-root - prev);
        const bool ambiguous = std::min(d_pos, d_neg) > 0.8 * std::max(d_pos, d_neg) &&
                               std::min(d_pos, d_neg) > 1e-3 * std::abs(prev);
        if (!ambiguous || halve >= 24 || t - tau_prev < 1e-18) {
          prev = d_pos <= d_neg ? root : -root;
          tau_prev = t;
          break;
        }
        t = 0.5 * (tau_prev + t);
      }
    }
  };
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double tau = taus[i];
    if (tau < tau_prev)
      throw ConfigError("mode_overlap_trace: tau grid must be ascending");
    if (tau == 0.0) {
      out[i] = cplx{1.0, 0.0};
      continue;
    }
    advance_to(tau);
    out[i] = prev;
  }
  return out;
}

double thermal_occupation_transfer(double n_gamma, double freq_beta, double freq_gamma) {
  if (n_gamma < 0.0) throw ConfigError("thermal_occupation_transfer: n_gamma must be >= 0");
  if (!(freq_beta > 0.0) || !(freq_gamma > 0.0))
    throw ConfigError("thermal_occupation_transfer: frequencies must be positive");
  if (n_gamma == 0.0) return 0.0;
  if (freq_beta == freq_gamma) return n_gamma;
  return 1.0 / (std::pow(1.0 / n_gamma + 1.0, freq_beta / freq_gamma) - 1.0);
}

DephasingSpec DephasingSpec::from_t2(double t2) {
  DephasingSpec d;
  d.t2 = t2;
  d.gamma2 = (t2 > 0.0 && std::isfinite(t2)) ? two_pi / t2 : 0.0;
  return d;
}

DephasingSpec DephasingSpec::from_gamma2(double gamma2) {
  if (gamma2 < 0.0) throw ConfigError("DephasingSpec: gamma2 must be non-negative");
  DephasingSpec d;
  d.gamma2 = gamma2;
  d.t2 = gamma2 > 0.0 ? two_pi / gamma2 : std::numeric_limits<double>::infinity();
  return d;
}

double resolve_n_beta(const ThermalSpec& thermal, const DispersiveRates& rates) {
  if (thermal.n_beta) {
    if (*thermal.n_beta < 0.0) throw ConfigError("ThermalSpec: n_beta must be >= 0");
    return *thermal.n_beta;
  }
  return thermal_occupation_transfer(thermal.n_gamma, rates.freq_beta, rates.freq_gamma);
}

std::vector<ProbabilityPoint> protocol_trace(const DispersiveRates& rates,
                                             const ThermalSpec& thermal,
                                             const DephasingSpec& deph,
                                             const std::vector<double>& tau_grid,
                                             const TraceOptions& opts) {
  if (tau_grid.empty()) throw ConfigError("protocol_trace: empty tau grid");
  if (thermal.n_gamma < 0.0) throw ConfigError("protocol_trace: n_gamma must be >= 0");
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (tau_grid[i] < 0.0 || (i > 0 && tau_grid[i] < tau_grid[i - 1]))
      throw ConfigError("protocol_trace: tau grid must be ascending and non-negative");
  }
  if (opts.include_beta && !opts.allow_unstable_beta && !beta_mode_stable(rates))
    throw ComputeError("protocol_trace: beta mode unstable (freq_beta <= 2 chi_beta) "
                       "while include_beta is set");

  const auto gamma_i =
      mode_overlap_trace(rates.freq_gamma, rates.chi_gamma, thermal.n_gamma, tau_grid);
  std::vector<cplx> beta_i;
  if (opts.include_beta) {
    const double n_beta = resolve_n_beta(thermal, rates);
    beta_i = mode_overlap_trace(rates.freq_beta, rates.chi_beta, n_beta, tau_grid);
  }

  std::vector<ProbabilityPoint> out(tau_grid.size());
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    ProbabilityPoint& p = out[i];
    p.tau = tau_grid[i];
    p.overlap_gamma = gamma_i[i];
    p.overlap_beta = opts.include_beta ? beta_i[i] : cplx{1.0, 0.0};
    const double half_re = 0.5 * std::real(p.overlap_beta * p.overlap_gamma);
    // p0 - 1/2 is recovered by an exact subtraction so that the dephasing
    // factorization P(tau; G2) - 1/2 = e^{-2 G2 tau} (P(tau; 0) - 1/2)
    // holds bitwise
    const double p0 = 0.5 + half_re;
    const double h = p0 - 0.5;
    const double damp = std::exp(-2.0 * deph.gamma2 * p.tau);
    p.p_up = 0.5 + damp * h;
    p.p_down = 1.0 - p.p_up;
  }
  return out;
}

ProbabilityPoint protocol_probability(const DispersiveRates& rates,
                                      const ThermalSpec& thermal,
                                      const DephasingSpec& deph, double tau,
                                      bool include_beta) {
  TraceOptions opts;
  opts.include_beta = include_beta;
  const std::vector<double> grid{tau};
  return protocol_trace(rates, thermal, deph, grid, opts).back();
}

} // namespace nvrotor
