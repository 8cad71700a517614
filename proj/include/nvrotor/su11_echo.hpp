#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "nvrotor/errors.hpp"
#include "nvrotor/system_model.hpp"

namespace nvrotor {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// SU(1,1) factorization of the squeezing propagator
// ---------------------------------------------------------------------------

/// Normal-ordered factorization parameters of U_down = exp(-i tau h_down):
///   exp(-i tau h_down) = e^{i freq tau / 2} .
///       exp((eta/2) a^dag^2) exp(log(eta0) (a^dag a + a a^dag)/4) exp((eta/2) a^2)
/// with lambda0 = -2 i tau (freq - chi), lambda = i chi tau,
/// zeta^2 = (lambda0/2)^2 - lambda^2. `denom` is the scaled denominator
/// cosh(zeta) - (lambda0/2) sinh(zeta)/zeta, which equals 1 at tau = 0;
/// eta0 = 1/denom^2 and |eta0| = 1 - |eta|^2 (unitarity).
struct Su11Factor {
  cplx eta{};
  cplx eta0{};
  cplx zeta{};
  cplx lambda0{};
  cplx lambda{};
  cplx denom{};
};

/// Throws ComputeError at the factorization caustic (|denom| < 1e-14).
Su11Factor branch_factorization(double freq, double chi, double tau);

// ---------------------------------------------------------------------------
// composite echo kernel U_down^dag U_up^dag U_down U_up
// ---------------------------------------------------------------------------

/// The echo operator equals
///   exp((phi/2) a^dag^2) exp(log(theta) (a^dag a + a a^dag)/4) exp((psi/2) a^2).
struct EchoKernel {
  cplx phi{};
  cplx theta{1.0, 0.0};
  cplx psi{};
};

/// Throws ComputeError when the shared denominator 1 - |eta|^2 e^{2 i freq tau}
/// vanishes within 1e-14.
EchoKernel echo_kernel(const Su11Factor& f, double freq, double tau);

// ---------------------------------------------------------------------------
// thermal overlap amplitude
// ---------------------------------------------------------------------------

/// Squared overlap amplitude I^2 = g / ([n(1-g)+1]^2 - n^2 phi psi) with
/// g = |eta0| / (1 - |eta|^2 e^{2 i freq tau}). Branch-free.
cplx overlap_squared(const Su11Factor& f, double n_bar, double freq, double tau);

/// Square root of overlap_squared with the branch fixed by continuity:
/// of the two roots, returns the one closer to `prev`. Single-point
/// evaluations must be driven along a tau path anchored at I(0) = 1;
/// use mode_overlap_trace for that.
cplx thermal_overlap(const EchoKernel& k, const Su11Factor& f, double n_bar,
                     double freq, double tau, cplx prev);

/// Overlap amplitude of one mode on an ascending tau grid (first entry 0),
/// branch-tracked on an internal dense path with step <= pi/(64 freq).
std::vector<cplx> mode_overlap_trace(double freq, double chi, double n_bar,
                                     const std::vector<double>& taus);

/// Mean occupation of the beta mode at the temperature fixed by n_gamma.
double thermal_occupation_transfer(double n_gamma, double freq_beta, double freq_gamma);

// ---------------------------------------------------------------------------
// protocol probability
// ---------------------------------------------------------------------------

struct ThermalSpec {
  double n_gamma = 0.0;
  std::optional<double> n_beta{};  // derived via thermal_occupation_transfer when absent
};

struct DephasingSpec {
  double t2 = 0.0;      // seconds; <= 0 or infinity means no dephasing
  double gamma2 = 0.0;  // rad/s

  static DephasingSpec from_t2(double t2);
  static DephasingSpec from_gamma2(double gamma2);
  static DephasingSpec none() { return {}; }
};

struct ProbabilityPoint {
  double tau = 0.0;
  double p_up = 1.0;
  double p_down = 0.0;
  cplx overlap_beta{1.0, 0.0};
  cplx overlap_gamma{1.0, 0.0};
};

struct TraceOptions {
  bool include_beta = true;
  // Figure sweeps cross the beta instability; the closed form stays defined
  // there (the initial state is thermal of the stable trapped branch).
  bool allow_unstable_beta = false;
};

/// Probability trace over an ascending tau grid (entries >= 0; the branch
/// path is always anchored at tau = 0 internally).
std::vector<ProbabilityPoint> protocol_trace(const DispersiveRates& rates,
                                             const ThermalSpec& thermal,
                                             const DephasingSpec& deph,
                                             const std::vector<double>& tau_grid,
                                             const TraceOptions& opts = {});

/// Single-tau convenience wrapper around protocol_trace.
ProbabilityPoint protocol_probability(const DispersiveRates& rates,
                                      const ThermalSpec& thermal,
                                      const DephasingSpec& deph, double tau,
                                      bool include_beta = true);

/// Resolved beta occupation for a thermal spec at the given rates.
double resolve_n_beta(const ThermalSpec& thermal, const DispersiveRates& rates);

namespace detail {
/// 2*freq*tau reduced modulo 2*pi with a compensated product, so that the
/// oscillatory kernel factors stay accurate at large winding numbers.
double reduced_phase(double freq, double tau);
} // namespace detail

} // namespace nvrotor
