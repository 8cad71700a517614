#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nvrotor/constants.hpp"
#include "nvrotor/su11_echo.hpp"
#include "nvrotor/sweep.hpp"

using namespace nvrotor;

namespace {
DispersiveRates ref_rates() { return dispersive_rates(reference_system()); }

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = a + (b - a) * i / double(n - 1);
  return g;
}
} // namespace

TEST_CASE("branch_factorization: identity at tau = 0") {
  const Su11Factor f = branch_factorization(1e5, 4e4, 0.0);
  CHECK(std::abs(f.eta) == 0.0);
  CHECK(std::abs(f.eta0 - cplx{1.0, 0.0}) < 1e-15);
}

TEST_CASE("branch_factorization: pure rotation at chi = 0") {
  const double freq = 3.7e5;
  for (double tau : {1e-6, 5e-6, 2.3e-5}) {
    const Su11Factor f = branch_factorization(freq, 0.0, tau);
    CHECK(std::abs(f.eta) < 1e-16);
    const cplx expect = std::exp(cplx{0.0, -2.0 * freq * tau});
    CHECK(std::abs(f.eta0 - expect) < 1e-9);
  }
}

TEST_CASE("branch_factorization: algebraic invariants") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uf(1e4, 1e6), ux(0.0, 1.2), ut(0.0, 3.0);
  for (int i = 0; i < 300; ++i) {
    const double freq = uf(rng);
    const double chi = ux(rng) * freq;
    const double tau = ut(rng) * pi / freq;
    const Su11Factor f = branch_factorization(freq, chi, tau);
    // zeta^2 = (lambda0/2)^2 - lambda^2
    const cplx lhs = f.zeta * f.zeta;
    const cplx rhs = 0.25 * f.lambda0 * f.lambda0 - f.lambda * f.lambda;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    // unitarity: |eta0| = 1 - |eta|^2
    CHECK(std::abs(f.eta0) ==
          doctest::Approx(1.0 - std::norm(f.eta)).epsilon(1e-10));
  }
}

TEST_CASE("branch_factorization: |eta| grows monotonically under repulsion") {
  const DispersiveRates d = ref_rates();  // gamma mode has 2 chi > freq
  REQUIRE(2.0 * d.chi_gamma > d.freq_gamma);
  double prev = -1.0;
  for (double t : linspace(0.0, pi / d.freq_gamma, 40)) {
    const double cur = std::abs(branch_factorization(d.freq_gamma, d.chi_gamma, t).eta);
    CHECK(cur >= prev - 1e-14);
    prev = cur;
  }
}

TEST_CASE("echo_kernel: identity cases") {
  const Su11Factor f0 = branch_factorization(2e5, 8e4, 0.0);
  const EchoKernel k0 = echo_kernel(f0, 2e5, 0.0);
  CHECK(std::abs(k0.phi) < 1e-15);
  CHECK(std::abs(k0.psi) < 1e-15);
  CHECK(std::abs(k0.theta - cplx{1.0, 0.0}) < 1e-14);
  for (double tau : {1e-6, 7e-6}) {
    const Su11Factor f = branch_factorization(2e5, 0.0, tau);
    const EchoKernel k = echo_kernel(f, 2e5, tau);
    CHECK(std::abs(k.phi) < 1e-13);
    CHECK(std::abs(k.psi) < 1e-13);
    CHECK(std::abs(k.theta - cplx{1.0, 0.0}) < 1e-12);
  }
}

TEST_CASE("thermal overlap: identity, frozen reference values") {
  const DispersiveRates d = ref_rates();
  const double fg = d.freq_gamma, cg = d.chi_gamma;
  const double rev = pi / fg;
  // values cross-checked against the truncated-Fock echo trace
  const std::vector<double> taus = {0.0, 0.25 * rev, 0.5 * rev, 0.75 * rev, rev};
  const auto iv = mode_overlap_trace(fg, cg, 1.0, taus);
  CHECK(std::abs(iv[0] - cplx{1.0, 0.0}) == 0.0);
  CHECK(iv[1].real() == doctest::Approx(4.518551347938576e-01).epsilon(1e-9));
  CHECK(iv[1].imag() == doctest::Approx(9.870643831591415e-02).epsilon(1e-9));
  CHECK(iv[2].real() == doctest::Approx(1.510838575577102e-01).epsilon(1e-9));
  CHECK(iv[3].real() == doctest::Approx(8.833027725500073e-02).epsilon(1e-8));
  CHECK(iv[3].imag() == doctest::Approx(-2.426090151015224e-02).epsilon(1e-8));
  CHECK(std::abs(iv[4] - cplx{1.0, 0.0}) < 1e-12);  // parity revival
}

TEST_CASE("thermal overlap: chi = 0 cancels the echo for any occupation") {
  for (double n : {0.0, 1.0, 37.5}) {
    const auto iv = mode_overlap_trace(2e5, 0.0, n, linspace(0.0, 1e-4, 33));
    for (const cplx& v : iv) CHECK(std::abs(v - cplx{1.0, 0.0}) < 1e-12);
  }
}

TEST_CASE("thermal overlap: |I| stays within the physical bound") {
  const DispersiveRates d = ref_rates();
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> un(0.0, 50.0);
  for (int rep = 0; rep < 10; ++rep) {
    const double n = un(rng);
    const auto iv = mode_overlap_trace(d.freq_gamma, d.chi_gamma, n,
                                       linspace(0.0, 2.4 * pi / d.freq_gamma, 257));
    for (const cplx& v : iv) CHECK(std::abs(v) <= 1.0 + 1e-9);
  }
}

TEST_CASE("thermal_overlap single point follows the trace branch") {
  const DispersiveRates d = ref_rates();
  const double fg = d.freq_gamma, cg = d.chi_gamma;
  const auto taus = linspace(0.0, 0.6 * pi / fg, 200);
  cplx prev{1.0, 0.0};
  const auto iv = mode_overlap_trace(fg, cg, 2.0, taus);
  for (std::size_t i = 1; i < taus.size(); ++i) {
    const Su11Factor f = branch_factorization(fg, cg, taus[i]);
    const EchoKernel k = echo_kernel(f, fg, taus[i]);
    const cplx v = thermal_overlap(k, f, 2.0, fg, taus[i], prev);
    CHECK(std::abs(v - iv[i]) < 1e-10);
    prev = v;
  }
}

TEST_CASE("thermal_occupation_transfer") {
  CHECK(thermal_occupation_transfer(0.7341, 1.23e5, 1.23e5) == 0.7341);  // exact
  CHECK(thermal_occupation_transfer(1.0, 2e5, 1e5) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(thermal_occupation_transfer(0.0, 2e5, 1e5) == 0.0);
  // classical equipartition limit
  const double big = thermal_occupation_transfer(1e8, 0.4e5, 1e5);
  CHECK(big / 1e8 == doctest::Approx(1e5 / 0.4e5).epsilon(1e-3));
  CHECK_THROWS_AS(thermal_occupation_transfer(-1.0, 1.0, 1.0), ConfigError);
}

TEST_CASE("protocol probability: protocol limits") {
  const DispersiveRates d = ref_rates();
  ThermalSpec th;
  th.n_gamma = 1.0;
  const ProbabilityPoint p0 = protocol_probability(d, th, DephasingSpec::none(), 0.0);
  CHECK(p0.p_up == 1.0);
  CHECK(p0.p_down == 0.0);
  // full dephasing kills the interference
  const ProbabilityPoint pd = protocol_probability(
      d, th, DephasingSpec::from_gamma2(1e9), 0.4 * pi / d.freq_gamma);
  CHECK(pd.p_up == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("protocol probability: parity revivals without the beta mode") {
  const DispersiveRates d = ref_rates();
  ThermalSpec th;
  th.n_gamma = 1.0;
  for (int k = 1; k <= 3; ++k) {
    const double tau = k * pi / d.freq_gamma;
    const ProbabilityPoint p =
        protocol_probability(d, th, DephasingSpec::none(), tau, false);
    CHECK(std::abs(p.p_up - 1.0) < 1e-12);
  }
}

TEST_CASE("protocol probability: two-mode revival at commensurate frequencies") {
  // when the fast mode is an integer multiple of the slow one, both echo
  // operators are powers of parity at the slow half-period
  DispersiveRates d;
  d.branch = Branch::PositiveDelta;
  d.freq_gamma = 1.0e5;
  d.chi_gamma = 0.8e5;   // repulsive down potential
  d.freq_beta = 3.0e5;
  d.chi_beta = 0.7e5;    // stable beta
  ThermalSpec th;
  th.n_gamma = 1.0;
  th.n_beta = 2.0;
  const ProbabilityPoint p =
      protocol_probability(d, th, DephasingSpec::none(), pi / d.freq_gamma);
  CHECK(std::abs(p.p_up - 1.0) < 1e-6);
}

TEST_CASE("protocol probability: exact identities") {
  const DispersiveRates d = ref_rates();
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> un(0.0, 30.0), ut(0.0, 1.4), ug(0.0, 2e5);
  for (int i = 0; i < 200; ++i) {
    ThermalSpec th;
    th.n_gamma = un(rng);
    const double tau = ut(rng) * pi / d.freq_gamma;
    const double g2 = ug(rng);
    const ProbabilityPoint p = protocol_probability(d, th, DephasingSpec::from_gamma2(g2), tau);
    const ProbabilityPoint q = protocol_probability(d, th, DephasingSpec::none(), tau);
    CHECK(p.p_up + p.p_down == 1.0);  // bitwise
    CHECK(p.p_up >= 0.0);
    CHECK(p.p_up <= 1.0);
    // dephasing factorization, bitwise given the evaluation order
    CHECK(p.p_up == 0.5 + std::exp(-2.0 * g2 * tau) * (q.p_up - 0.5));
    // overlaps are dephasing-independent
    CHECK(p.overlap_gamma == q.overlap_gamma);
  }
}

TEST_CASE("protocol trace: grid validation and beta instability") {
  const DispersiveRates d = ref_rates();
  ThermalSpec th;
  CHECK_THROWS_AS(protocol_trace(d, th, DephasingSpec::none(), {1e-6, 0.5e-6}),
                  ConfigError);
  CHECK_THROWS_AS(protocol_trace(d, th, DephasingSpec::none(), {}), ConfigError);
  // beyond B*, include_beta errors unless explicitly allowed
  SystemConfig s = reference_system();
  s.field.b0 = 95e-3;
  const DispersiveRates du = dispersive_rates(s);
  REQUIRE_FALSE(beta_mode_stable(du));
  CHECK_THROWS_AS(protocol_trace(du, th, DephasingSpec::none(), {0.0, 1e-6}),
                  ComputeError);
  TraceOptions opts;
  opts.allow_unstable_beta = true;
  const auto tr = protocol_trace(du, th, DephasingSpec::none(), {0.0, 1e-6}, opts);
  CHECK(tr.size() == 2);
  CHECK(std::isfinite(tr[1].p_up));
}

TEST_CASE("dephasing spec construction") {
  const DephasingSpec d = DephasingSpec::from_t2(0.5e-3);
  CHECK(d.gamma2 == doctest::Approx(two_pi / 0.5e-3).epsilon(1e-15));
  CHECK(DephasingSpec::from_t2(std::numeric_limits<double>::infinity()).gamma2 == 0.0);
  CHECK(DephasingSpec::none().gamma2 == 0.0);
  CHECK_THROWS_AS(DephasingSpec::from_gamma2(-1.0), ConfigError);
}

TEST_CASE("reduced phase agrees with the plain product at small winding") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uf(1e4, 1e6), ut(0.0, 1e-5);
  for (int i = 0; i < 200; ++i) {
    const double f = uf(rng), t = ut(rng);
    const double r = detail::reduced_phase(f, t);
    const double expect = std::remainder(2.0 * f * t, two_pi);
    CHECK(std::abs(std::sin(r) - std::sin(expect)) < 1e-10);
    CHECK(std::abs(std::cos(r) - std::cos(expect)) < 1e-10);
  }
}
