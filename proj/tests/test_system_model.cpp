#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nvrotor/constants.hpp"
#include "nvrotor/sweep.hpp"
#include "nvrotor/system_model.hpp"

using namespace nvrotor;

namespace {
SystemConfig ref() { return reference_system(); }
} // namespace

TEST_CASE("derive_inertia: sphere degenerates to (2/5) m r^2") {
  Geometry g{50e-9, 50e-9, 3.5e3};
  const InertiaTensor it = derive_inertia(g);
  CHECK(it.i_sym == doctest::Approx(0.4 * it.mass * g.b * g.b).epsilon(1e-14));
  CHECK(it.i_perp == doctest::Approx(it.i_sym).epsilon(1e-14));
}

TEST_CASE("derive_inertia: reference mass and moments") {
  const InertiaTensor it = derive_inertia(ref().geometry);
  CHECK(it.mass == doctest::Approx(5.864306e-19).epsilon(1e-6));
  CHECK(it.i_perp == doctest::Approx(1.219776e-33).epsilon(1e-6));
  CHECK(it.i_sym == doctest::Approx(9.382890e-35).epsilon(1e-6));
}

TEST_CASE("derive_inertia: linear in density, rigid-body inequality") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ua(10e-9, 500e-9);
  for (int i = 0; i < 200; ++i) {
    Geometry g;
    g.a = ua(rng);
    g.b = g.a * std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    g.mass_density = std::uniform_real_distribution<double>(1e3, 1e4)(rng);
    const InertiaTensor it = derive_inertia(g);
    CHECK(it.i_sym <= 2.0 * it.i_perp * (1 + 1e-14));
    Geometry g2 = g;
    g2.mass_density *= 2.0;
    const InertiaTensor it2 = derive_inertia(g2);
    CHECK(it2.mass == doctest::Approx(2.0 * it.mass).epsilon(1e-14));
    CHECK(it2.i_perp == doctest::Approx(2.0 * it.i_perp).epsilon(1e-14));
  }
  CHECK_THROWS_AS(derive_inertia(Geometry{20e-9, 100e-9, 3.5e3}), ConfigError);
}

TEST_CASE("quadrupole closed form") {
  Geometry g = ref().geometry;
  const auto q1 = quadrupole_anisotropy_closed(g, 1.0);
  CHECK(q1.value == doctest::Approx(2.70e-15).epsilon(1e-12));
  CHECK_FALSE(q1.outside_expansion);
  const auto q3 = quadrupole_anisotropy_closed(g, 3.0);
  CHECK(q3.value == doctest::Approx(3.0 * q1.value).epsilon(1e-14));
  g.b = 1e-12;  // needle limit -> q a^2 / 4
  CHECK(quadrupole_anisotropy_closed(g, 1.0).value ==
        doctest::Approx(g.a * g.a / 4.0).epsilon(1e-6));
  g.b = 0.6 * g.a;
  CHECK(quadrupole_anisotropy_closed(g, 1.0).outside_expansion);
}

TEST_CASE("quadrupole exact quadrature: sphere, convergence, expansion gap") {
  Geometry sphere{100e-9, 100e-9, 3.5e3};
  const auto s = quadrupole_anisotropy_exact(sphere, 1.0);
  CHECK(s.converged);
  CHECK(std::abs(s.value) < 1e-12 * sphere.a * sphere.a);

  // mpmath-verified reference at b/a = 0.2
  Geometry g = ref().geometry;
  const auto e2 = quadrupole_anisotropy_exact(g, 1.0);
  CHECK(e2.converged);
  CHECK(e2.value == doctest::Approx(2.42964888217e-15).epsilon(1e-8));

  // relative gap to the closed form shrinks monotonically as b/a -> 0
  double prev_gap = 1e9;
  for (double ba : {0.3, 0.2, 0.1}) {
    Geometry gg{100e-9, ba * 100e-9, 3.5e3};
    const double exact = quadrupole_anisotropy_exact(gg, 1.0).value;
    const double closed = quadrupole_anisotropy_closed(gg, 1.0).value;
    const double gap = std::abs(exact - closed) / closed;
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK_THROWS_AS(quadrupole_anisotropy_exact(ref().geometry, 1.0, 8), ConfigError);
}

TEST_CASE("secular rates at the reference point") {
  SystemConfig s = ref();
  const SecularRates r = secular_rates(s);
  CHECK(r.omega_l == doctest::Approx(1.584e10).epsilon(1e-12));
  CHECK(r.delta_q == doctest::Approx(2192741831.6054115).epsilon(1e-12));
  CHECK(r.omega_beta == doctest::Approx(108827.96185405308).epsilon(1e-12));
  CHECK(r.omega_alpha == doctest::Approx(396948.65444209735).epsilon(1e-12));
  CHECK(r.omega_gamma == doctest::Approx(133428.1164197768).epsilon(1e-12));
  CHECK(r.beta0 == doctest::Approx(0.0006302499860582818).epsilon(1e-12));
  CHECK(r.gamma0 == doctest::Approx(0.002440554948087031).epsilon(1e-12));
  CHECK(r.g_gamma == doctest::Approx(27335609.985827435).epsilon(1e-12));
  CHECK(r.g_beta == doctest::Approx(7059159.977515083).epsilon(1e-12));
  CHECK(r.xi_beta == doctest::Approx(3145.9431558175984).epsilon(1e-12));
  // deep USC at 90 mT
  CHECK(r.g_gamma / r.omega_gamma > 10.0);
  CHECK(r.g_beta / r.omega_beta > 10.0);
}

TEST_CASE("secular rates: scaling and identities") {
  SystemConfig s = ref();
  const SecularRates r1 = secular_rates(s);
  s.field.b0 *= 4.0;
  const SecularRates r4 = secular_rates(s);
  CHECK(r4.omega_gamma == doctest::Approx(2.0 * r1.omega_gamma).epsilon(1e-12));
  // omega_gamma^2 I3 = hbar omega_L for any input
  std::mt19937 rng(3);
  for (int i = 0; i < 50; ++i) {
    SystemConfig sc = ref();
    sc.field.b0 = std::uniform_real_distribution<double>(1e-3, 0.4)(rng);
    const SecularRates r = secular_rates(sc);
    CHECK(r.omega_gamma * r.omega_gamma * r.inertia.i_sym ==
          doctest::Approx(hbar * r.omega_l).epsilon(1e-12));
  }
  // Delta = 0 at the anti-crossing field
  SystemConfig sa = ref();
  sa.field.b0 = sa.field.d_nv / sa.field.gamma_e;
  CHECK(std::abs(secular_rates(sa).delta_q) < 1e-5 * sa.field.d_nv);
  // degenerate trap
  SystemConfig sd = ref();
  sd.trap.delta = 0.0;
  CHECK_THROWS_AS(secular_rates(sd), ComputeError);
}

TEST_CASE("dispersive rates, positive branch at 90 mT") {
  const DispersiveRates d = dispersive_rates(ref());
  CHECK(d.branch == Branch::PositiveDelta);
  CHECK(d.freq_beta == doctest::Approx(152005.87867573687).epsilon(1e-12));
  CHECK(d.freq_gamma == doctest::Approx(382634.8184872657).epsilon(1e-12));
  CHECK(d.chi_beta == doctest::Approx(74090.96259165455).epsilon(1e-12));
  CHECK(d.chi_gamma == doctest::Approx(359371.04139333405).epsilon(1e-12));
  CHECK(d.delta_omega_beta == doctest::Approx(106123.80444874562).epsilon(1e-12));
  CHECK(beta_mode_stable(d));                   // 90 mT < B*
  CHECK(2.0 * d.chi_gamma > d.freq_gamma);      // repulsive gamma potential for spin down
}

TEST_CASE("dispersive rates: limits and errors") {
  // omega_beta -> 0 limit: freq_beta -> delta_omega_beta
  SystemConfig s = ref();
  s.trap.udc_over_uac = 1e-9;
  s.trap.delta = 1e-4;
  const DispersiveRates d = dispersive_rates(s);
  CHECK(d.freq_beta == doctest::Approx(d.delta_omega_beta).epsilon(1e-4));
  // anti-crossing floor
  SystemConfig sa = ref();
  sa.field.b0 = sa.field.d_nv / sa.field.gamma_e;
  CHECK_THROWS_AS(dispersive_rates(sa, 1e4), ComputeError);
}

TEST_CASE("dispersive rates, negative branch: special fields of the source data") {
  SystemConfig s = ref();
  s.field.b0 = 118.0e-3;
  const DispersiveRates d118 = dispersive_rates(s);
  CHECK(d118.branch == Branch::NegativeDelta);
  CHECK(d118.freq_beta > 0.0);
  CHECK(d118.freq_gamma > 0.0);
  // the spin-up beta potential turns from inverted to trapped here
  CHECK(2.0 * d118.chi_beta / d118.freq_beta == doctest::Approx(1.0).epsilon(2e-3));
  s.field.b0 = 140.1e-3;
  const DispersiveRates d140 = dispersive_rates(s);
  CHECK(d140.chi_gamma / d140.chi_beta == doctest::Approx(9.0).epsilon(2e-3));
}

TEST_CASE("validity report") {
  const ValidityReport v = validity_report(ref());
  CHECK(v.epsilon_ok);
  CHECK(v.udc_ratio_ok);
  CHECK(v.dispersive_terms[0] == doctest::Approx(2.8694e-06).epsilon(1e-3));
  CHECK(v.dispersive_terms[1] == doctest::Approx(3.1082e-04).epsilon(1e-3));
  CHECK(v.dispersive_terms[2] == doctest::Approx(1.0757e-05).epsilon(1e-3));
  CHECK(v.dispersive_ok);
  CHECK(v.beta_stable);

  // vacuous threshold
  const ValidityReport vinf =
      validity_report(ref(), std::numeric_limits<double>::infinity());
  CHECK(vinf.dispersive_ok);

  // diverges toward the anti-crossing from either side
  SystemConfig s = ref();
  s.field.b0 = 102.3e-3;
  CHECK_FALSE(validity_report(s).dispersive_ok);
  s.field.b0 = 102.6e-3;
  CHECK_FALSE(validity_report(s).dispersive_ok);

  // thermal scaling of the expectation proxies
  const ValidityReport vth = validity_report(ref(), 0.1, 3.0, 3.0);
  CHECK(vth.dispersive_terms[0] == doctest::Approx(7.0 * v.dispersive_terms[0]).epsilon(1e-12));
  CHECK(vth.dispersive_terms[1] == doctest::Approx(7.0 * v.dispersive_terms[1]).epsilon(1e-12));
}

TEST_CASE("find_anti_crossing") {
  SystemConfig s = ref();
  const double b = find_anti_crossing(s);
  CHECK(b == doctest::Approx(102.4587e-3).epsilon(2e-5));
  // doubling gamma_e halves the root
  SystemConfig s2 = ref();
  s2.field.gamma_e *= 2.0;
  CHECK(find_anti_crossing(s2) == doctest::Approx(0.5 * b).epsilon(1e-5));
  // independent of geometry and trap inputs
  SystemConfig s3 = ref();
  s3.geometry.a = 200e-9;
  s3.trap.omega0 *= 3.0;
  CHECK(find_anti_crossing(s3) == doctest::Approx(b).epsilon(1e-6));
  // no root in bracket
  CHECK_THROWS_AS(find_anti_crossing(s, FieldBracket{1e-3, 50e-3}), ComputeError);
}

TEST_CASE("find_bstar") {
  const double bs = find_bstar(ref());
  CHECK(bs == doctest::Approx(90.5403e-3).epsilon(5e-4));
  // the mode is stable below and unstable above
  SystemConfig s = ref();
  s.field.b0 = bs * 0.98;
  CHECK(beta_mode_stable(dispersive_rates(s)));
  s.field.b0 = bs * 1.02;
  CHECK_FALSE(beta_mode_stable(dispersive_rates(s)));
  // raising omega0 stiffens the trap and pushes B* up
  SystemConfig s7 = ref();
  s7.trap.omega0 = two_pi * 7e6;
  CHECK(find_bstar(s7) > bs);
  // arbitrarily stiff trap: no root within a bracket that stays away from the
  // anti-crossing
  SystemConfig shuge = ref();
  shuge.trap.omega0 = two_pi * 500e6;
  CHECK_THROWS_AS(find_bstar(shuge, FieldBracket{1e-3, 95e-3}), ComputeError);
}

TEST_CASE("find_resonance_fields on the positive branch") {
  const double b2 = find_resonance_fields(ref(), 2, Branch::PositiveDelta,
                                          FieldBracket{50e-3, 102.3e-3});
  CHECK(b2 == doctest::Approx(79.047e-3).epsilon(1e-3));
  const double b3 = find_resonance_fields(ref(), 3, Branch::PositiveDelta,
                                          FieldBracket{80e-3, 102.3e-3});
  CHECK(b3 == doctest::Approx(96.796e-3).epsilon(1e-3));
  CHECK_THROWS_AS(find_resonance_fields(ref(), 50, Branch::NegativeDelta,
                                        FieldBracket{103e-3, 400e-3}),
                  ComputeError);
}

TEST_CASE("find_resonance_fields on the negative branch") {
  // Omega_gamma/Omega_beta crosses 3 once below its plateau
  const double b3 = find_resonance_fields(ref(), 3, Branch::NegativeDelta,
                                          FieldBracket{103.5e-3, 400e-3});
  CHECK(b3 == doctest::Approx(110.60e-3).epsilon(2e-3));
  SystemConfig sc = ref();
  sc.field.b0 = b3;
  const DispersiveRates d3 = dispersive_rates(sc);
  CHECK(d3.freq_gamma / d3.freq_beta == doctest::Approx(3.0).epsilon(1e-5));
  // the inverted orientation stays below 1 everywhere on this branch
  CHECK_THROWS_AS(find_resonance_fields(ref(), 1, Branch::NegativeDelta,
                                        FieldBracket{103.5e-3, 400e-3},
                                        RatioKind::BetaOverGamma),
                  ComputeError);
}
