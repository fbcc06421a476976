#include "doctest.h"

#include <cmath>

#include "vshp/errors.hpp"
#include "vshp/vi_vsm.hpp"

using namespace vshp;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("virtual stator current") {
  VsmParams p;  // r_s = 0.01, l_s = 0.25

  SUBCASE("hand-computed operating point") {
    Phasor i = vsm_electrical_model(p, 1.05, 0.0, Phasor{1.0, 0.0}, 1.0);
    std::complex<double> ref = std::complex<double>(0.05, 0.0) / std::complex<double>(0.01, 0.25);
    CHECK(i.re == doctest::Approx(ref.real()).epsilon(1e-12));
    CHECK(i.im == doctest::Approx(ref.imag()).epsilon(1e-12));
    CHECK(i.re == doctest::Approx(0.0079872).epsilon(1e-4));
    CHECK(i.im == doctest::Approx(-0.19968).epsilon(1e-4));
  }

  SUBCASE("emf aligned with the filtered voltage drives no current") {
    Phasor i = vsm_electrical_model(p, 1.0, 0.2, Phasor::polar(1.0, 0.2), 1.0);
    CHECK(std::abs(i.re) < 1e-14);
    CHECK(std::abs(i.im) < 1e-14);
  }

  SUBCASE("degenerate impedance is rejected") {
    VsmParams bad = p;
    bad.r_s = 0.0;
    bad.l_s = 0.0;
    CHECK_THROWS_AS(vsm_electrical_model(bad, 1.0, 0.0, Phasor{1.0, 0.0}, 1.0),
                    DegenerateImpedance);
  }
}

TEST_CASE("swing emulation") {
  VsmParams p;  // t_a = 4, k_d = 40, w_d = 5, k_omega = 20

  SUBCASE("matched power at nominal speed is stationary") {
    VsmState s;  // omega = 1, x_d = 1
    VsmSwingOut out = vsm_swing_step(p, s, 0.9, 0.0, 1.0, 0.9);
    CHECK(out.p_r_star == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(out.domega == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(out.dx_d == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(out.dtheta == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("power surplus accelerates at the mechanical time constant") {
    VsmState s;
    VsmSwingOut out = vsm_swing_step(p, s, 0.9, 0.0, 1.0, 0.5);
    CHECK(out.p_r_star == doctest::Approx(0.9));
    CHECK(out.domega == doctest::Approx(0.4 / 4.0).epsilon(1e-14));
  }

  SUBCASE("washout damping pulls on the speed difference") {
    VsmState s;
    s.omega = 1.001;
    s.x_d = 1.0;
    VsmSwingOut out = vsm_swing_step(p, s, 0.9, 0.0, 1.0, 0.0);
    double expect = (out.p_r_star - 0.0 - 40.0 * 0.001) / 4.0;
    CHECK(out.domega == doctest::Approx(expect).epsilon(1e-14));
    CHECK(out.dx_d == doctest::Approx(5.0 * 0.001).epsilon(1e-14));
    // The washout contributes nothing once x_d has caught up.
    s.x_d = s.omega;
    VsmSwingOut settled = vsm_swing_step(p, s, 0.9, 0.0, 1.0, 0.0);
    CHECK(settled.domega == doctest::Approx(out.domega + 40.0 * 0.001 / 4.0).epsilon(1e-12));
    CHECK(settled.dx_d == 0.0);
  }

  SUBCASE("frequency control shifts the effective reference") {
    VsmState s;
    s.omega = 0.995;
    VsmSwingOut out = vsm_swing_step(p, s, 0.9, 0.05, 1.0, 0.9);
    CHECK(out.p_r_star == doctest::Approx(0.9 + 20.0 * 0.005 + 0.05).epsilon(1e-13));
  }

  SUBCASE("angle integrates the speed deviation") {
    VsmState s;
    CHECK(vsm_swing_step(p, s, 0.9, 0.0, 1.0, 0.9).dtheta == 0.0);
    s.omega = 1.001;
    CHECK(vsm_swing_step(p, s, 0.9, 0.0, 1.0, 0.9).dtheta ==
          doctest::Approx(100.0 * kPi * 0.001).epsilon(1e-12));
  }
}

TEST_CASE("voltage and reactive control") {
  VsmParams p;  // kp_v = 0.29, ki_v = 92, k_q = 0.1, w_qf = 200

  VsmState s;
  s.x_v = 1.0;
  s.q_f = 0.05;
  VsmVoltageOut out = vsm_voltage_control(p, s, 0.98, 0.1, 1.0, 0.0);
  const double err = (1.0 - 0.98) + 0.1 * (0.0 - 0.05);
  CHECK(out.error == doctest::Approx(err).epsilon(1e-14));
  CHECK(out.dx_v == doctest::Approx(92.0 * err).epsilon(1e-12));
  CHECK(out.v_e_hat == doctest::Approx(0.29 * err + 1.0).epsilon(1e-12));
  CHECK(out.dq_f == doctest::Approx(200.0 * (0.1 - 0.05)).epsilon(1e-12));

  // Overvoltage pulls the EMF command below the integrator value.
  VsmVoltageOut high = vsm_voltage_control(p, s, 1.1, 0.0, 1.0, 0.0);
  CHECK(high.v_e_hat < s.x_v);

  // Grid voltage filter derivative.
  Phasor dv = vsm_voltage_filter_deriv(p, [] {
    VsmState t;
    t.v_f_re = 0.9;
    t.v_f_im = 0.1;
    return t;
  }(), Phasor{1.0, 0.0});
  CHECK(dv.re == doctest::Approx(200.0 * 0.1).epsilon(1e-12));
  CHECK(dv.im == doctest::Approx(-200.0 * 0.1).epsilon(1e-12));
}

TEST_CASE("pd supplement") {
  VsmPdParams p;  // kp = 100, kd = 500, t_filter = 1

  SUBCASE("settled deviation leaves the proportional part") {
    VsmPdState s{0.002};
    SupplementOut out = vsm_pd_supplement(p, s, 0.002);
    CHECK(out.p_sup == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(out.dx_df == 0.0);
  }

  SUBCASE("ramp input plateaus at kd times slope") {
    const double slope = 0.01;
    VsmPdState s;
    const double dt = 1e-3;
    double p_sup = 0.0;
    for (int k = 0; k < 12000; ++k) {
      double u = slope * k * dt;
      SupplementOut out = vsm_pd_supplement(p, s, u);
      s.x_df += dt * out.dx_df;  // filter pole at 1 s; explicit update suffices
      p_sup = vsm_pd_supplement(p, s, slope * (k + 1) * dt).p_sup;
    }
    double u_final = slope * 12000 * dt;
    CHECK(p_sup - 100.0 * u_final == doctest::Approx(500.0 * 1.0 * slope).epsilon(2e-2));
  }

  SUBCASE("zero gains reduce to the plain machine") {
    VsmPdParams zero{0.0, 0.0, 1.0};
    SupplementOut out = vsm_pd_supplement(zero, {0.3}, 0.7);
    CHECK(out.p_sup == 0.0);

    VsmParams vp;
    VsmState vs;
    VsmSwingOut plain = vsm_swing_step(vp, vs, 0.9, 0.0, 1.0, 0.5);
    VsmSwingOut with_zero = vsm_swing_step(vp, vs, 0.9, out.p_sup, 1.0, 0.5);
    CHECK(plain.p_r_star == with_zero.p_r_star);
    CHECK(plain.domega == with_zero.domega);
  }
}

TEST_CASE("pid supplement") {
  VsmPidParams p;  // kp = 3000, ki = 476, kd = 12600, droop = 0.01

  SUBCASE("droop point zeroes the error") {
    VsmPidState s;
    s.p_f = 0.4;
    s.x_int = 0.05;
    double omega_g = 1.0 - p.droop * s.p_f;
    VsmPidSupplementOut out = vsm_pid_supplement(p, s, omega_g, 1.0, 0.4);
    CHECK(out.eps == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(out.p_sup == doctest::Approx(0.05).epsilon(1e-13));
    CHECK(out.dx_int == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("constant error drives the integrator at ki") {
    VsmPidState s;
    VsmPidSupplementOut out = vsm_pid_supplement(p, s, 1.0 - 1e-4, 1.0, 0.0);
    CHECK(out.eps == doctest::Approx(1e-4).epsilon(1e-10));
    CHECK(out.dx_int == doctest::Approx(476.0 * 1e-4).epsilon(1e-10));
    CHECK(out.dp_f == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("power feedback filter pole") {
    VsmPidState s;
    s.p_f = 0.1;
    VsmPidSupplementOut out = vsm_pid_supplement(p, s, 1.0, 1.0, 0.5);
    CHECK(out.dp_f == doctest::Approx((0.5 - 0.1) / 0.1).epsilon(1e-13));
  }
}
