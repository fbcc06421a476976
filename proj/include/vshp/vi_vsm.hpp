#pragma once

#include "vshp/phasor.hpp"
#include "vshp/vi_vsg.hpp"

namespace vshp {

// ---------------------------------------------------------------------------
// Virtual synchronous machine: reactive/voltage droop control shaping an EMF
// magnitude, a quasi-stationary electrical model behind (r_s + j w l_s), and
// a swing-equation emulation with washout damping driving the EMF angle.
// ---------------------------------------------------------------------------

struct VsmParams {
  // Voltage controller (PI) and reactive droop.
  double kp_v = 0.29;
  double ki_v = 92.0;
  double k_ffe = 0.0;   // error feedforward into the EMF magnitude
  double w_qf = 200.0;  // reactive power filter pole, rad/s
  double k_q = 0.1;     // reactive droop gain
  // Electrical model.
  double w_vf = 200.0;  // grid voltage filter pole, rad/s
  double l_s = 0.25;    // virtual stator inductance, pu
  double r_s = 0.01;    // virtual stator resistance, pu
  // Frequency control and inertia emulation.
  double k_omega = 20.0;  // frequency controller gain (variant value resolved upstream)
  double t_a = 4.0;       // mechanical time constant, s
  double k_d = 40.0;      // damping gain on the washout speed difference
  double w_d = 5.0;       // washout pole, rad/s
  double omega_b = 2.0 * 3.14159265358979323846 * 50.0;  // rad/s
  // Accepted and stored for config compatibility; the implemented topology
  // has no separate AD filter branch.
  double k_ad = 0.3;
  double w_ad = 50.0;
};

struct VsmState {
  double omega = 1.0;   // virtual rotor speed, pu
  double theta = 0.0;   // virtual rotor angle, rad (network frame)
  double x_v = 0.0;     // voltage PI integrator (EMF magnitude units)
  double q_f = 0.0;     // filtered reactive power, pu
  double v_f_re = 1.0;  // filtered grid voltage, network frame
  double v_f_im = 0.0;
  double x_d = 1.0;     // washout state tracking omega
};

struct VsmVoltageOut {
  double v_e_hat = 0.0;  // commanded EMF magnitude, pu
  double error = 0.0;    // combined voltage/reactive error
  double dx_v = 0.0;
  double dq_f = 0.0;
};

// q_g is the instantaneous generator-convention reactive output feeding the
// filter; v_mag the measured terminal voltage magnitude.
VsmVoltageOut vsm_voltage_control(const VsmParams& p, const VsmState& s, double v_mag,
                                  double q_g, double v_ref, double q_ref);

// Stator current from the EMF phasor and the filtered grid voltage. Throws
// DegenerateImpedance if |r_s + j omega l_s| collapses.
Phasor vsm_electrical_model(const VsmParams& p, double v_e_hat, double theta,
                            Phasor v_filtered, double omega_vsm);

struct VsmSwingOut {
  double p_r_star = 0.0;  // effective power reference after frequency control
  double domega = 0.0;
  double dx_d = 0.0;
  double dtheta = 0.0;
};

// p_sup is the supplementary control power (zero for the plain VSM),
// p_ref the dispatch reference, p_g the measured electrical output.
VsmSwingOut vsm_swing_step(const VsmParams& p, const VsmState& s, double p_ref,
                           double p_sup, double omega_ref, double p_g);

inline Phasor vsm_voltage_filter_deriv(const VsmParams& p, const VsmState& s, Phasor v_g) {
  return {p.w_vf * (v_g.re - s.v_f_re), p.w_vf * (v_g.im - s.v_f_im)};
}

// ---------------------------------------------------------------------------
// Supplementary controllers acting on the PLL-measured grid frequency and
// added to the VSM power reference.
// ---------------------------------------------------------------------------

struct VsmPdParams {
  double kp = 100.0;
  double kd = 500.0;
  double t_filter = 1.0;  // derivative filter time constant, s
};

struct VsmPdState {
  double x_df = 0.0;
};

struct SupplementOut {
  double p_sup = 0.0;
  double dx_df = 0.0;
};

// domega = omega_ref - omega_g.
SupplementOut vsm_pd_supplement(const VsmPdParams& p, const VsmPdState& s, double domega);

struct VsmPidParams {
  double kp = 3000.0;
  double ki = 476.0;
  double kd = 12600.0;
  double t_filter = 1.0;
  double droop = 0.01;
  double t_pf = 0.1;
};

struct VsmPidState {
  double x_df = 0.0;
  double x_int = 0.0;
  double p_f = 0.0;
};

struct VsmPidSupplementOut {
  double p_sup = 0.0;
  double eps = 0.0;
  double dx_df = 0.0;
  double dx_int = 0.0;
  double dp_f = 0.0;
};

VsmPidSupplementOut vsm_pid_supplement(const VsmPidParams& p, const VsmPidState& s,
                                       double omega_g, double omega_ref, double p_dev);

}  // namespace vshp
