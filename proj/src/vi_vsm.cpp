#include "vshp/vi_vsm.hpp"

#include <cmath>
#include <string>

#include "vshp/errors.hpp"

namespace vshp {

VsmVoltageOut vsm_voltage_control(const VsmParams& p, const VsmState& s, double v_mag,
                                  double q_g, double v_ref, double q_ref) {
  VsmVoltageOut out;
  out.error = (v_ref - v_mag) + p.k_q * (q_ref - s.q_f);
  out.dx_v = p.ki_v * out.error;
  out.dq_f = p.w_qf * (q_g - s.q_f);
  out.v_e_hat = p.kp_v * out.error + s.x_v + p.k_ffe * out.error;
  return out;
}

Phasor vsm_electrical_model(const VsmParams& p, double v_e_hat, double theta,
                            Phasor v_filtered, double omega_vsm) {
  const Phasor z{p.r_s, omega_vsm * p.l_s};
  if (z.mag2() < 1e-12)
    throw DegenerateImpedance("virtual stator impedance magnitude " +
                              std::to_string(z.mag()) + " pu is degenerate");
  const Phasor e = Phasor::polar(v_e_hat, theta);
  return (e - v_filtered) / z;
}

VsmSwingOut vsm_swing_step(const VsmParams& p, const VsmState& s, double p_ref,
                           double p_sup, double omega_ref, double p_g) {
  VsmSwingOut out;
  out.p_r_star = p_ref + p.k_omega * (omega_ref - s.omega) + p_sup;
  out.domega = (out.p_r_star - p_g - p.k_d * (s.omega - s.x_d)) / p.t_a;
  out.dx_d = p.w_d * (s.omega - s.x_d);
  out.dtheta = p.omega_b * (s.omega - 1.0);
  return out;
}

SupplementOut vsm_pd_supplement(const VsmPdParams& p, const VsmPdState& s, double domega) {
  const FilteredDerivative fd{p.kd, p.t_filter};
  SupplementOut out;
  out.dx_df = fd.state_deriv(domega, s.x_df);
  out.p_sup = p.kp * domega + fd.output(domega, s.x_df);
  return out;
}

VsmPidSupplementOut vsm_pid_supplement(const VsmPidParams& p, const VsmPidState& s,
                                       double omega_g, double omega_ref, double p_dev) {
  const FilteredDerivative fd{p.kd, p.t_filter};
  VsmPidSupplementOut out;
  out.eps = omega_ref - omega_g - p.droop * s.p_f;
  out.dx_df = fd.state_deriv(out.eps, s.x_df);
  out.dx_int = p.ki * out.eps;
  out.dp_f = (p_dev - s.p_f) / p.t_pf;
  out.p_sup = p.kp * out.eps + fd.output(out.eps, s.x_df) + s.x_int;
  return out;
}

}  // namespace vshp
