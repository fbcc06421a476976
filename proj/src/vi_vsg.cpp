#include "vshp/vi_vsg.hpp"

#include <cmath>
#include <string>

#include "vshp/errors.hpp"

namespace vshp {

DqPair current_refs_from_pq(DqPair v, double p, double q) {
  const double m2 = v.d * v.d + v.q * v.q;
  if (m2 <= 0.01)
    throw LowVoltageDivision("voltage magnitude " + std::to_string(std::sqrt(m2)) +
                             " pu too low for the current reference inversion");
  return {(v.d * p - v.q * q) / m2, (v.q * p + v.d * q) / m2};
}

// ---------------------------------------------------------------------------
// PLL
// ---------------------------------------------------------------------------

PLLDerivs pll_derivatives(const PLLParams& p, const PLLState& s, Phasor v_g) {
  PLLDerivs out;
  const double vmag = v_g.mag();
  if (vmag <= p.v_min) {
    out.low_voltage = true;
    out.omega_raw = 1.0 + s.x_int;
    out.d = {0.0, 0.0, 0.0};  // freeze every state
    return out;
  }
  // Normalized q-axis projection; zero when locked to the phasor angle.
  const double e = v_g.rotated(-s.theta).im / vmag;
  const double domega = p.kp * e + s.x_int;
  out.omega_raw = 1.0 + domega;
  out.d.theta = p.omega_b * domega;
  out.d.x_int = p.ki * e;
  out.d.omega_f = (out.omega_raw - s.omega_f) / p.t_filter;
  return out;
}

PLLState pll_step(const PLLParams& p, const PLLState& s, Phasor v_g, double dt,
                  double* omega_g_out) {
  const PLLDerivs d0 = pll_derivatives(p, s, v_g);
  PLLState z = s;
  z.theta += dt * d0.d.theta;
  z.x_int += dt * d0.d.x_int;
  z.omega_f += dt * d0.d.omega_f;
  for (int i = 0; i < 60; ++i) {
    const PLLDerivs dz = pll_derivatives(p, z, v_g);
    const PLLState next{s.theta + 0.5 * dt * (d0.d.theta + dz.d.theta),
                        s.x_int + 0.5 * dt * (d0.d.x_int + dz.d.x_int),
                        s.omega_f + 0.5 * dt * (d0.d.omega_f + dz.d.omega_f)};
    const double change = std::max({std::abs(next.theta - z.theta),
                                    std::abs(next.x_int - z.x_int),
                                    std::abs(next.omega_f - z.omega_f)});
    z = next;
    if (change < 1e-15) break;
  }
  if (omega_g_out) *omega_g_out = z.omega_f;
  return z;
}

PLLState pll_locked_init(Phasor v_g) { return {v_g.angle(), 0.0, 1.0}; }

// ---------------------------------------------------------------------------
// CPC
// ---------------------------------------------------------------------------

CpcOut cpc_reference(const CpcParams& p, const CpcState& s, double p_err,
                     bool freeze_int) {
  CpcOut out;
  out.id_ref = p.k_pp * p_err + s.x_int;
  out.dx_int = freeze_int ? 0.0 : p.k_pi * p_err;
  return out;
}

CpcState cpc_step(const CpcParams& p, const CpcState& s, double p_err, double dt) {
  // Linear in the state, so the trapezoidal update is explicit.
  return {s.x_int + dt * p.k_pi * p_err};
}

// ---------------------------------------------------------------------------
// VSG
// ---------------------------------------------------------------------------

VsgOut vsg_reference(const VsgParams& p, const VsgState& s, double domega, double p_ref) {
  const FilteredDerivative fd{p.kd, p.t_filter};
  VsgOut out;
  out.deriv_term = fd.output(domega, s.x_df);
  out.dx_df = fd.state_deriv(domega, s.x_df);
  out.p_cmd = p.kp * domega + out.deriv_term + p_ref;
  return out;
}

// ---------------------------------------------------------------------------
// VSG-PID
// ---------------------------------------------------------------------------

VsgPidOut vsg_pid_reference(const VsgPidParams& p, const VsgPidState& s, double omega_g,
                            double omega_ref, double p_dev, double p_ref,
                            bool freeze_int) {
  const FilteredDerivative fd{p.kd, p.t_filter};
  VsgPidOut out;
  out.eps = omega_ref - omega_g - p.droop * s.p_f;
  out.dx_df = fd.state_deriv(out.eps, s.x_df);
  out.dx_int = freeze_int ? 0.0 : p.ki * out.eps;
  out.dp_f = (p_dev - s.p_f) / p.t_pf;
  out.p_cmd = p.kp * out.eps + fd.output(out.eps, s.x_df) + s.x_int + p_ref;
  return out;
}

// ---------------------------------------------------------------------------
// Reactive branch
// ---------------------------------------------------------------------------

ReactiveCtrlOut reactive_current_reference(const ReactiveCtrlParams& p,
                                           const ReactiveCtrlState& s, double q_err,
                                           bool freeze_int) {
  ReactiveCtrlOut out;
  out.iq_ref = p.kp * q_err + s.x_int;
  out.dx_int = freeze_int ? 0.0 : p.ki * q_err;
  return out;
}

// ---------------------------------------------------------------------------
// Current injection lag + saturation
// ---------------------------------------------------------------------------

InjectionOut saturate_injection(const CurrentLagParams& p, double id, double iq) {
  InjectionOut out{id, iq, false};
  const double mag = std::hypot(id, iq);
  if (mag > p.i_limit) {
    const double scale = p.i_limit / mag;
    out.id *= scale;
    out.iq *= scale;
    out.saturated = true;
  }
  return out;
}

CurrentLagState current_injection_step(const CurrentLagParams& p, const CurrentLagState& s,
                                       double id_ref, double iq_ref, double dt) {
  // Exact trapezoidal update of the linear lag.
  const double a = dt / (2.0 * p.t_lag);
  CurrentLagState z;
  z.id = ((1.0 - a) * s.id + 2.0 * a * id_ref) / (1.0 + a);
  z.iq = ((1.0 - a) * s.iq + 2.0 * a * iq_ref) / (1.0 + a);
  return z;
}

}  // namespace vshp
