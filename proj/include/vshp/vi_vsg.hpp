#pragma once

#include "vshp/phasor.hpp"

namespace vshp {

// ---------------------------------------------------------------------------
// dq frame conventions. A frame at angle theta maps a network phasor F to
// components (f_d, f_q) via F = (f_d - j f_q) e^{j theta}. Under this map
//   p = v_d i_d + v_q i_q   and   q = v_d i_q - v_q i_d
// equal Re(V conj(I)) and Im(V conj(I)): active power and generator-convention
// reactive power, independent of the frame angle.
// ---------------------------------------------------------------------------

struct DqPair {
  double d = 0.0;
  double q = 0.0;
};

inline DqPair to_dq(Phasor f, double theta) {
  const Phasor r = f.rotated(-theta);
  return {r.re, -r.im};
}

inline Phasor from_dq(DqPair f, double theta) {
  return Phasor{f.d, -f.q}.rotated(theta);
}

struct PqPair {
  double p = 0.0;
  double q = 0.0;
};

inline PqPair dq_power(DqPair v, DqPair i) {
  return {v.d * i.d + v.q * i.q, v.d * i.q - v.q * i.d};
}

// Exact inversion of the dq power expressions: the current pair that delivers
// (p, q) at voltage v. Throws LowVoltageDivision when |v| <= 0.1 pu.
DqPair current_refs_from_pq(DqPair v, double p, double q);

// ---------------------------------------------------------------------------
// Synchronous-reference-frame PLL with PI tracking and first-order output
// filter on the frequency estimate.
// ---------------------------------------------------------------------------

struct PLLParams {
  double kp = 0.8;
  double ki = 80.0;
  double t_filter = 0.001;  // frequency output filter, s
  double v_min = 0.1;       // freeze threshold, pu
  double omega_b = 2.0 * 3.14159265358979323846 * 50.0;
};

struct PLLState {
  double theta = 0.0;    // tracked angle, rad (network frame)
  double x_int = 0.0;    // loop integrator, pu frequency
  double omega_f = 1.0;  // filtered frequency estimate, pu
};

struct PLLDerivs {
  PLLState d;
  double omega_raw = 1.0;    // unfiltered frequency estimate, pu
  bool low_voltage = false;  // true when the input collapsed and states froze
};

PLLDerivs pll_derivatives(const PLLParams& p, const PLLState& s, Phasor v_g);

// One trapezoidal update with the input phasor held over the step. Returns
// the updated state; omega_g_out receives the filtered frequency after the
// step.
PLLState pll_step(const PLLParams& p, const PLLState& s, Phasor v_g, double dt,
                  double* omega_g_out = nullptr);

PLLState pll_locked_init(Phasor v_g);

// ---------------------------------------------------------------------------
// Filtered derivative block y = k (u - x), x' = (u - x)/T. DC gain is zero;
// the high-frequency gain tends to k; for a slow ramp of slope a the output
// settles at k T a.
// ---------------------------------------------------------------------------

struct FilteredDerivative {
  double gain = 0.0;
  double t_filter = 1.0;

  double output(double u, double x) const { return gain * (u - x); }
  double state_deriv(double u, double x) const { return (u - x) / t_filter; }
};

// ---------------------------------------------------------------------------
// Constant power control: PI on the active power error producing the d-axis
// current reference.
// ---------------------------------------------------------------------------

struct CpcParams {
  double k_pp = 0.045;
  double k_pi = 0.023;
};

struct CpcState {
  double x_int = 0.0;
};

struct CpcOut {
  double id_ref = 0.0;
  double dx_int = 0.0;
};

// freeze_int suppresses integration (anti-windup) when the downstream current
// injection is saturated in the direction the integrator pushes.
CpcOut cpc_reference(const CpcParams& p, const CpcState& s, double p_err, bool freeze_int);

CpcState cpc_step(const CpcParams& p, const CpcState& s, double p_err, double dt);

// ---------------------------------------------------------------------------
// Virtual synchronous generator: proportional + filtered-derivative action on
// the grid frequency deviation shifts the power command around its reference.
// ---------------------------------------------------------------------------

struct VsgParams {
  double kp = 100.0;
  double kd = 33.6;
  double t_filter = 0.01;  // derivative filter time constant, s
};

struct VsgState {
  double x_df = 0.0;  // derivative filter state on the frequency deviation
};

struct VsgOut {
  double p_cmd = 0.0;
  double deriv_term = 0.0;
  double dx_df = 0.0;
};

// domega = omega_ref - omega_g (pu).
VsgOut vsg_reference(const VsgParams& p, const VsgState& s, double domega, double p_ref);

// ---------------------------------------------------------------------------
// VSG-PID: full PID on the droop-compensated frequency error
//   eps = omega_ref - omega_g - R p_f
// where p_f low-pass filters the power deviation from the dispatch reference.
// The integral term forces eps -> 0 in steady state, which reproduces the
// permanent droop characteristic omega_ref - omega_g = R p_f.
// ---------------------------------------------------------------------------

struct VsgPidParams {
  double kp = 100.0;
  double ki = 286.0;
  double kd = 33.6;
  double t_filter = 0.01;  // derivative filter time constant, s
  double droop = 0.01;     // permanent droop R
  double t_pf = 0.1;       // power feedback filter, s
};

struct VsgPidState {
  double x_df = 0.0;   // derivative filter state on eps
  double x_int = 0.0;  // integral term
  double p_f = 0.0;    // filtered power deviation
};

struct VsgPidOut {
  double p_cmd = 0.0;
  double eps = 0.0;
  double dx_df = 0.0;
  double dx_int = 0.0;
  double dp_f = 0.0;
};

// p_dev is the instantaneous power deviation p_g - p_ref feeding the droop
// filter.
VsgPidOut vsg_pid_reference(const VsgPidParams& p, const VsgPidState& s, double omega_g,
                            double omega_ref, double p_dev, double p_ref,
                            bool freeze_int);

// ---------------------------------------------------------------------------
// Reactive branch: PI on the reactive power error producing the q-axis
// current reference.
// ---------------------------------------------------------------------------

struct ReactiveCtrlParams {
  double kp = 0.5;
  double ki = 20.0;
};

struct ReactiveCtrlState {
  double x_int = 0.0;
};

struct ReactiveCtrlOut {
  double iq_ref = 0.0;
  double dx_int = 0.0;
};

ReactiveCtrlOut reactive_current_reference(const ReactiveCtrlParams& p,
                                           const ReactiveCtrlState& s, double q_err,
                                           bool freeze_int);

// ---------------------------------------------------------------------------
// Converter current injection: first-order lag from the references with a
// magnitude saturation (angle preserved) on the injected pair.
// ---------------------------------------------------------------------------

struct CurrentLagParams {
  double t_lag = 0.005;   // injection lag, s
  double i_limit = 1.2;   // magnitude limit, pu
};

struct CurrentLagState {
  double id = 0.0;
  double iq = 0.0;
};

struct InjectionOut {
  double id = 0.0;
  double iq = 0.0;
  bool saturated = false;
};

InjectionOut saturate_injection(const CurrentLagParams& p, double id, double iq);

inline CurrentLagState current_lag_derivs(const CurrentLagParams& p,
                                          const CurrentLagState& s, double id_ref,
                                          double iq_ref) {
  return {(id_ref - s.id) / p.t_lag, (iq_ref - s.iq) / p.t_lag};
}

CurrentLagState current_injection_step(const CurrentLagParams& p, const CurrentLagState& s,
                                       double id_ref, double iq_ref, double dt);

// Injected current rotated from the dq frame at theta into the network frame.
inline Phasor injection_to_network(DqPair i, double theta) { return from_dq(i, theta); }

}  // namespace vshp
