#pragma once

namespace vshp {

// Rigid-column waterway (tunnel + surge tank + penstock), turbine law,
// PI governor with rate-limited gate servo, and lumped shaft. Everything in
// per-unit on the plant base.
struct HydraulicParams {
  double t_wt = 1.5;    // tunnel water time constant, s
  double t_wp = 0.3;    // penstock water time constant, s
  double c_s = 100.0;   // surge tank storage constant, s
  double f_t = 0.02;    // tunnel friction coefficient
  double f_p = 0.015;   // penstock friction coefficient
  double h_0 = 1.0;     // reservoir head, pu
  double h_t = 4.0;     // shaft inertia constant, s
  double t_g = 0.2;     // gate servo time constant, s
  double g_rate = 0.1;  // gate rate limit, pu/s
  double gov_kp = 2.5;
  double gov_ki = 0.8;
  double omega_ref = 1.0;
};

struct HydraulicState {
  double q_t = 1.0;      // tunnel flow, pu
  double q_p = 1.0;      // penstock flow, pu
  double h_st = 1.0;     // surge tank head, pu
  double g = 1.0;        // guide vane opening, [0, 1]
  double omega_t = 1.0;  // turbine speed, pu
  double gov_x = 1.0;    // governor integrator (gate reference units)
};

// Head across the turbine for a given flow and opening. The opening is
// floored at 1e-6 to keep the expression defined while the vane closes, and
// the head is capped at 25 pu: the physical trajectory never exceeds ~1.2 pu
// even during a rate-limited emergency closure, so the cap only bounds the
// derivative magnitude seen by the implicit solver near full closure.
double turbine_head(double q_p, double g);

// Mechanical power q_p * h_turb; exactly zero at zero flow.
double turbine_power(double q_p, double g);

struct WaterwayDerivs {
  double dq_t = 0.0;
  double dh_st = 0.0;
  double dq_p = 0.0;
};

// Rigid-column flow/head derivatives. Throws GuideVaneClosedWithFlow when the
// vane is shut (g < 1e-6) while |q_p| > 1e-3 still flows.
WaterwayDerivs waterway_derivatives(const HydraulicParams& p, const HydraulicState& s);

// PI governor output (gate reference) for the current integrator value.
double governor_gate_ref(const HydraulicParams& p, const HydraulicState& s);

// Integrator derivative with back-calculation anti-windup: the applied-minus-
// demanded gate velocity pulls the integrator whenever the servo saturates;
// the correction is exactly zero while the servo tracks.
double governor_integrator_deriv(const HydraulicParams& p, const HydraulicState& s);

// Rate- and range-aware gate velocity toward the governor reference. The
// range limit fades the velocity in over the last 1e-3 of travel so the
// expression stays continuous.
double gate_velocity(const HydraulicParams& p, const HydraulicState& s, double g_ref);

// Lumped shaft: acceleration from turbine/generator power imbalance.
double shaft_derivative(const HydraulicParams& p, double p_m, double p_g, double omega_t);

struct HydraulicDerivs {
  HydraulicState d;     // time derivative of each state
  double p_m = 0.0;     // turbine mechanical power
  double h_turb = 0.0;  // turbine head
  double g_ref = 0.0;   // governor gate reference
};

// Full plant derivative for a given electrical power draw p_g.
HydraulicDerivs hydraulic_derivatives(const HydraulicParams& p, const HydraulicState& s,
                                      double p_g);

// Convenience for unit checks: one trapezoidal governor+servo update with the
// measured speed held over the step.
HydraulicState governor_step(const HydraulicParams& p, const HydraulicState& s, double dt);

// Steady state at a target mechanical power (governor at speed reference,
// waterway settled). Solves the head/flow balance with Newton iteration.
HydraulicState hydraulic_steady_state(const HydraulicParams& p, double p_target);

}  // namespace vshp
