#include "vshp/hydraulic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vshp/errors.hpp"

namespace vshp {

namespace {
constexpr double kGateFloor = 1e-6;
// Division guard for the orifice law. Below this opening the turbine passes a
// ~5e-4 pu leakage flow, keeping the flow equation solvable at dt = 1 ms while
// staying under the closed-vane flow guard threshold.
constexpr double kHeadFloor = 5e-4;
constexpr double kHeadCap = 25.0;
}

double turbine_head(double q_p, double g) {
  const double ge = std::max(g, kHeadFloor);
  const double r = q_p / ge;
  return std::min(r * r, kHeadCap);
}

double turbine_power(double q_p, double g) {
  if (q_p == 0.0) return 0.0;
  return q_p * turbine_head(q_p, g);
}

WaterwayDerivs waterway_derivatives(const HydraulicParams& p, const HydraulicState& s) {
  if (s.g < kGateFloor && std::abs(s.q_p) > 1e-3)
    throw GuideVaneClosedWithFlow("guide vane closed (g=" + std::to_string(s.g) +
                                  ") while penstock flow is " + std::to_string(s.q_p));
  WaterwayDerivs d;
  d.dq_t = (p.h_0 - s.h_st - p.f_t * s.q_t * std::abs(s.q_t)) / p.t_wt;
  d.dh_st = (s.q_t - s.q_p) / p.c_s;
  d.dq_p = (s.h_st - turbine_head(s.q_p, s.g) - p.f_p * s.q_p * std::abs(s.q_p)) / p.t_wp;
  return d;
}

double governor_gate_ref(const HydraulicParams& p, const HydraulicState& s) {
  return p.gov_kp * (p.omega_ref - s.omega_t) + s.gov_x;
}

double governor_integrator_deriv(const HydraulicParams& p, const HydraulicState& s) {
  const double err = p.omega_ref - s.omega_t;
  // Back-calculation anti-windup: when the servo saturates (rate or range),
  // the difference between the applied and the demanded gate velocity pulls
  // the integrator until the reference rides just outside the achievable
  // band. The correction vanishes identically whenever the servo tracks, so
  // the linearization around any interior operating point is plain PI.
  const double g_ref = governor_gate_ref(p, s);
  const double v_raw = (g_ref - s.g) / p.t_g;
  const double v_app = gate_velocity(p, s, g_ref);
  return p.gov_ki * err + (v_app - v_raw);
}

double gate_velocity(const HydraulicParams& p, const HydraulicState& s, double g_ref) {
  const double v = (g_ref - s.g) / p.t_g;
  double limited = std::clamp(v, -p.g_rate, p.g_rate);
  // Soft landing over the last 1e-3 of travel keeps the velocity continuous
  // in the state where the hard range limit takes over.
  constexpr double kEdge = 1e-3;
  if (limited < 0.0)
    limited *= std::clamp(s.g / kEdge, 0.0, 1.0);
  else
    limited *= std::clamp((1.0 - s.g) / kEdge, 0.0, 1.0);
  return limited;
}

double shaft_derivative(const HydraulicParams& p, double p_m, double p_g, double omega_t) {
  if (omega_t < 0.1)
    throw SimError("turbine speed " + std::to_string(omega_t) + " pu collapsed");
  return (p_m - p_g) / (2.0 * p.h_t * omega_t);
}

HydraulicDerivs hydraulic_derivatives(const HydraulicParams& p, const HydraulicState& s,
                                      double p_g) {
  HydraulicDerivs out;
  const WaterwayDerivs w = waterway_derivatives(p, s);
  out.h_turb = turbine_head(s.q_p, s.g);
  out.p_m = turbine_power(s.q_p, s.g);
  out.g_ref = governor_gate_ref(p, s);

  out.d.q_t = w.dq_t;
  out.d.q_p = w.dq_p;
  out.d.h_st = w.dh_st;
  out.d.g = gate_velocity(p, s, out.g_ref);
  out.d.omega_t = shaft_derivative(p, out.p_m, p_g, s.omega_t);
  out.d.gov_x = governor_integrator_deriv(p, s);
  return out;
}

HydraulicState governor_step(const HydraulicParams& p, const HydraulicState& s, double dt) {
  auto derivs = [&](const HydraulicState& st) {
    HydraulicState d{};
    d.gov_x = governor_integrator_deriv(p, st);
    d.g = gate_velocity(p, st, governor_gate_ref(p, st));
    return d;
  };
  const HydraulicState d0 = derivs(s);
  HydraulicState z = s;
  z.g += dt * d0.g;
  z.gov_x += dt * d0.gov_x;
  for (int i = 0; i < 50; ++i) {
    const HydraulicState dz = derivs(z);
    const double g_new = s.g + 0.5 * dt * (d0.g + dz.g);
    const double x_new = s.gov_x + 0.5 * dt * (d0.gov_x + dz.gov_x);
    const double change = std::max(std::abs(g_new - z.g), std::abs(x_new - z.gov_x));
    z.g = g_new;
    z.gov_x = x_new;
    if (change < 1e-14) break;
  }
  z.g = std::clamp(z.g, 0.0, 1.0);
  return z;
}

HydraulicState hydraulic_steady_state(const HydraulicParams& p, double p_target) {
  if (p_target < 0.0)
    throw ConfigInvalid("hydraulic steady state requires a non-negative power target");

  HydraulicState s;
  s.omega_t = p.omega_ref;

  if (p_target < 1e-9) {
    s.q_t = s.q_p = 0.0;
    s.h_st = p.h_0;
    s.g = 0.0;
    s.gov_x = 0.0;
    return s;
  }

  // Steady flow solves q (h0 - (f_t + f_p) q^2) = p_target.
  const double f = p.f_t + p.f_p;
  double q = p_target / p.h_0;
  for (int i = 0; i < 100; ++i) {
    const double fn = q * (p.h_0 - f * q * q) - p_target;
    const double dfn = p.h_0 - 3.0 * f * q * q;
    const double step = fn / dfn;
    q -= step;
    if (std::abs(step) < 1e-15) break;
  }
  const double h_turb = p.h_0 - f * q * q;
  if (h_turb <= 0.0 || q <= 0.0)
    throw ConfigInvalid("hydraulic steady state infeasible at power target " +
                        std::to_string(p_target));

  s.q_t = s.q_p = q;
  s.h_st = p.h_0 - p.f_t * q * q;
  s.g = q / std::sqrt(h_turb);
  if (s.g > 1.0)
    throw ConfigInvalid("hydraulic steady state needs gate opening above 1.0");
  s.gov_x = s.g;  // zero speed error, integrator carries the gate reference
  return s;
}

}  // namespace vshp
