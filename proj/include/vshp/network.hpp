#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vshp/phasor.hpp"

namespace vshp {

// Series branch (line or transformer) between two buses. b_charging is the
// total line-charging susceptance, split half to each terminal shunt.
struct Branch {
  std::string id;
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double b_charging = 0.0;
};

struct LoadEvent {
  int bus = 0;                     // dense 0-based bus index
  double time_s = 0.0;
  double retained_fraction = 1.0;  // 1.0 keeps the load, 0.5 halves it, 0 trips it
};

// Passive network: buses are identified by dense indices 0..n_bus-1; loads
// are constant admittances folded into the bus matrix.
struct NetworkModel {
  int n_bus = 0;
  std::vector<Branch> branches;
  std::vector<Phasor> load_admittance;  // one entry per bus (possibly zero)
};

Eigen::MatrixXcd build_admittance(const NetworkModel& net);

// Direct dense solve of Y v = i. Throws SingularNetwork.
std::vector<Phasor> solve_network(const Eigen::MatrixXcd& y,
                                  const std::vector<Phasor>& injections);

NetworkModel apply_load_event(const NetworkModel& net, const LoadEvent& ev);

// ---------------------------------------------------------------------------
// Two-axis synchronous generator with first-order exciter and droop governor.
// All parameters expressed on the system MVA base.
// ---------------------------------------------------------------------------

struct SyncMachineParams {
  double xd = 0.2;
  double xq = 0.19;
  double xdp = 0.033;
  double xqp = 0.061;
  double rs = 0.0;
  double td0p = 8.0;
  double tq0p = 0.4;
  double h = 58.5;        // inertia constant, s (energy on system base)
  double d = 0.0;         // damping, pu power per pu speed deviation
  double avr_gain = 200;  // first-order exciter gain
  double avr_t = 0.05;    // exciter time constant, s
  double gov_droop = 0.0056;  // pu speed per pu power, system base
  double gov_t = 0.5;         // governor time constant, s
  double omega_b = 2.0 * 3.14159265358979323846 * 50.0;  // rad/s
};

// Nameplate data on the machine's own MVA base.
struct SyncMachineNameplate {
  double s_mva = 900.0;
  double xd = 1.8;
  double xq = 1.7;
  double xdp = 0.3;
  double xqp = 0.55;
  double rs = 0.0025;
  double td0p = 8.0;
  double tq0p = 0.4;
  double h_s = 6.5;
  double d_pu = 1.0;
  double avr_gain = 200.0;
  double avr_t = 0.05;
  double gov_droop = 0.05;
  double gov_t = 3.0;
};

SyncMachineParams to_system_base(const SyncMachineNameplate& np, double s_base_mva,
                                 double omega_b);

struct SyncMachineState {
  double delta = 0.0;   // rotor angle, rad (network frame)
  double domega = 0.0;  // speed deviation, pu
  double eqp = 1.0;     // q-axis transient EMF, pu
  double edp = 0.0;     // d-axis transient EMF, pu
  double efd = 1.0;     // exciter output, pu
  double pm = 0.0;      // governor mechanical power, pu
};

struct SyncMachineRefs {
  double vref = 1.0;
  double pref = 0.0;
};

struct SgDerivatives {
  SyncMachineState d;  // time derivative of each state
  Phasor i_inj;        // network-frame stator current injection, pu
  double pe = 0.0;     // air-gap electrical power, pu
  double id = 0.0;
  double iq = 0.0;
};

// Evaluates the machine equations at one terminal voltage. Throws
// LowVoltageRegion when |v_term| <= 0.2 pu, where the phasor model loses
// validity.
SgDerivatives sg_derivatives(const SyncMachineParams& p, const SyncMachineState& s,
                             const SyncMachineRefs& refs, Phasor v_term);

// Admittance folded into the bus matrix so the remaining source current is a
// weak function of voltage (saliency correction only).
Phasor sg_norton_admittance(const SyncMachineParams& p);

// Exact stator current for given internal EMFs and terminal voltage, plus the
// Norton source current i_inj + y_norton * v.
Phasor sg_source_current(const SyncMachineParams& p, const SyncMachineState& s,
                         Phasor v_term);

// Steady-state machine initialization from a power-flow operating point.
// s_inj is the complex power injected into the network at the terminal.
void sg_init_from_powerflow(const SyncMachineParams& p, Phasor v_term, Phasor s_inj,
                            SyncMachineState& state, SyncMachineRefs& refs);

// ---------------------------------------------------------------------------
// Newton power flow with loads folded into the admittance matrix.
// ---------------------------------------------------------------------------

struct PvBusSpec {
  int bus = 0;
  double p_pu = 0.0;  // net injection on system base
  double v_pu = 1.0;
};

struct PqInjectionSpec {
  int bus = 0;
  double p_pu = 0.0;
  double q_pu = 0.0;
};

struct PowerFlowSpec {
  int slack_bus = 0;
  double slack_v = 1.0;
  std::vector<PvBusSpec> pv;
  std::vector<PqInjectionSpec> pq_injections;
};

struct PowerFlowResult {
  std::vector<Phasor> v;
  std::vector<Phasor> s_inj;  // net complex power injection per bus
  int iterations = 0;
  double residual = 0.0;
};

PowerFlowResult initialize_power_flow(const NetworkModel& net, const PowerFlowSpec& spec);

// Complex power balance residual: sum of injections minus loads minus branch
// absorption, each term computed from the branch list rather than from the
// assembled matrix. Near zero whenever v solves the network for the given
// injections and the admittance assembly is consistent.
Phasor power_balance_residual(const NetworkModel& net, const std::vector<Phasor>& v,
                              const std::vector<Phasor>& injections);

}  // namespace vshp
