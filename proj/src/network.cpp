#include "vshp/network.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>
#include <sstream>

#include "vshp/errors.hpp"

namespace vshp {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::complex<double> cx(Phasor p) { return p.c(); }

}  // namespace

Eigen::MatrixXcd build_admittance(const NetworkModel& net) {
  if (net.n_bus <= 0) throw ConfigInvalid("network has no buses");
  if (static_cast<int>(net.load_admittance.size()) != net.n_bus)
    throw ConfigInvalid("load admittance vector does not match bus count");

  std::set<std::string> seen;
  for (const auto& br : net.branches) {
    if (!br.id.empty() && !seen.insert(br.id).second)
      throw DuplicateBranchIds("duplicate branch id '" + br.id + "'");
    if (br.from < 0 || br.from >= net.n_bus || br.to < 0 || br.to >= net.n_bus)
      throw ConfigInvalid("branch '" + br.id + "' references a bus out of range");
    if (br.from == br.to)
      throw ConfigInvalid("branch '" + br.id + "' connects a bus to itself");
    if (br.r == 0.0 && br.x == 0.0)
      throw ZeroImpedanceBranch("branch '" + br.id + "' has zero impedance");
  }

  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(net.n_bus, net.n_bus);
  for (const auto& br : net.branches) {
    const std::complex<double> ys = 1.0 / std::complex<double>(br.r, br.x);
    const std::complex<double> ysh(0.0, br.b_charging / 2.0);
    y(br.from, br.from) += ys + ysh;
    y(br.to, br.to) += ys + ysh;
    y(br.from, br.to) -= ys;
    y(br.to, br.from) -= ys;
  }
  for (int i = 0; i < net.n_bus; ++i) y(i, i) += cx(net.load_admittance[i]);
  return y;
}

std::vector<Phasor> solve_network(const Eigen::MatrixXcd& y,
                                  const std::vector<Phasor>& injections) {
  const int n = static_cast<int>(y.rows());
  if (y.cols() != n) throw ConfigInvalid("admittance matrix is not square");
  if (static_cast<int>(injections.size()) != n)
    throw ConfigInvalid("injection vector does not match admittance dimension");

  Eigen::VectorXcd b(n);
  for (int i = 0; i < n; ++i) b(i) = cx(injections[i]);

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(y);
  if (!lu.isInvertible()) throw SingularNetwork("admittance matrix is singular");
  const Eigen::VectorXcd x = lu.solve(b);

  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  const double residual = (y * x - b).cwiseAbs().maxCoeff();
  if (!(residual < 1e-10 * scale))
    throw SingularNetwork("network solve residual " + std::to_string(residual) +
                          " exceeds tolerance");

  std::vector<Phasor> v(n);
  for (int i = 0; i < n; ++i) v[i] = Phasor::from(x(i));
  return v;
}

NetworkModel apply_load_event(const NetworkModel& net, const LoadEvent& ev) {
  if (ev.bus < 0 || ev.bus >= net.n_bus)
    throw ConfigInvalid("load event references bus out of range");
  if (ev.retained_fraction < 0.0 || ev.retained_fraction > 1.0)
    throw ConfigInvalid("load event retained fraction must lie in [0, 1]");
  const Phasor y = net.load_admittance[ev.bus];
  if (y.mag2() == 0.0)
    throw NoLoadAtBus("no load connected at bus " + std::to_string(ev.bus));
  NetworkModel out = net;
  out.load_admittance[ev.bus] = ev.retained_fraction * y;
  return out;
}

Phasor power_balance_residual(const NetworkModel& net, const std::vector<Phasor>& v,
                              const std::vector<Phasor>& injections) {
  Phasor total{0.0, 0.0};
  for (int i = 0; i < net.n_bus; ++i) total += apparent_power(v[i], injections[i]);
  for (int i = 0; i < net.n_bus; ++i) {
    // Load absorbs |V|^2 conj(y).
    total -= v[i].mag2() * net.load_admittance[i].conj();
  }
  for (const auto& br : net.branches) {
    const Phasor y_series = Phasor{1.0, 0.0} / Phasor{br.r, br.x};
    const Phasor i_s = (v[br.from] - v[br.to]) * y_series;
    total -= i_s.mag2() * Phasor{br.r, br.x};
    const Phasor y_sh{0.0, br.b_charging / 2.0};
    total -= v[br.from].mag2() * y_sh.conj();
    total -= v[br.to].mag2() * y_sh.conj();
  }
  return total;
}

// ---------------------------------------------------------------------------
// Synchronous machine.
// ---------------------------------------------------------------------------

SyncMachineParams to_system_base(const SyncMachineNameplate& np, double s_base_mva,
                                 double omega_b) {
  if (np.s_mva <= 0.0 || s_base_mva <= 0.0)
    throw ConfigInvalid("machine and system MVA bases must be positive");
  const double zr = s_base_mva / np.s_mva;  // impedance rebase factor
  SyncMachineParams p;
  p.xd = np.xd * zr;
  p.xq = np.xq * zr;
  p.xdp = np.xdp * zr;
  p.xqp = np.xqp * zr;
  p.rs = np.rs * zr;
  p.td0p = np.td0p;
  p.tq0p = np.tq0p;
  p.h = np.h_s / zr;       // stored energy scales with the machine base
  p.d = np.d_pu / zr;      // pu power per pu speed
  p.avr_gain = np.avr_gain;
  p.avr_t = np.avr_t;
  p.gov_droop = np.gov_droop * zr;  // pu speed per system-base pu power
  p.gov_t = np.gov_t;
  p.omega_b = omega_b;
  return p;
}

namespace {

struct MachineFrame {
  double vd, vq;
};

// Network phasor components seen from the rotor frame at angle delta:
// f_d + j f_q = j F e^{-j delta}.
MachineFrame to_machine_frame(Phasor f, double delta) {
  const Phasor r = f.rotated(kPi / 2.0 - delta);
  return {r.re, r.im};
}

Phasor to_network_frame(double fd, double fq, double delta) {
  return Phasor{fd, fq}.rotated(delta - kPi / 2.0);
}

struct StatorSolution {
  double id, iq;
};

StatorSolution solve_stator(const SyncMachineParams& p, const SyncMachineState& s,
                            double vd, double vq) {
  const double det = p.rs * p.rs + p.xdp * p.xqp;
  const double dd = s.edp - vd;
  const double dq = s.eqp - vq;
  return {(p.rs * dd + p.xqp * dq) / det, (-p.xdp * dd + p.rs * dq) / det};
}

}  // namespace

SgDerivatives sg_derivatives(const SyncMachineParams& p, const SyncMachineState& s,
                             const SyncMachineRefs& refs, Phasor v_term) {
  const double vmag = v_term.mag();
  if (vmag <= 0.2)
    throw LowVoltageRegion("terminal voltage " + std::to_string(vmag) +
                           " pu is below the phasor model validity region");

  const auto [vd, vq] = to_machine_frame(v_term, s.delta);
  const auto [id, iq] = solve_stator(p, s, vd, vq);
  const double pe = s.edp * id + s.eqp * iq + (p.xqp - p.xdp) * id * iq;

  SgDerivatives out;
  out.d.delta = p.omega_b * s.domega;
  out.d.domega = (s.pm - pe - p.d * s.domega) / (2.0 * p.h);
  out.d.eqp = (-s.eqp - (p.xd - p.xdp) * id + s.efd) / p.td0p;
  out.d.edp = (-s.edp + (p.xq - p.xqp) * iq) / p.tq0p;
  out.d.efd = (p.avr_gain * (refs.vref - vmag) - s.efd) / p.avr_t;
  out.d.pm = (refs.pref - s.domega / p.gov_droop - s.pm) / p.gov_t;
  out.i_inj = to_network_frame(id, iq, s.delta);
  out.pe = pe;
  out.id = id;
  out.iq = iq;
  return out;
}

Phasor sg_norton_admittance(const SyncMachineParams& p) {
  const double det = p.rs * p.rs + p.xdp * p.xqp;
  return {p.rs / det, -(p.xdp + p.xqp) / (2.0 * det)};
}

Phasor sg_source_current(const SyncMachineParams& p, const SyncMachineState& s,
                         Phasor v_term) {
  const auto [vd, vq] = to_machine_frame(v_term, s.delta);
  const auto [id, iq] = solve_stator(p, s, vd, vq);
  return to_network_frame(id, iq, s.delta) + sg_norton_admittance(p) * v_term;
}

void sg_init_from_powerflow(const SyncMachineParams& p, Phasor v_term, Phasor s_inj,
                            SyncMachineState& state, SyncMachineRefs& refs) {
  const Phasor i = (s_inj / v_term).conj();
  const Phasor e_loc = v_term + Phasor{p.rs, p.xq} * i;
  state.delta = e_loc.angle();
  state.domega = 0.0;

  const auto [vd, vq] = to_machine_frame(v_term, state.delta);
  const auto [id, iq] = to_machine_frame(i, state.delta);
  state.eqp = vq + p.rs * iq + p.xdp * id;
  state.edp = vd + p.rs * id - p.xqp * iq;
  state.efd = state.eqp + (p.xd - p.xdp) * id;
  state.pm = state.edp * id + state.eqp * iq + (p.xqp - p.xdp) * id * iq;

  refs.vref = v_term.mag() + state.efd / p.avr_gain;
  refs.pref = state.pm;
}

// ---------------------------------------------------------------------------
// Power flow.
// ---------------------------------------------------------------------------

namespace {

struct PfLayout {
  std::vector<int> theta_bus;  // unknown angle per entry
  std::vector<int> vmag_bus;   // unknown magnitude per entry
  std::vector<double> p_spec;  // per bus
  std::vector<double> q_spec;  // per bus
  std::vector<bool> is_pv;
  std::vector<bool> has_q_eq;  // Q mismatch rows
};

}  // namespace

PowerFlowResult initialize_power_flow(const NetworkModel& net, const PowerFlowSpec& spec) {
  const int n = net.n_bus;
  const Eigen::MatrixXcd y = build_admittance(net);

  if (spec.slack_bus < 0 || spec.slack_bus >= n)
    throw ConfigInvalid("slack bus out of range");

  PfLayout lay;
  lay.p_spec.assign(n, 0.0);
  lay.q_spec.assign(n, 0.0);
  lay.is_pv.assign(n, false);
  lay.has_q_eq.assign(n, true);

  std::vector<double> v_sched(n, 1.0);
  lay.is_pv[spec.slack_bus] = true;  // magnitude fixed
  lay.has_q_eq[spec.slack_bus] = false;
  v_sched[spec.slack_bus] = spec.slack_v;

  for (const auto& pv : spec.pv) {
    if (pv.bus < 0 || pv.bus >= n) throw ConfigInvalid("PV bus out of range");
    if (pv.bus == spec.slack_bus)
      throw ConfigInvalid("slack bus cannot also be listed as a PV bus");
    if (pv.v_pu <= 0.0) throw ConfigInvalid("PV setpoint voltage must be positive");
    lay.is_pv[pv.bus] = true;
    lay.has_q_eq[pv.bus] = false;
    lay.p_spec[pv.bus] += pv.p_pu;
    v_sched[pv.bus] = pv.v_pu;
  }
  for (const auto& pq : spec.pq_injections) {
    if (pq.bus < 0 || pq.bus >= n) throw ConfigInvalid("PQ injection bus out of range");
    if (lay.is_pv[pq.bus])
      throw ConfigInvalid("PQ injection collides with a PV/slack bus");
    lay.p_spec[pq.bus] += pq.p_pu;
    lay.q_spec[pq.bus] += pq.q_pu;
  }

  for (int i = 0; i < n; ++i) {
    if (i != spec.slack_bus) lay.theta_bus.push_back(i);
    if (!lay.is_pv[i]) lay.vmag_bus.push_back(i);
  }
  const int n_th = static_cast<int>(lay.theta_bus.size());
  const int n_vm = static_cast<int>(lay.vmag_bus.size());
  const int m = n_th + n_vm;

  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < n_vm; ++k) u(n_th + k) = 1.0;

  auto voltages = [&](const Eigen::VectorXd& uu) {
    Eigen::VectorXcd v(n);
    std::vector<double> th(n, 0.0), vm = v_sched;
    for (int k = 0; k < n_th; ++k) th[lay.theta_bus[k]] = uu(k);
    for (int k = 0; k < n_vm; ++k) vm[lay.vmag_bus[k]] = uu(n_th + k);
    for (int i = 0; i < n; ++i) v(i) = std::polar(vm[i], th[i]);
    return v;
  };

  auto mismatch = [&](const Eigen::VectorXd& uu) {
    const Eigen::VectorXcd v = voltages(uu);
    const Eigen::VectorXcd s = v.array() * (y * v).array().conjugate();
    Eigen::VectorXd f(m);
    for (int k = 0; k < n_th; ++k) {
      const int i = lay.theta_bus[k];
      f(k) = s(i).real() - lay.p_spec[i];
    }
    for (int k = 0; k < n_vm; ++k) {
      const int i = lay.vmag_bus[k];
      f(n_th + k) = s(i).imag() - lay.q_spec[i];
    }
    return f;
  };

  const int max_iter = 50;
  double residual = 0.0;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const Eigen::VectorXd f = mismatch(u);
    residual = f.cwiseAbs().maxCoeff();
    if (residual < 1e-11) break;
    if (!std::isfinite(residual))
      throw PowerFlowDiverged("power flow mismatch became non-finite");

    Eigen::MatrixXd jac(m, m);
    const double h = 1e-7;
    for (int c = 0; c < m; ++c) {
      Eigen::VectorXd up = u;
      up(c) += h;
      jac.col(c) = (mismatch(up) - f) / h;
    }
    const Eigen::VectorXd du = jac.partialPivLu().solve(f);
    if (!du.allFinite()) throw PowerFlowDiverged("power flow Newton step is non-finite");
    u -= du;
    if (n_vm > 0 && u.tail(n_vm).minCoeff() < 0.1)
      throw PowerFlowDiverged("power flow voltage magnitude collapsed below 0.1 pu");
  }
  if (residual >= 1e-8)
    throw PowerFlowDiverged("power flow failed to converge: residual " +
                            std::to_string(residual));

  const Eigen::VectorXcd v = voltages(u);
  const Eigen::VectorXcd s = v.array() * (y * v).array().conjugate();
  PowerFlowResult out;
  out.v.resize(n);
  out.s_inj.resize(n);
  for (int i = 0; i < n; ++i) {
    out.v[i] = Phasor::from(v(i));
    out.s_inj[i] = Phasor::from(s(i));
  }
  out.iterations = iter;
  out.residual = residual;
  return out;
}

}  // namespace vshp
