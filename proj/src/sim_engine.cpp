#include "vshp/sim_engine.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "vshp/errors.hpp"
#include "vshp/hydraulic.hpp"
#include "vshp/vi_vsg.hpp"
#include "vshp/vi_vsm.hpp"

namespace vshp {

namespace {

std::span<const double> cspan(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<size_t>(v.size())};
}

std::span<double> mspan(Eigen::VectorXd& v) {
  return {v.data(), static_cast<size_t>(v.size())};
}

std::string num_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::string> DynamicModel::state_names() const {
  std::vector<std::string> out;
  out.reserve(size());
  for (int i = 0; i < size(); ++i) out.push_back("x" + std::to_string(i));
  return out;
}

// ---------------------------------------------------------------------------
// StateRegistry
// ---------------------------------------------------------------------------

int StateRegistry::add(const std::string& module, const std::string& state) {
  names_.push_back(module + "." + state);
  return static_cast<int>(names_.size()) - 1;
}

int StateRegistry::index_of(const std::string& qualified) const {
  for (size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == qualified) return static_cast<int>(i);
  return -1;
}

std::vector<int> StateRegistry::module_indices(const std::string& module_prefix) const {
  std::vector<int> out;
  const std::string prefix = module_prefix + ".";
  for (size_t i = 0; i < names_.size(); ++i)
    if (names_[i].rfind(prefix, 0) == 0) out.push_back(static_cast<int>(i));
  return out;
}

// ---------------------------------------------------------------------------
// Equilibrium search
// ---------------------------------------------------------------------------

Eigen::VectorXd find_equilibrium(DynamicModel& model, const Eigen::VectorXd& x0,
                                 const EquilibriumOptions& opts) {
  const int n = model.size();
  if (x0.size() != n) throw EquilibriumDiverged("initial guess has the wrong size");

  Eigen::VectorXd x = x0, f(n), fp(n), xp(n), xt(n);
  auto try_eval = [&](Eigen::VectorXd& z, Eigen::VectorXd& out) -> bool {
    try {
      model.derivatives(cspan(z), mspan(out));
      return true;
    } catch (const SimError&) {
      return false;
    }
  };
  if (!try_eval(x, f)) throw EquilibriumDiverged("initial guess is not evaluable");
  double best = f.lpNorm<Eigen::Infinity>();

  Eigen::MatrixXd jac(n, n);
  for (int iter = 0; iter < opts.max_iter && best > opts.target; ++iter) {
    xp = x;
    for (int i = 0; i < n; ++i) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[i]));
      xp[i] = x[i] + h;
      model.derivatives(cspan(xp), mspan(fp));
      jac.col(i) = (fp - f) / h;
      xp[i] = x[i];
    }
    // Least-squares step: rotation-neutral null directions get zero component
    // instead of blocking the solve.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
    const Eigen::VectorXd dx = cod.solve(-f);

    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      xt = x + alpha * dx;
      model.project(mspan(xt));
      if (!try_eval(xt, fp)) continue;
      const double cand = fp.lpNorm<Eigen::Infinity>();
      if (cand < best || cand <= opts.target) {
        x = xt;
        f = fp;
        best = cand;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  if (best > opts.tol) {
    int worst = 0;
    f.cwiseAbs().maxCoeff(&worst);
    const auto names = model.state_names();
    throw EquilibriumDiverged("equilibrium residual " + num_text(best) +
                              " exceeds tolerance at state " + names[worst]);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Trapezoidal integrator
// ---------------------------------------------------------------------------

TrapezoidalIntegrator::TrapezoidalIntegrator(DynamicModel& model, double dt,
                                             TrapezoidalOptions opts)
    : model_(model), dt_(dt), opts_(opts) {
  const int n = model_.size();
  work_f_.resize(n);
  work_g_.resize(n);
}

void TrapezoidalIntegrator::invalidate() { have_chord_ = false; }

void TrapezoidalIntegrator::rebuild_chord(const Eigen::VectorXd& x) {
  const int n = model_.size();
  Eigen::VectorXd f0(n), fp(n), xp = x;
  model_.derivatives(cspan(x), mspan(f0));
  Eigen::MatrixXd jac(n, n);
  for (int i = 0; i < n; ++i) {
    const double h = 1e-7 * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    model_.derivatives(cspan(xp), mspan(fp));
    jac.col(i) = (fp - f0) / h;
    xp[i] = x[i];
  }
  chord_.compute(Eigen::MatrixXd::Identity(n, n) - 0.5 * dt_ * jac);
  have_chord_ = true;
  ++jacobian_rebuilds_;
}

bool TrapezoidalIntegrator::solve_stage(const Eigen::VectorXd& xn, const Eigen::VectorXd& fn,
                                        Eigen::VectorXd& z) {
  last_residual_norm_ = std::numeric_limits<double>::quiet_NaN();
  last_residual_index_ = -1;
  for (int it = 1; it <= opts_.max_iter; ++it) {
    // An iterate that trips a model guard (not the accepted state) counts as
    // non-convergence so the caller can rebuild the chord matrix and retry.
    try {
      model_.derivatives(cspan(z), mspan(work_g_));
    } catch (const SimError&) {
      return false;
    }
    const Eigen::VectorXd r = z - xn - 0.5 * dt_ * (fn + work_g_);
    Eigen::Index worst = 0;
    const double rn = r.cwiseAbs().maxCoeff(&worst);
    last_residual_norm_ = rn;
    last_residual_index_ = static_cast<int>(worst);
    if (rn <= opts_.tol) {
      last_iterations_ = it;
      return true;
    }
    z -= chord_.solve(r);
  }
  return false;
}

void TrapezoidalIntegrator::step(Eigen::VectorXd& x) {
  model_.derivatives(cspan(x), mspan(work_f_));
  if (!have_chord_) rebuild_chord(x);
  Eigen::VectorXd z = x + dt_ * work_f_;
  if (!solve_stage(x, work_f_, z)) {
    rebuild_chord(x);
    z = x + dt_ * work_f_;
    if (!solve_stage(x, work_f_, z)) {
      std::string what = "implicit step inner solve failed to converge";
      if (last_residual_index_ >= 0)
        what += " (residual " + num_text(last_residual_norm_) + " on state " +
                std::to_string(last_residual_index_) + ")";
      throw StepDiverged(what);
    }
  }
  if (last_iterations_ > 8) have_chord_ = false;
  x = z;
  model_.project(mspan(x));
}

Eigen::VectorXd integrate_step(DynamicModel& model, const Eigen::VectorXd& x, double dt,
                               const TrapezoidalOptions& opts) {
  TrapezoidalIntegrator integ(model, dt, opts);
  Eigen::VectorXd z = x;
  integ.step(z);
  return z;
}

// ---------------------------------------------------------------------------
// TimeSeries and file output
// ---------------------------------------------------------------------------

int TimeSeries::column_index(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> TimeSeries::column(const std::string& name) const {
  const int idx = column_index(name);
  if (idx < 0) throw SimError("unknown column: " + name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[idx]);
  return out;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw SimError("cannot open for writing: " + tmp.string());
    out << text;
    if (!out) throw SimError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_csv(const TimeSeries& ts, const std::filesystem::path& path) {
  std::string text;
  for (const auto& [k, v] : ts.metadata) text += "# " + k + "=" + v + "\n";
  text += "t";
  for (const auto& c : ts.columns) text += "," + c;
  text += "\n";
  for (size_t i = 0; i < ts.rows.size(); ++i) {
    text += num_text(ts.t[i]);
    for (double v : ts.rows[i]) {
      text += ",";
      text += num_text(v);
    }
    text += "\n";
  }
  write_text_atomic(path, text);
}

TimeSeries read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SimError("cannot open: " + path.string());
  TimeSeries ts;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq != std::string::npos)
        ts.metadata[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!have_header) {
      bool first = true;
      while (std::getline(ss, cell, ',')) {
        if (!first) ts.columns.push_back(cell);
        first = false;
      }
      have_header = true;
      continue;
    }
    std::vector<double> row;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      const double v = std::stod(cell);
      if (first)
        ts.t.push_back(v);
      else
        row.push_back(v);
      first = false;
    }
    ts.rows.push_back(std::move(row));
  }
  return ts;
}

// ---------------------------------------------------------------------------
// SystemModel
// ---------------------------------------------------------------------------

namespace {

bool uses_vsm(Scheme s) {
  return s == Scheme::Vsm || s == Scheme::VsmPd || s == Scheme::VsmPid;
}

}  // namespace

struct SystemModel::Impl {
  RunConfig cfg;

  NetworkModel net;
  Eigen::MatrixXcd y_aug;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
  std::vector<Phasor> v_bus;  // warm-started algebraic solution
  bool initialized = false;

  double omega_b = 0.0;
  std::array<SyncMachineParams, 4> sgp;
  std::array<SyncMachineRefs, 4> sg_refs;
  std::array<int, 4> sg_bus{0, 1, 2, 3};
  int conv_bus = 4;
  double ratio = 3.0;  // plant MVA / system MVA

  HydraulicParams hyd;
  PLLParams pll;
  CpcParams cpcp;
  VsgParams vsgp;
  VsgPidParams pidp;
  VsmParams vsmp;
  VsmPdParams pdp;
  VsmPidParams spidp;
  ReactiveCtrlParams qctl;
  CurrentLagParams lag;

  double p_ref = 0.0;      // plant base dispatch
  double q_ref = 0.0;      // plant base reactive setpoint
  double vsm_v_ref = 1.0;  // voltage reference, set from the power flow

  StateRegistry reg;
  std::array<int, 4> sg0{};
  int hyd0 = -1;
  int pll0 = -1;
  int lag0 = -1;
  int qint = -1;
  int cpc_int = -1;
  int vsg_df = -1;
  int pid0 = -1;
  int vsm0 = -1;
  int sup_df = -1;
  int sup0 = -1;

  std::vector<std::string> signals;

  // Diagnostics from the last evaluation.
  double last_residual = 0.0;
  bool last_sat = false;
  bool last_pll_low = false;
  bool last_gate_clamped = false;

  Eigen::VectorXcd rhs_work;

  explicit Impl(const RunConfig& c) : cfg(c) { build(); }

  void build() {
    const auto& n = cfg.network;
    omega_b = 2.0 * M_PI * n.f_nom_hz;

    net.n_bus = 11;
    const double zr_trafo = n.s_base_mva / n.sg.s_mva;
    auto trafo = [&](const char* id, int from, int to) {
      net.branches.push_back({id, from, to, 0.0, n.trafo_x * zr_trafo, 0.0});
    };
    auto line = [&](const char* id, int from, int to, double km) {
      net.branches.push_back({id, from, to, km * n.line_r_per_km, km * n.line_x_per_km,
                              km * n.line_b_per_km});
    };
    trafo("t1", 0, 4);
    trafo("t2", 1, 5);
    trafo("t3", 2, 10);
    trafo("t4", 3, 9);
    line("l5-6", 4, 5, 25.0);
    line("l6-7", 5, 6, 10.0);
    line("l7-8a", 6, 7, 110.0);
    line("l7-8b", 6, 7, 110.0);
    line("l8-9a", 7, 8, 110.0);
    line("l8-9b", 7, 8, 110.0);
    line("l9-10", 8, 9, 10.0);
    line("l10-11", 9, 10, 25.0);

    net.load_admittance.assign(11, Phasor{});
    for (const auto& l : n.loads) {
      const double g = l.p_mw / n.s_base_mva;
      const double b = -(l.q_mvar - l.q_cap_mvar) / n.s_base_mva;
      net.load_admittance[l.bus - 1] += Phasor{g, b};
    }

    for (int m = 0; m < 4; ++m) {
      SyncMachineNameplate np = n.sg;
      np.h_s = n.sg_h_s[m];
      sgp[m] = to_system_base(np, n.s_base_mva, omega_b);
    }

    conv_bus = n.vshp_bus - 1;
    ratio = n.vshp_s_mva / n.s_base_mva;
    p_ref = n.vshp_p_pu;
    q_ref = n.vshp_q_pu;

    hyd = cfg.hydraulic;
    const auto& k = cfg.controller;
    pll = k.resolve_pll_params(omega_b);
    cpcp = k.cpc;
    vsgp = k.vsg;
    pidp = k.vsg_pid;
    pidp.droop = k.r_d;
    pidp.t_pf = k.p_f_filter_t;
    vsmp = k.resolve_vsm_params();
    vsmp.omega_b = omega_b;
    pdp = k.vsm_pd;
    spidp = k.vsm_pid;
    spidp.droop = k.r_d;
    spidp.t_pf = k.p_f_filter_t;
    qctl = {k.q_kp, k.q_ki};
    lag = {k.i_lag_t, k.i_limit};

    static const char* sg_states[] = {"delta", "domega", "eqp", "edp", "efd", "pm"};
    for (int m = 0; m < 4; ++m) {
      const std::string mod = "sg" + std::to_string(m + 1);
      sg0[m] = reg.add(mod, sg_states[0]);
      for (int i = 1; i < 6; ++i) reg.add(mod, sg_states[i]);
    }
    hyd0 = reg.add("hyd", "q_t");
    reg.add("hyd", "q_p");
    reg.add("hyd", "h_st");
    reg.add("hyd", "g");
    reg.add("hyd", "omega_t");
    reg.add("hyd", "gov_x");
    pll0 = reg.add("conv", "pll_theta");
    reg.add("conv", "pll_x_int");
    reg.add("conv", "pll_omega_f");

    const Scheme sch = k.scheme;
    if (uses_vsm(sch)) {
      vsm0 = reg.add("conv", "omega");
      reg.add("conv", "theta");
      reg.add("conv", "x_v");
      reg.add("conv", "q_f");
      reg.add("conv", "v_f_re");
      reg.add("conv", "v_f_im");
      reg.add("conv", "x_d");
      if (sch == Scheme::VsmPd) sup_df = reg.add("conv", "sup_x_df");
      if (sch == Scheme::VsmPid) {
        sup0 = reg.add("conv", "sup_x_df");
        reg.add("conv", "sup_x_int");
        reg.add("conv", "sup_p_f");
      }
    } else {
      lag0 = reg.add("conv", "id");
      reg.add("conv", "iq");
      qint = reg.add("conv", "q_x_int");
      if (sch == Scheme::Cpc) cpc_int = reg.add("conv", "p_x_int");
      if (sch == Scheme::Vsg) vsg_df = reg.add("conv", "x_df");
      if (sch == Scheme::VsgPid) {
        pid0 = reg.add("conv", "x_df");
        reg.add("conv", "x_int");
        reg.add("conv", "p_f");
      }
    }

    signals = {"f_hz",  "p_g_pu",  "q_g_pu",  "v_bus_pu", "omega_t_pu",
               "p_m_pu", "g_pu",    "g_ref_pu", "gov_x_pu", "q_t_pu",  "q_p_pu",
               "h_st_pu",
               "sg1_speed_pu", "sg2_speed_pu", "sg3_speed_pu", "sg4_speed_pu"};
    if (uses_vsm(sch)) {
      signals.push_back("omega_vsm_pu");
      signals.push_back("v_e_hat_pu");
      signals.push_back("p_r_star_pu");
    } else {
      signals.push_back("p_cmd_pu");
      signals.push_back("id_pu");
      signals.push_back("iq_pu");
    }

    rebuild_matrix();
    rhs_work.resize(net.n_bus);
  }

  void rebuild_matrix() {
    y_aug = build_admittance(net);
    for (int m = 0; m < 4; ++m)
      y_aug(sg_bus[m], sg_bus[m]) += sg_norton_admittance(sgp[m]).c();
    lu.compute(y_aug);
  }

  SyncMachineState unpack_sg(const double* x, int m) const {
    const int b = sg0[m];
    return {x[b], x[b + 1], x[b + 2], x[b + 3], x[b + 4], x[b + 5]};
  }

  HydraulicState unpack_hyd(const double* x) const {
    return {x[hyd0], x[hyd0 + 1], x[hyd0 + 2], x[hyd0 + 3], x[hyd0 + 4], x[hyd0 + 5]};
  }

  VsmState unpack_vsm(const double* x) const {
    return {x[vsm0], x[vsm0 + 1], x[vsm0 + 2], x[vsm0 + 3],
            x[vsm0 + 4], x[vsm0 + 5], x[vsm0 + 6]};
  }

  struct ConvInjection {
    Phasor i_plant;  // network frame, plant base
    bool saturated = false;
  };

  ConvInjection conv_injection(const double* x, Phasor v_conv) const {
    if (uses_vsm(cfg.controller.scheme)) {
      const VsmState vs = unpack_vsm(x);
      const VsmVoltageOut vo =
          vsm_voltage_control(vsmp, vs, v_conv.mag(), vs.q_f, vsm_v_ref, q_ref);
      const Phasor v_filt{vs.v_f_re, vs.v_f_im};
      Phasor i_s = vsm_electrical_model(vsmp, vo.v_e_hat, vs.theta, v_filt, vs.omega);
      const double m = i_s.mag();
      if (m > lag.i_limit) return {i_s * (lag.i_limit / m), true};
      return {i_s, false};
    }
    const auto inj = saturate_injection(lag, x[lag0], x[lag0 + 1]);
    return {injection_to_network({inj.id, inj.iq}, x[pll0]), inj.saturated};
  }

  void solve_algebraic(const double* x) {
    if (!initialized)
      throw SimError("initial_guess() must run before derivative evaluations");
    const int n = net.n_bus;
    std::array<SyncMachineState, 4> ms;
    for (int m = 0; m < 4; ++m) ms[m] = unpack_sg(x, m);
    bool converged = false;
    for (int iter = 0; iter < 60; ++iter) {
      rhs_work.setZero();
      for (int m = 0; m < 4; ++m)
        rhs_work[sg_bus[m]] += sg_source_current(sgp[m], ms[m], v_bus[sg_bus[m]]).c();
      rhs_work[conv_bus] += (conv_injection(x, v_bus[conv_bus]).i_plant * ratio).c();
      const Eigen::VectorXcd vn = lu.solve(rhs_work);
      double delta = 0.0;
      for (int b = 0; b < n; ++b) {
        delta = std::max(delta, std::abs(vn[b] - v_bus[b].c()));
        v_bus[b] = Phasor::from(vn[b]);
      }
      if (delta < 1e-13) {
        converged = true;
        break;
      }
    }
    if (!converged) throw StepDiverged("bus voltage fixed point stalled");
  }

  // Full evaluation: algebraic solve, then optional state derivatives and
  // optional measured signals.
  void eval(const double* x, double* dxdt, double* sig) {
    solve_algebraic(x);
    const Phasor v_conv = v_bus[conv_bus];
    const ConvInjection ci = conv_injection(x, v_conv);
    last_sat = ci.saturated;

    const Phasor s_plant = apparent_power(v_conv, ci.i_plant);
    const double p_g = s_plant.re;  // plant base
    const double q_g = s_plant.im;

    std::array<SgDerivatives, 4> sgd;
    std::array<SyncMachineState, 4> ms;
    for (int m = 0; m < 4; ++m) {
      ms[m] = unpack_sg(x, m);
      sgd[m] = sg_derivatives(sgp[m], ms[m], sg_refs[m], v_bus[sg_bus[m]]);
    }

    {
      std::vector<Phasor> inj(net.n_bus, Phasor{});
      for (int m = 0; m < 4; ++m) inj[sg_bus[m]] += sgd[m].i_inj;
      inj[conv_bus] += ci.i_plant * ratio;
      last_residual = power_balance_residual(net, v_bus, inj).mag();
    }

    const HydraulicState hs = unpack_hyd(x);
    const HydraulicDerivs hd = hydraulic_derivatives(hyd, hs, p_g);
    const double raw_gate_v = (hd.g_ref - hs.g) / hyd.t_g;
    last_gate_clamped = std::abs(hd.d.g - raw_gate_v) > 1e-14;

    const PLLState ps{x[pll0], x[pll0 + 1], x[pll0 + 2]};
    const PLLDerivs plld = pll_derivatives(pll, ps, v_conv);
    last_pll_low = plld.low_voltage;
    const double omega_g = ps.omega_f;

    if (dxdt) {
      for (int m = 0; m < 4; ++m) {
        const int b = sg0[m];
        dxdt[b] = sgd[m].d.delta;
        dxdt[b + 1] = sgd[m].d.domega;
        dxdt[b + 2] = sgd[m].d.eqp;
        dxdt[b + 3] = sgd[m].d.edp;
        dxdt[b + 4] = sgd[m].d.efd;
        dxdt[b + 5] = sgd[m].d.pm;
      }
      dxdt[hyd0] = hd.d.q_t;
      dxdt[hyd0 + 1] = hd.d.q_p;
      dxdt[hyd0 + 2] = hd.d.h_st;
      dxdt[hyd0 + 3] = hd.d.g;
      dxdt[hyd0 + 4] = hd.d.omega_t;
      dxdt[hyd0 + 5] = hd.d.gov_x;
      dxdt[pll0] = plld.d.theta;
      dxdt[pll0 + 1] = plld.d.x_int;
      dxdt[pll0 + 2] = plld.d.omega_f;
    }

    double p_cmd = p_ref;
    double omega_vsm = 1.0;
    double v_e_hat = 0.0;
    double p_r_star = p_ref;

    const Scheme sch = cfg.controller.scheme;
    if (uses_vsm(sch)) {
      const VsmState vs = unpack_vsm(x);
      const VsmVoltageOut vo =
          vsm_voltage_control(vsmp, vs, v_conv.mag(), q_g, vsm_v_ref, q_ref);
      double p_sup = 0.0;
      if (sch == Scheme::VsmPd) {
        const SupplementOut so = vsm_pd_supplement(pdp, {x[sup_df]}, 1.0 - omega_g);
        p_sup = so.p_sup;
        if (dxdt) dxdt[sup_df] = so.dx_df;
      } else if (sch == Scheme::VsmPid) {
        const VsmPidSupplementOut so = vsm_pid_supplement(
            spidp, {x[sup0], x[sup0 + 1], x[sup0 + 2]}, omega_g, 1.0, p_g - p_ref);
        p_sup = so.p_sup;
        if (dxdt) {
          dxdt[sup0] = so.dx_df;
          dxdt[sup0 + 1] = so.dx_int;
          dxdt[sup0 + 2] = so.dp_f;
        }
      }
      const VsmSwingOut sw = vsm_swing_step(vsmp, vs, p_ref, p_sup, 1.0, p_g);
      const Phasor vfd = vsm_voltage_filter_deriv(vsmp, vs, v_conv);
      if (dxdt) {
        dxdt[vsm0] = sw.domega;
        dxdt[vsm0 + 1] = sw.dtheta;
        dxdt[vsm0 + 2] = vo.dx_v;
        dxdt[vsm0 + 3] = vo.dq_f;
        dxdt[vsm0 + 4] = vfd.re;
        dxdt[vsm0 + 5] = vfd.im;
        dxdt[vsm0 + 6] = sw.dx_d;
      }
      omega_vsm = vs.omega;
      v_e_hat = vo.v_e_hat;
      p_r_star = sw.p_r_star;
    } else {
      const DqPair v_dq = to_dq(v_conv, ps.theta);
      const double id_s = x[lag0];
      const double iq_s = x[lag0 + 1];

      const double q_err = q_ref - q_g;
      ReactiveCtrlOut qo = reactive_current_reference(qctl, {x[qint]}, q_err, false);
      if (ci.saturated && qo.dx_int * iq_s > 0.0) qo.dx_int = 0.0;
      const double iq_ref = qo.iq_ref;
      double id_ref = 0.0;

      if (sch == Scheme::Cpc) {
        const double p_err = p_ref - p_g;
        CpcOut co = cpc_reference(cpcp, {x[cpc_int]}, p_err, false);
        if (ci.saturated && co.dx_int * id_s > 0.0) co.dx_int = 0.0;
        id_ref = co.id_ref;
        if (dxdt) dxdt[cpc_int] = co.dx_int;
      } else if (sch == Scheme::Vsg) {
        const VsgOut vo = vsg_reference(vsgp, {x[vsg_df]}, 1.0 - omega_g, p_ref);
        p_cmd = vo.p_cmd;
        id_ref = current_refs_from_pq(v_dq, p_cmd, q_ref).d;
        if (dxdt) dxdt[vsg_df] = vo.dx_df;
      } else {
        VsgPidOut po = vsg_pid_reference(pidp, {x[pid0], x[pid0 + 1], x[pid0 + 2]},
                                         omega_g, 1.0, p_g - p_ref, p_ref, false);
        if (ci.saturated && po.dx_int * id_s > 0.0) po.dx_int = 0.0;
        p_cmd = po.p_cmd;
        id_ref = current_refs_from_pq(v_dq, p_cmd, q_ref).d;
        if (dxdt) {
          dxdt[pid0] = po.dx_df;
          dxdt[pid0 + 1] = po.dx_int;
          dxdt[pid0 + 2] = po.dp_f;
        }
      }

      const CurrentLagState ld = current_lag_derivs(lag, {id_s, iq_s}, id_ref, iq_ref);
      if (dxdt) {
        dxdt[lag0] = ld.id;
        dxdt[lag0 + 1] = ld.iq;
        dxdt[qint] = qo.dx_int;
      }
    }

    if (sig) {
      int i = 0;
      sig[i++] = omega_g * cfg.network.f_nom_hz;
      sig[i++] = p_g;
      sig[i++] = q_g;
      sig[i++] = v_conv.mag();
      sig[i++] = hs.omega_t;
      sig[i++] = hd.p_m;
      sig[i++] = hs.g;
      sig[i++] = hd.g_ref;
      sig[i++] = hs.gov_x;
      sig[i++] = hs.q_t;
      sig[i++] = hs.q_p;
      sig[i++] = hs.h_st;
      for (int m = 0; m < 4; ++m) sig[i++] = 1.0 + ms[m].domega;
      if (uses_vsm(sch)) {
        sig[i++] = omega_vsm;
        sig[i++] = v_e_hat;
        sig[i++] = p_r_star;
      } else {
        const DqPair i_dq = to_dq(ci.i_plant, ps.theta);
        sig[i++] = p_cmd;
        sig[i++] = i_dq.d;
        sig[i++] = i_dq.q;
      }
    }
  }

  Eigen::VectorXd make_initial_guess() {
    const auto& n = cfg.network;
    PowerFlowSpec spec;
    const int slack = n.slack_sg - 1;
    spec.slack_bus = sg_bus[slack];
    spec.slack_v = n.sg_v_pu[slack];
    for (int m = 0; m < 4; ++m) {
      if (m == slack) continue;
      spec.pv.push_back({sg_bus[m], n.sg_p_mw[m] / n.s_base_mva, n.sg_v_pu[m]});
    }
    spec.pq_injections.push_back({conv_bus, p_ref * ratio, q_ref * ratio});

    const PowerFlowResult pf = initialize_power_flow(net, spec);
    v_bus = pf.v;
    initialized = true;

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(reg.size());
    for (int m = 0; m < 4; ++m) {
      SyncMachineState st;
      sg_init_from_powerflow(sgp[m], v_bus[sg_bus[m]], pf.s_inj[sg_bus[m]], st,
                             sg_refs[m]);
      const int b = sg0[m];
      x0[b] = st.delta;
      x0[b + 1] = st.domega;
      x0[b + 2] = st.eqp;
      x0[b + 3] = st.edp;
      x0[b + 4] = st.efd;
      x0[b + 5] = st.pm;
    }

    const HydraulicState hs = hydraulic_steady_state(hyd, p_ref);
    x0[hyd0] = hs.q_t;
    x0[hyd0 + 1] = hs.q_p;
    x0[hyd0 + 2] = hs.h_st;
    x0[hyd0 + 3] = hs.g;
    x0[hyd0 + 4] = hs.omega_t;
    x0[hyd0 + 5] = hs.gov_x;

    const Phasor v_conv = v_bus[conv_bus];
    const PLLState ps = pll_locked_init(v_conv);
    x0[pll0] = ps.theta;
    x0[pll0 + 1] = ps.x_int;
    x0[pll0 + 2] = ps.omega_f;

    if (uses_vsm(cfg.controller.scheme)) {
      const Phasor i0 = Phasor{p_ref, -q_ref} / v_conv.conj();
      const Phasor z{vsmp.r_s, vsmp.l_s};
      const Phasor e0 = v_conv + z * i0;
      vsm_v_ref = v_conv.mag();
      x0[vsm0] = 1.0;
      x0[vsm0 + 1] = e0.angle();
      x0[vsm0 + 2] = e0.mag();
      x0[vsm0 + 3] = q_ref;
      x0[vsm0 + 4] = v_conv.re;
      x0[vsm0 + 5] = v_conv.im;
      x0[vsm0 + 6] = 1.0;
      // Supplement states start at zero.
    } else {
      const DqPair v_dq = to_dq(v_conv, ps.theta);
      const DqPair i0 = current_refs_from_pq(v_dq, p_ref, q_ref);
      x0[lag0] = i0.d;
      x0[lag0 + 1] = i0.q;
      x0[qint] = i0.q;
      if (cpc_int >= 0) x0[cpc_int] = i0.d;
      // VSG / VSG-PID controller states start at zero.
    }
    return x0;
  }
};

SystemModel::SystemModel(const RunConfig& cfg) : impl_(std::make_unique<Impl>(cfg)) {}
SystemModel::~SystemModel() = default;

std::unique_ptr<SystemModel> SystemModel::assemble(const RunConfig& cfg) {
  return std::unique_ptr<SystemModel>(new SystemModel(cfg));
}

int SystemModel::size() const { return impl_->reg.size(); }

void SystemModel::derivatives(std::span<const double> x, std::span<double> dxdt) {
  impl_->eval(x.data(), dxdt.data(), nullptr);
}

void SystemModel::project(std::span<double> x) {
  double& g = x[impl_->hyd0 + 3];
  g = std::clamp(g, 0.0, 1.0);
}

std::vector<std::string> SystemModel::state_names() const { return impl_->reg.names(); }

const StateRegistry& SystemModel::registry() const { return impl_->reg; }

Eigen::VectorXd SystemModel::initial_guess() { return impl_->make_initial_guess(); }

const std::vector<std::string>& SystemModel::signal_names() const {
  return impl_->signals;
}

void SystemModel::measure(std::span<const double> x, std::span<double> out) {
  if (out.size() != impl_->signals.size())
    throw SimError("signal buffer size mismatch");
  impl_->eval(x.data(), nullptr, out.data());
}

void SystemModel::apply_event(const LoadEvent& ev) {
  impl_->net = apply_load_event(impl_->net, ev);
  impl_->rebuild_matrix();
}

bool SystemModel::clamps_active(std::span<const double> x) {
  impl_->eval(x.data(), nullptr, nullptr);
  return impl_->last_sat || impl_->last_pll_low || impl_->last_gate_clamped;
}

double SystemModel::last_power_residual() const { return impl_->last_residual; }

std::vector<int> SystemModel::sg_speed_states() const {
  std::vector<int> out;
  for (int m = 0; m < 4; ++m)
    out.push_back(impl_->reg.index_of("sg" + std::to_string(m + 1) + ".domega"));
  return out;
}

std::vector<int> SystemModel::sg_rotor_states() const {
  std::vector<int> out;
  for (int m = 0; m < 4; ++m) {
    out.push_back(impl_->reg.index_of("sg" + std::to_string(m + 1) + ".delta"));
    out.push_back(impl_->reg.index_of("sg" + std::to_string(m + 1) + ".domega"));
  }
  return out;
}

std::vector<int> SystemModel::converter_states() const {
  std::vector<int> out = impl_->reg.module_indices("hyd");
  const std::vector<int> conv = impl_->reg.module_indices("conv");
  out.insert(out.end(), conv.begin(), conv.end());
  return out;
}

double SystemModel::converter_base_ratio() const { return impl_->ratio; }

Scheme SystemModel::scheme() const { return impl_->cfg.controller.scheme; }

const RunConfig& SystemModel::config() const { return impl_->cfg; }

// ---------------------------------------------------------------------------
// Scenario driver
// ---------------------------------------------------------------------------

ScenarioResult run_scenario(SystemModel& model, const RunConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();

  Eigen::VectorXd x0 = model.initial_guess();
  Eigen::VectorXd x = find_equilibrium(model, x0);

  ScenarioResult res;
  res.x_equilibrium = x;

  const double dt = cfg.scenario.dt_s;
  const long n_steps = std::lround(cfg.scenario.duration_s / dt);
  const long sample_every = std::max(1L, std::lround(cfg.scenario.sample_dt_s / dt));

  struct PendingEvent {
    long step;
    LoadEvent ev;
  };
  std::vector<PendingEvent> events;
  for (const auto& e : cfg.scenario.events)
    events.push_back({std::lround(e.time_s / dt),
                      LoadEvent{e.bus - 1, e.time_s, e.retained_fraction}});
  std::stable_sort(events.begin(), events.end(),
                   [](const PendingEvent& a, const PendingEvent& b) { return a.step < b.step; });

  TimeSeries ts;
  ts.columns = model.signal_names();
  ts.metadata["controller"] = scheme_tag(model.scheme());
  ts.metadata["config_hash"] = config_hash(cfg);
  ts.metadata["dt_s"] = num_text(dt);
  ts.metadata["sample_dt_s"] = num_text(cfg.scenario.sample_dt_s);
  ts.metadata["duration_s"] = num_text(cfg.scenario.duration_s);

  TrapezoidalIntegrator integ(model, dt, {cfg.scenario.inner_tol, 40});
  std::vector<double> sig(ts.columns.size());
  auto sample = [&](double t) {
    model.measure(cspan(x), {sig.data(), sig.size()});
    ts.t.push_back(t);
    ts.rows.push_back(sig);
  };

  size_t next_ev = 0;
  sample(0.0);
  for (long k = 0; k < n_steps; ++k) {
    while (next_ev < events.size() && events[next_ev].step == k) {
      model.apply_event(events[next_ev].ev);
      integ.invalidate();
      ++next_ev;
    }
    integ.step(x);
    if (cfg.scenario.validate && model.last_power_residual() > 1e-8)
      throw SimError("power balance residual " + num_text(model.last_power_residual()) +
                     " at t=" + num_text((k + 1) * dt));
    if ((k + 1) % sample_every == 0) sample(static_cast<double>(k + 1) * dt);
  }

  if (!cfg.output.signals.empty()) {
    TimeSeries sel;
    sel.metadata = ts.metadata;
    sel.t = ts.t;
    std::vector<int> idx;
    for (const auto& name : cfg.output.signals) {
      const int c = ts.column_index(name);
      if (c < 0) throw ConfigInvalid("output.signals: unknown signal '" + name + "'");
      idx.push_back(c);
      sel.columns.push_back(name);
    }
    sel.rows.reserve(ts.rows.size());
    for (const auto& r : ts.rows) {
      std::vector<double> row;
      row.reserve(idx.size());
      for (int c : idx) row.push_back(r[c]);
      sel.rows.push_back(std::move(row));
    }
    ts = std::move(sel);
  }

  res.series = std::move(ts);
  res.x_final = x;
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

ScenarioResult run_scenario(const RunConfig& cfg) {
  auto model = SystemModel::assemble(cfg);
  return run_scenario(*model, cfg);
}

}  // namespace vshp
