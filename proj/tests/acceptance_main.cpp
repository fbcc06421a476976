// Acceptance suite: end-to-end property checks on the assembled plant/grid
// model. Prints one verdict line per criterion and exits with the number of
// failed criteria. Runs headless; writes no files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vshp/config.hpp"
#include "vshp/errors.hpp"
#include "vshp/hydraulic.hpp"
#include "vshp/phasor.hpp"
#include "vshp/sim_engine.hpp"
#include "vshp/smallsignal.hpp"
#include "vshp/vi_vsg.hpp"
#include "vshp/vi_vsm.hpp"

namespace {

using vshp::Scheme;

int g_failures = 0;

void info(const std::string& line) { std::printf("         %s\n", line.c_str()); }

void verdict(int id, bool pass, const std::string& line) {
  std::printf("[%s] %2d. %s\n", pass ? "PASS" : "FAIL", id, line.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

vshp::RunConfig base_config(Scheme s) {
  vshp::RunConfig cfg = vshp::parse_config_text("{}").config;
  cfg.controller.scheme = s;
  return cfg;
}

// Shared per-controller artifacts, produced once and reused across criteria.
struct HoldRun {
  double drift = 0.0;  // max |x_final - x_equilibrium|
  double wall = 0.0;
};

struct EventRun {
  std::unique_ptr<vshp::SystemModel> model;  // post-event network after the run
  vshp::TimeSeries ts;
  Eigen::VectorXd x_final;
  double p_g0 = 0.0;     // pre-event steady output, plant base
  double p_g_end = 0.0;  // final sample
  double domega_end = 0.0;   // final grid frequency deviation, pu
  double max_df_hz = 0.0;    // post-event peak |f - 50|
  double omega_t_settle = 0.0;  // last time |omega_t - 1| >= 0.01
};

struct EigenArt {
  vshp::ClassificationGroups groups;
  vshp::LinearModel lin;
  vshp::ModeSet set;
};

HoldRun run_hold(Scheme s) {
  vshp::RunConfig cfg = base_config(s);
  cfg.scenario.duration_s = 60.0;
  cfg.scenario.events.clear();
  const vshp::ScenarioResult r = vshp::run_scenario(cfg);
  return {(r.x_final - r.x_equilibrium).cwiseAbs().maxCoeff(), r.wall_seconds};
}

EventRun run_event(Scheme s) {
  vshp::RunConfig cfg = base_config(s);
  cfg.scenario.duration_s = 125.0;
  cfg.scenario.events = {{7, 1.0, 0.5}};

  EventRun out;
  out.model = vshp::SystemModel::assemble(cfg);
  vshp::ScenarioResult r = vshp::run_scenario(*out.model, cfg);
  out.x_final = r.x_final;

  const std::vector<double> f = r.series.column("f_hz");
  const std::vector<double> pg = r.series.column("p_g_pu");
  const std::vector<double> wt = r.series.column("omega_t_pu");
  const std::vector<double>& t = r.series.t;

  out.p_g0 = pg.front();
  out.p_g_end = pg.back();
  out.domega_end = f.back() / 50.0 - 1.0;
  for (size_t k = 0; k < t.size(); ++k) {
    if (t[k] < 1.0) continue;
    out.max_df_hz = std::max(out.max_df_hz, std::abs(f[k] - 50.0));
    if (std::abs(wt[k] - 1.0) >= 0.01) out.omega_t_settle = t[k];
  }
  out.ts = std::move(r.series);
  return out;
}

EigenArt run_eigen(Scheme s) {
  vshp::RunConfig cfg = base_config(s);
  auto model = vshp::SystemModel::assemble(cfg);
  const Eigen::VectorXd x0 = model->initial_guess();
  const Eigen::VectorXd xeq = vshp::find_equilibrium(*model, x0);

  EigenArt art;
  art.groups = {model->sg_speed_states(), model->sg_rotor_states(),
                model->converter_states(), model->state_names()};
  art.lin = vshp::numerical_jacobian(*model, xeq);
  art.set = vshp::analyze_modes(art.lin, art.groups, vshp::scheme_tag(s));
  return art;
}

const vshp::TrackedMode& cell(const vshp::ModeComparison& cmp, const std::string& label,
                              const std::string& tag) {
  size_t r = 0, c = 0;
  while (cmp.tracked_labels[r] != label) ++r;
  while (cmp.tags[c] != tag) ++c;
  return cmp.table[r][c];
}

// Integrates dx/dt = A (x - x_eq), the frozen first-order expansion.
class LinearizedModel : public vshp::DynamicModel {
 public:
  LinearizedModel(const Eigen::MatrixXd& a, Eigen::VectorXd x_eq)
      : a_(a), x_eq_(std::move(x_eq)) {}
  int size() const override { return static_cast<int>(x_eq_.size()); }
  void derivatives(std::span<const double> x, std::span<double> dxdt) override {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<long>(x.size()));
    Eigen::Map<Eigen::VectorXd> dv(dxdt.data(), static_cast<long>(dxdt.size()));
    dv = a_ * (xv - x_eq_);
  }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd x_eq_;
};

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

void criterion_1(const std::vector<HoldRun>& holds, const std::vector<Scheme>& schemes) {
  double worst_drift = 0.0, worst_wall = 0.0;
  for (size_t i = 0; i < holds.size(); ++i) {
    info(std::string(vshp::scheme_tag(schemes[i])) + ": drift " +
         fmt("%.3e", holds[i].drift) + " pu, wall " + fmt("%.1f", holds[i].wall) + " s");
    worst_drift = std::max(worst_drift, holds[i].drift);
    worst_wall = std::max(worst_wall, holds[i].wall);
  }
  verdict(1, worst_drift < 1e-7 && worst_wall < 30.0,
          "equilibrium hold, 60 s event-free per controller: max state drift " +
              fmt("%.3e", worst_drift) + " pu (< 1e-7), max wall " +
              fmt("%.1f", worst_wall) + " s (< 30)");
}

void criterion_2(const EventRun& vsm) {
  const double dpg = std::abs(vsm.p_g_end - vsm.p_g0);
  const double dw = std::abs(vsm.domega_end);
  const double k_omega = vshp::VsmParams{}.k_omega;
  info("vsm final |p_g - p_g*| = " + fmt("%.4f", dpg) + " pu at |domega| = " +
       fmt("%.5f", dw) + " pu");
  info("k_omega * |domega| = " + fmt("%.4f", k_omega * dw) +
       " pu; the power offset equals the frequency-controller term exactly");
  info("with the default gain k_omega = 20 the plain vsm keeps a proportional");
  info("frequency feedback in its power reference, so output power cannot return");
  info("to the dispatch value while the grid holds a frequency offset");
  verdict(2, dpg < 0.01 && dw >= 0.001,
          "vsm power return after the bus-7 event: |p_g(end) - p_g*| = " +
              fmt("%.4f", dpg) + " pu (< 0.01 required at |domega| >= 0.001)");
}

void criterion_3(const EventRun& vsg) {
  const double kp = vshp::VsgParams{}.kp;
  const double dpg = vsg.p_g_end - vsg.p_g0;
  const double pred = kp * (-vsg.domega_end);
  const double rel = std::abs(dpg - pred) / std::abs(pred);
  info("vsg: dp_g = " + fmt("%.5f", dpg) + " pu, k_p * (w_ref - w_g) = " +
       fmt("%.5f", pred) + " pu, rel err " + fmt("%.2e", rel));
  verdict(3, rel < 0.02,
          "vsg steady droop dp_g = k_p * dw within 2% (rel err " + fmt("%.2e", rel) + ")");
}

void criterion_4(const EventRun& vsg_pid, const EventRun& vsm_pid) {
  const double r_d = 0.01;
  const auto identity = [&](const EventRun& run, const char* pf_state) {
    const vshp::StateRegistry& reg = run.model->registry();
    const double p_f = run.x_final[reg.index_of(pf_state)];
    const double omega_g = run.x_final[reg.index_of("conv.pll_omega_f")];
    return std::abs(1.0 - omega_g - r_d * p_f);
  };
  const double a = identity(vsg_pid, "conv.p_f");
  const double b = identity(vsm_pid, "conv.sup_p_f");
  info("vsg-pid |w_ref - w_g - R p_f| = " + fmt("%.2e", a));
  info("vsm-pid |w_ref - w_g - R p_f| = " + fmt("%.2e", b));
  verdict(4, a < 1e-5 && b < 1e-5,
          "integral droop identity |w_ref - w_g - R p_f| < 1e-5 pu for vsg-pid (" +
              fmt("%.1e", a) + ") and vsm-pid (" + fmt("%.1e", b) + ")");
}

void criterion_5(const EventRun& cpc, const EventRun& vsg, const EventRun& vsm) {
  info("max |df| after the bus-7 event: cpc " + fmt("%.4f", cpc.max_df_hz) + " Hz, vsg " +
       fmt("%.4f", vsg.max_df_hz) + " Hz, vsm " + fmt("%.4f", vsm.max_df_hz) + " Hz");
  verdict(5, vsg.max_df_hz < cpc.max_df_hz && vsg.max_df_hz <= vsm.max_df_hz,
          "frequency containment ordering max|df|: vsg " + fmt("%.3f", vsg.max_df_hz) +
              " < cpc " + fmt("%.3f", cpc.max_df_hz) + " and vsg <= vsm " +
              fmt("%.3f", vsm.max_df_hz) + " Hz");
}

void criterion_6(const vshp::ModeComparison& cmp) {
  const vshp::TrackedMode& base = cell(cmp, "interarea", "cpc");
  const vshp::TrackedMode& vsg = cell(cmp, "interarea", "vsg");
  info("interarea: cpc f " + fmt("%.4f", base.f_hz) + " Hz zeta " +
       fmt("%.4f", base.zeta) + "; vsg f " + fmt("%.4f", vsg.f_hz) + " Hz zeta " +
       fmt("%.4f", vsg.zeta) + "; zeta ratio " + fmt("%.3f", cmp.interarea_zeta_ratio_vsg));
  verdict(6,
          cmp.interarea_zeta_ratio_vsg >= 1.5 && vsg.present && base.present &&
              vsg.f_hz < base.f_hz,
          "interarea damping ratio vsg/cpc = " + fmt("%.2f", cmp.interarea_zeta_ratio_vsg) +
              " (>= 1.5) and frequency " + fmt("%.3f", vsg.f_hz) + " < " +
              fmt("%.3f", base.f_hz) + " Hz");
}

void criterion_7(const vshp::ModeComparison& cmp) {
  bool pass = true;
  double worst = 0.0;
  std::string worst_at;
  for (const std::string label : {"local-area1", "local-area2"}) {
    const vshp::TrackedMode& base = cell(cmp, label, "cpc");
    for (const std::string& tag : cmp.tags) {
      if (tag == "cpc") continue;
      const vshp::TrackedMode& m = cell(cmp, label, tag);
      const double rel_f = std::abs(m.f_hz - base.f_hz) / base.f_hz;
      const double rel_z = std::abs(m.zeta - base.zeta) / base.zeta;
      info(label + " " + tag + ": f " + fmt("%.4f", m.f_hz) + " Hz (" +
           fmt("%+.2f", 100.0 * rel_f) + "%), zeta " + fmt("%.4f", m.zeta) + " (" +
           fmt("%+.2f", 100.0 * (m.zeta - base.zeta)) + " pts = " +
           fmt("%+.2f", 100.0 * rel_z) + "% relative)");
      const double shift = std::max(rel_f, rel_z);
      if (!m.present || shift >= 0.10) pass = false;
      if (shift > worst) {
        worst = shift;
        worst_at = label + "/" + tag;
      }
    }
  }
  if (!pass) {
    info("the vsm-pd supplement (derivative gain 500, frequency gain 200) couples");
    info("into the area-1 local mode through the plant bus; its damping shift is");
    info("small in absolute terms but exceeds 10% of the baseline value");
  }
  verdict(7, pass,
          "local SG modes shift < 10% in f and zeta across controllers (worst " +
              fmt("%.1f", 100.0 * worst) + "% at " + worst_at + ")");
}

void criterion_8(const std::vector<EigenArt>& arts, const std::vector<Scheme>& schemes) {
  bool pass = true;
  for (size_t i = 0; i < arts.size(); ++i) {
    const std::string tag = vshp::scheme_tag(schemes[i]);
    const vshp::Mode* best = nullptr;
    for (const vshp::Mode& m : arts[i].set.modes)
      if (m.classification == "vshp-sg1" && (!best || m.f_hz > best->f_hz)) best = &m;
    if (schemes[i] == Scheme::Cpc) {
      info("cpc: " + std::string(best ? "unexpectedly present" : "absent") +
           "; the constant-power injection leaves no plant/SG1 cross-participation" +
           " (one-way coupling), so no such mode exists in the baseline");
      continue;
    }
    if (!best) {
      pass = false;
      info(tag + ": no plant/SG1 mode found");
      continue;
    }
    std::string note;
    if (best->zeta > 0.85) note = "  [near-degenerate: heavily damped, close to real]";
    info(tag + ": f " + fmt("%.3f", best->f_hz) + " Hz, zeta " +
         fmt("%.1f", 100.0 * best->zeta) + "%" + note);
  }
  verdict(8, pass,
          "plant/SG1 mode present for all five virtual-inertia controllers "
          "(degenerations reported above)");
}

void criterion_9(const std::vector<EventRun*>& runs, const std::vector<std::string>& tags) {
  bool pass = true;
  for (size_t i = 0; i < runs.size(); ++i) {
    const double settle = runs[i]->omega_t_settle;
    const bool ok = settle <= 121.0;
    info(tags[i] + ": |omega_t - 1| < 0.01 from t = " + fmt("%.1f", settle) +
         " s (event at 1.0 s, deadline 121.0 s)");
    pass = pass && ok;
  }
  verdict(9, pass,
          "turbine speed recovery within 120 s of the event for every droop-providing "
          "controller (vsg, vsg-pid, vsm-pd, vsm-pid)");
}

bool kernel_convergence() {
  vshp::RunConfig cfg = base_config(Scheme::Vsg);
  cfg.scenario.events = {{7, 1.0, 0.5}};
  cfg.scenario.inner_tol = 1e-13;
  const auto final_sig = [&](double dt) {
    vshp::RunConfig c = cfg;
    c.scenario.dt_s = dt;
    return vshp::run_scenario(c).series.rows.back();
  };
  const std::vector<double> a = final_sig(1e-3);
  const std::vector<double> b = final_sig(5e-4);
  const std::vector<double> r = final_sig(1.25e-4);
  double ea = 0.0, eb = 0.0;
  for (size_t i = 0; i < r.size(); ++i) {
    ea = std::max(ea, std::abs(a[i] - r[i]));
    eb = std::max(eb, std::abs(b[i] - r[i]));
  }
  const double ratio = ea / eb;
  info("step halving on the bus-7 scenario: e(1 ms) " + fmt("%.3e", ea) + ", e(0.5 ms) " +
       fmt("%.3e", eb) + ", ratio " + fmt("%.2f", ratio) +
       " (expected near 4.2 against a dt/8 reference)");
  return ratio > 3.2 && ratio < 4.8;
}

bool kernel_linear_agreement() {
  vshp::RunConfig cfg = base_config(Scheme::Vsg);
  auto model = vshp::SystemModel::assemble(cfg);
  const Eigen::VectorXd x0 = model->initial_guess();
  const Eigen::VectorXd xeq = vshp::find_equilibrium(*model, x0);
  const vshp::LinearModel lin = vshp::numerical_jacobian(*model, xeq);

  Eigen::VectorXd start = xeq;
  for (int i : model->sg_speed_states()) start[i] += 1e-4;
  start[model->registry().index_of("hyd.omega_t")] += 1e-4;

  LinearizedModel linear(lin.a, xeq);
  const double dt = 1e-3;
  vshp::TrapezoidalIntegrator inl(*model, dt);
  vshp::TrapezoidalIntegrator ilin(linear, dt);
  Eigen::VectorXd xn = start, xl = start;
  double worst = 0.0;
  for (int k = 1; k <= 5000; ++k) {
    inl.step(xn);
    ilin.step(xl);
    if (k % 100 == 0) worst = std::max(worst, (xn - xl).cwiseAbs().maxCoeff());
  }
  info("nonlinear vs frozen linearization, 1e-4 speed perturbations, 5 s: max gap " +
       fmt("%.3e", worst) + " pu");
  return worst < 1e-3;
}

bool kernel_eigen_residuals(const std::vector<EigenArt>& arts) {
  double worst = 0.0;
  for (const EigenArt& art : arts) {
    const vshp::EigenDecomposition ed = vshp::eigen_decompose(art.lin.a);
    for (int k = 0; k < ed.lambda.size(); ++k) {
      const Eigen::VectorXcd v = ed.right.col(k);
      const double res = (art.lin.a * v - ed.lambda[k] * v).norm() / v.norm();
      worst = std::max(worst, res);
    }
  }
  info("max eigenpair residual across all six system matrices: " + fmt("%.3e", worst));
  return worst < 1e-8;
}

bool kernel_inversion_roundtrip() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> mag(0.2, 1.5), ang(-3.141592653589793, 3.141592653589793),
      pw(-1.5, 1.5);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const vshp::Phasor v = vshp::Phasor::polar(mag(rng), ang(rng));
    const vshp::DqPair vdq = vshp::to_dq(v, ang(rng));
    const double p = pw(rng), q = pw(rng);
    const vshp::DqPair i = vshp::current_refs_from_pq(vdq, p, q);
    const vshp::PqPair back = vshp::dq_power(vdq, i);
    worst = std::max({worst, std::abs(back.p - p), std::abs(back.q - q)});
  }
  info("power/current inversion round trip over 1e4 random phasors: max err " +
       fmt("%.3e", worst));
  return worst < 1e-12;
}

void criterion_10(const std::vector<EigenArt>& arts) {
  const bool conv = kernel_convergence();
  const bool lin = kernel_linear_agreement();
  const bool eig = kernel_eigen_residuals(arts);
  const bool inv = kernel_inversion_roundtrip();
  verdict(10, conv && lin && eig && inv,
          std::string("numerical kernels: O(dt^2) halving ") + (conv ? "ok" : "FAIL") +
              ", linear agreement " + (lin ? "ok" : "FAIL") + ", eigen residuals " +
              (eig ? "ok" : "FAIL") + ", inversion round trip " + (inv ? "ok" : "FAIL"));
}

void criterion_11() {
  const vshp::RunConfig cfg = vshp::parse_config_text("{}").config;
  const vshp::VIControllerConfig& c = cfg.controller;
  int checked = 0;
  bool pass = true;
  const auto eq = [&](double actual, double expected, const char* name) {
    ++checked;
    if (actual != expected) {
      pass = false;
      info(std::string("mismatch: ") + name + " = " + fmt("%.6g", actual) +
           ", expected " + fmt("%.6g", expected));
    }
  };

  eq(c.cpc.k_pp, 0.045, "cpc.k_pp");
  eq(c.cpc.k_pi, 0.023, "cpc.k_pi");

  eq(c.vsg.kp, 100.0, "vsg.kp");
  eq(c.vsg.kd, 33.6, "vsg.kd");
  eq(c.vsg.t_filter, 0.01, "vsg.t_filter");

  eq(c.vsg_pid.kp, 100.0, "vsg_pid.kp");
  eq(c.vsg_pid.ki, 286.0, "vsg_pid.ki");
  eq(c.vsg_pid.kd, 33.6, "vsg_pid.kd");
  eq(c.vsg_pid.t_filter, 0.01, "vsg_pid.t_filter");

  eq(c.vsm.kp_v, 0.29, "vsm.kp_v");
  eq(c.vsm.ki_v, 92.0, "vsm.ki_v");
  eq(c.vsm.k_ffe, 0.0, "vsm.k_ffe");
  eq(c.vsm.w_qf, 200.0, "vsm.w_qf");
  eq(c.vsm.k_q, 0.1, "vsm.k_q");
  eq(c.vsm.w_vf, 200.0, "vsm.w_vf");
  eq(c.vsm.l_s, 0.25, "vsm.l_s");
  eq(c.vsm.r_s, 0.01, "vsm.r_s");
  eq(c.vsm.k_omega, 20.0, "vsm.k_omega");
  eq(c.vsm.t_a, 4.0, "vsm.t_a");
  eq(c.vsm.k_d, 40.0, "vsm.k_d");
  eq(c.vsm.w_d, 5.0, "vsm.w_d");
  eq(c.vsm.omega_b, 2.0 * 3.14159265358979323846 * 50.0, "vsm.omega_b");
  eq(c.vsm.k_ad, 0.3, "vsm.k_ad");
  eq(c.vsm.w_ad, 50.0, "vsm.w_ad");

  eq(c.vsm_pd.kp, 100.0, "vsm_pd.kp");
  eq(c.vsm_pd.kd, 500.0, "vsm_pd.kd");
  eq(c.vsm_pd.t_filter, 1.0, "vsm_pd.t_filter");
  eq(c.k_omega_pd, 200.0, "k_omega_pd");

  eq(c.vsm_pid.kp, 3000.0, "vsm_pid.kp");
  eq(c.vsm_pid.ki, 476.0, "vsm_pid.ki");
  eq(c.vsm_pid.kd, 12600.0, "vsm_pid.kd");
  eq(c.vsm_pid.t_filter, 1.0, "vsm_pid.t_filter");
  eq(c.k_omega_pid, 2000.0, "k_omega_pid");

  eq(c.r_d, 0.01, "r_d");
  eq(c.vsg_pid.droop, 0.01, "vsg_pid.droop");
  eq(c.vsm_pid.droop, 0.01, "vsm_pid.droop");
  eq(c.pll_filter_t, 0.001, "pll_filter_t");

  // Variant frequency-controller gains substitute the base value.
  vshp::VIControllerConfig v = c;
  v.scheme = Scheme::VsmPd;
  eq(v.resolve_vsm_params().k_omega, 200.0, "resolved k_omega (vsm-pd)");
  v.scheme = Scheme::VsmPid;
  eq(v.resolve_vsm_params().k_omega, 2000.0, "resolved k_omega (vsm-pid)");
  v.scheme = Scheme::Vsm;
  eq(v.resolve_vsm_params().k_omega, 20.0, "resolved k_omega (vsm)");

  info("rated angular frequency is stored as the electrical base 2*pi*50 rad/s");
  verdict(11, pass,
          "documented default parameters verbatim (" + std::to_string(checked) +
              " values checked, droop and filter constants included)");
}

}  // namespace

int main() {
  std::printf("acceptance suite: two-area grid with a converter-interfaced hydropower plant\n");
  std::printf("bus-7 event: 50%% load loss at t = 1.0 s; all runs dt = 1 ms\n\n");

  try {
    const std::vector<Scheme> schemes = vshp::all_schemes();

    std::vector<HoldRun> holds;
    for (Scheme s : schemes) holds.push_back(run_hold(s));

    EventRun ev_cpc = run_event(Scheme::Cpc);
    EventRun ev_vsg = run_event(Scheme::Vsg);
    EventRun ev_vsg_pid = run_event(Scheme::VsgPid);
    EventRun ev_vsm = run_event(Scheme::Vsm);
    EventRun ev_vsm_pd = run_event(Scheme::VsmPd);
    EventRun ev_vsm_pid = run_event(Scheme::VsmPid);

    std::vector<EigenArt> arts;
    std::vector<vshp::ModeSet> sets;
    std::vector<vshp::ClassificationGroups> groups;
    for (Scheme s : schemes) {
      arts.push_back(run_eigen(s));
      sets.push_back(arts.back().set);
      groups.push_back(arts.back().groups);
    }
    const vshp::ModeComparison cmp = vshp::compare_modes(sets, groups, "cpc");

    criterion_1(holds, schemes);
    criterion_2(ev_vsm);
    criterion_3(ev_vsg);
    criterion_4(ev_vsg_pid, ev_vsm_pid);
    criterion_5(ev_cpc, ev_vsg, ev_vsm);
    criterion_6(cmp);
    criterion_7(cmp);
    criterion_8(arts, schemes);
    criterion_9({&ev_vsg, &ev_vsg_pid, &ev_vsm_pd, &ev_vsm_pid},
                {"vsg", "vsg-pid", "vsm-pd", "vsm-pid"});
    criterion_10(arts);
    criterion_11();
  } catch (const std::exception& e) {
    std::printf("[ABORT] unhandled error: %s\n", e.what());
    return 99;
  }

  std::printf("\n%d of 11 criteria failed\n", g_failures);
  return g_failures;
}
