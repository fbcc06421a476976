#include "vshp/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "vshp/errors.hpp"

namespace vshp {

namespace {

using nlohmann::json;

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Reads one JSON object level: known keys are registered as they are read,
// anything left over is rejected. A null node means the whole section is
// absent and every field keeps its default.
class Obj {
 public:
  Obj(const json* node, std::string path, Provenance& prov)
      : node_(node), path_(std::move(path)), prov_(prov) {
    if (node_ && !node_->is_object())
      throw SchemaError(path_ + ": expected an object");
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    if (!node_) return nullptr;
    const auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }

  std::string child_path(const std::string& key) const { return join_path(path_, key); }

  void number(const std::string& key, double& out) {
    const json* c = child(key);
    const std::string p = child_path(key);
    if (!c) {
      prov_[p] = "default";
      return;
    }
    if (!c->is_number()) throw SchemaError(p + ": expected a number");
    out = c->get<double>();
    prov_[p] = "file";
  }

  void integer(const std::string& key, int& out) {
    const json* c = child(key);
    const std::string p = child_path(key);
    if (!c) {
      prov_[p] = "default";
      return;
    }
    if (!c->is_number_integer()) throw SchemaError(p + ": expected an integer");
    out = c->get<int>();
    prov_[p] = "file";
  }

  void boolean(const std::string& key, bool& out) {
    const json* c = child(key);
    const std::string p = child_path(key);
    if (!c) {
      prov_[p] = "default";
      return;
    }
    if (!c->is_boolean()) throw SchemaError(p + ": expected a boolean");
    out = c->get<bool>();
    prov_[p] = "file";
  }

  void text(const std::string& key, std::string& out) {
    const json* c = child(key);
    const std::string p = child_path(key);
    if (!c) {
      prov_[p] = "default";
      return;
    }
    if (!c->is_string()) throw SchemaError(p + ": expected a string");
    out = c->get<std::string>();
    prov_[p] = "file";
  }

  template <size_t N>
  void number_array(const std::string& key, std::array<double, N>& out) {
    const json* c = child(key);
    const std::string p = child_path(key);
    if (!c) {
      prov_[p] = "default";
      return;
    }
    if (!c->is_array() || c->size() != N)
      throw SchemaError(p + ": expected an array of " + std::to_string(N) + " numbers");
    for (size_t i = 0; i < N; ++i) {
      if (!(*c)[i].is_number())
        throw SchemaError(p + "[" + std::to_string(i) + "]: expected a number");
      out[i] = (*c)[i].get<double>();
    }
    prov_[p] = "file";
  }

  void finish() const {
    if (!node_) return;
    for (auto it = node_->begin(); it != node_->end(); ++it)
      if (!seen_.count(it.key()))
        throw SchemaError(join_path(path_, it.key()) + ": unknown key");
  }

 private:
  const json* node_;
  std::string path_;
  Provenance& prov_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigInvalid(msg);
}

void validate_config(const RunConfig& c) {
  const auto& n = c.network;
  check(n.f_nom_hz > 0.0, "network.f_nom_hz must be positive");
  check(n.s_base_mva > 0.0, "network.s_base_mva must be positive");
  check(n.line_x_per_km > 0.0, "network.line_x_per_km must be positive");
  check(n.trafo_x > 0.0, "network.trafo_x must be positive");
  check(n.sg.s_mva > 0.0, "network.sg.s_mva must be positive");
  check(n.sg.td0p > 0.0 && n.sg.tq0p > 0.0, "network.sg time constants must be positive");
  check(n.sg.avr_t > 0.0 && n.sg.gov_t > 0.0, "network.sg controller time constants must be positive");
  check(n.sg.gov_droop > 0.0, "network.sg.gov_droop must be positive");
  for (double h : n.sg_h_s) check(h > 0.0, "network.sg_h_s entries must be positive");
  check(n.slack_sg >= 1 && n.slack_sg <= 4, "network.slack_sg must be in 1..4");
  for (const auto& l : n.loads) {
    check(l.bus >= 1 && l.bus <= 11, "network.loads bus must be in 1..11");
    check(l.p_mw >= 0.0, "network.loads p_mw must be non-negative");
  }
  check(!n.loads.empty(), "network.loads must not be empty");
  check(n.vshp_bus >= 1 && n.vshp_bus <= 11, "network.vshp_bus must be in 1..11");
  check(n.vshp_s_mva > 0.0, "network.vshp_s_mva must be positive");
  check(n.vshp_p_pu >= 0.0 && n.vshp_p_pu <= 1.2, "network.vshp_p_pu must be in [0, 1.2]");

  const auto& h = c.hydraulic;
  check(h.t_wt > 0.0 && h.t_wp > 0.0, "hydraulic water time constants must be positive");
  check(h.c_s > 0.0, "hydraulic.c_s must be positive");
  check(h.h_0 > 0.0, "hydraulic.h_0 must be positive");
  check(h.h_t > 0.0, "hydraulic.h_t must be positive");
  check(h.t_g > 0.0, "hydraulic.t_g must be positive");
  check(h.g_rate > 0.0, "hydraulic.g_rate must be positive");
  check(h.f_t >= 0.0 && h.f_p >= 0.0, "hydraulic friction must be non-negative");

  const auto& k = c.controller;
  check(k.r_d > 0.0, "controller.r_d must be positive");
  check(k.pll_filter_t > 0.0, "controller.pll_filter_t must be positive");
  check(k.p_f_filter_t > 0.0, "controller.p_f_filter_t must be positive");
  check(k.i_lag_t > 0.0, "controller.i_lag_t must be positive");
  check(k.i_limit > 0.0, "controller.i_limit must be positive");
  check(k.vsg.t_filter > 0.0, "controller.vsg.t_filter must be positive");
  check(k.vsg_pid.t_filter > 0.0, "controller.vsg_pid.t_filter must be positive");
  check(k.vsm_pd.t_filter > 0.0, "controller.vsm_pd.t_filter must be positive");
  check(k.vsm_pid.t_filter > 0.0, "controller.vsm_pid.t_filter must be positive");
  check(k.vsm.t_a > 0.0, "controller.vsm.t_a must be positive");
  check(k.vsm.l_s > 0.0, "controller.vsm.l_s must be positive");
  check(k.vsm.w_qf > 0.0 && k.vsm.w_vf > 0.0 && k.vsm.w_d > 0.0,
        "controller.vsm filter poles must be positive");

  const auto& s = c.scenario;
  check(s.duration_s > 0.0, "scenario.duration_s must be positive");
  check(s.dt_s > 0.0, "scenario.dt_s must be positive");
  check(s.sample_dt_s >= s.dt_s, "scenario.sample_dt_s must be >= dt_s");
  check(s.inner_tol > 0.0, "scenario.inner_tol must be positive");
  for (const auto& e : s.events) {
    check(e.bus >= 1 && e.bus <= 11, "scenario.events bus must be in 1..11");
    check(e.time_s >= 0.0, "scenario.events time_s must be non-negative");
    check(e.retained_fraction >= 0.0 && e.retained_fraction <= 1.0,
          "scenario.events retained_fraction must be in [0, 1]");
  }
  check(!c.output.dir.empty(), "output.dir must not be empty");
}

ParsedConfig parse_document(const json& doc) {
  ParsedConfig out;
  RunConfig& c = out.config;
  Provenance& prov = out.provenance;

  Obj root(&doc, "", prov);

  {
    Obj net(root.child("network"), "network", prov);
    auto& n = c.network;
    net.number("f_nom_hz", n.f_nom_hz);
    net.number("s_base_mva", n.s_base_mva);
    net.number("line_r_per_km", n.line_r_per_km);
    net.number("line_x_per_km", n.line_x_per_km);
    net.number("line_b_per_km", n.line_b_per_km);
    net.number("trafo_x", n.trafo_x);
    {
      Obj sg(net.child("sg"), net.child_path("sg"), prov);
      sg.number("s_mva", n.sg.s_mva);
      sg.number("xd", n.sg.xd);
      sg.number("xq", n.sg.xq);
      sg.number("xdp", n.sg.xdp);
      sg.number("xqp", n.sg.xqp);
      sg.number("rs", n.sg.rs);
      sg.number("td0p", n.sg.td0p);
      sg.number("tq0p", n.sg.tq0p);
      sg.number("d_pu", n.sg.d_pu);
      sg.number("avr_gain", n.sg.avr_gain);
      sg.number("avr_t", n.sg.avr_t);
      sg.number("gov_droop", n.sg.gov_droop);
      sg.number("gov_t", n.sg.gov_t);
      sg.finish();
    }
    net.number_array("sg_h_s", n.sg_h_s);
    net.number_array("sg_p_mw", n.sg_p_mw);
    net.number_array("sg_v_pu", n.sg_v_pu);
    net.integer("slack_sg", n.slack_sg);
    {
      const json* loads = net.child("loads");
      const std::string p = net.child_path("loads");
      if (loads) {
        if (!loads->is_array()) throw SchemaError(p + ": expected an array");
        n.loads.clear();
        for (size_t i = 0; i < loads->size(); ++i) {
          Obj lo(&(*loads)[i], p + "[" + std::to_string(i) + "]", prov);
          LoadSpec l;
          lo.integer("bus", l.bus);
          lo.number("p_mw", l.p_mw);
          lo.number("q_mvar", l.q_mvar);
          lo.number("q_cap_mvar", l.q_cap_mvar);
          lo.finish();
          n.loads.push_back(l);
        }
        prov[p] = "file";
      } else {
        prov[p] = "default";
      }
    }
    net.integer("vshp_bus", n.vshp_bus);
    net.number("vshp_s_mva", n.vshp_s_mva);
    net.number("vshp_p_pu", n.vshp_p_pu);
    net.number("vshp_q_pu", n.vshp_q_pu);
    net.finish();
  }

  {
    Obj hyd(root.child("hydraulic"), "hydraulic", prov);
    auto& h = c.hydraulic;
    hyd.number("t_wt", h.t_wt);
    hyd.number("t_wp", h.t_wp);
    hyd.number("c_s", h.c_s);
    hyd.number("f_t", h.f_t);
    hyd.number("f_p", h.f_p);
    hyd.number("h_0", h.h_0);
    hyd.number("h_t", h.h_t);
    hyd.number("t_g", h.t_g);
    hyd.number("g_rate", h.g_rate);
    hyd.number("gov_kp", h.gov_kp);
    hyd.number("gov_ki", h.gov_ki);
    hyd.number("omega_ref", h.omega_ref);
    hyd.finish();
  }

  {
    Obj ctl(root.child("controller"), "controller", prov);
    auto& k = c.controller;
    {
      std::string tag = scheme_tag(k.scheme);
      ctl.text("scheme", tag);
      const auto parsed = scheme_from_tag(tag);
      if (!parsed) throw ConfigInvalid("controller.scheme: unknown tag '" + tag + "'");
      k.scheme = *parsed;
    }
    {
      Obj o(ctl.child("cpc"), ctl.child_path("cpc"), prov);
      o.number("k_pp", k.cpc.k_pp);
      o.number("k_pi", k.cpc.k_pi);
      o.finish();
    }
    {
      Obj o(ctl.child("vsg"), ctl.child_path("vsg"), prov);
      o.number("kp", k.vsg.kp);
      o.number("kd", k.vsg.kd);
      o.number("t_filter", k.vsg.t_filter);
      o.finish();
    }
    {
      Obj o(ctl.child("vsg_pid"), ctl.child_path("vsg_pid"), prov);
      o.number("kp", k.vsg_pid.kp);
      o.number("ki", k.vsg_pid.ki);
      o.number("kd", k.vsg_pid.kd);
      o.number("t_filter", k.vsg_pid.t_filter);
      o.finish();
    }
    {
      Obj o(ctl.child("vsm"), ctl.child_path("vsm"), prov);
      o.number("kp_v", k.vsm.kp_v);
      o.number("ki_v", k.vsm.ki_v);
      o.number("k_ffe", k.vsm.k_ffe);
      o.number("w_qf", k.vsm.w_qf);
      o.number("k_q", k.vsm.k_q);
      o.number("w_vf", k.vsm.w_vf);
      o.number("l_s", k.vsm.l_s);
      o.number("r_s", k.vsm.r_s);
      o.number("k_omega", k.vsm.k_omega);
      o.number("t_a", k.vsm.t_a);
      o.number("k_d", k.vsm.k_d);
      o.number("w_d", k.vsm.w_d);
      o.number("k_ad", k.vsm.k_ad);
      o.number("w_ad", k.vsm.w_ad);
      o.finish();
    }
    {
      Obj o(ctl.child("vsm_pd"), ctl.child_path("vsm_pd"), prov);
      o.number("kp", k.vsm_pd.kp);
      o.number("kd", k.vsm_pd.kd);
      o.number("t_filter", k.vsm_pd.t_filter);
      o.finish();
    }
    {
      Obj o(ctl.child("vsm_pid"), ctl.child_path("vsm_pid"), prov);
      o.number("kp", k.vsm_pid.kp);
      o.number("ki", k.vsm_pid.ki);
      o.number("kd", k.vsm_pid.kd);
      o.number("t_filter", k.vsm_pid.t_filter);
      o.finish();
    }
    ctl.number("k_omega_pd", k.k_omega_pd);
    ctl.number("k_omega_pid", k.k_omega_pid);
    ctl.number("r_d", k.r_d);
    ctl.number("pll_filter_t", k.pll_filter_t);
    ctl.number("p_f_filter_t", k.p_f_filter_t);
    ctl.number("pll_kp", k.pll_kp);
    ctl.number("pll_ki", k.pll_ki);
    ctl.number("i_lag_t", k.i_lag_t);
    ctl.number("i_limit", k.i_limit);
    ctl.number("q_kp", k.q_kp);
    ctl.number("q_ki", k.q_ki);
    ctl.finish();
    // Shared droop plumbing flows into both PID variants.
    k.vsg_pid.droop = k.r_d;
    k.vsm_pid.droop = k.r_d;
    k.vsg_pid.t_pf = k.p_f_filter_t;
    k.vsm_pid.t_pf = k.p_f_filter_t;
  }

  {
    Obj sc(root.child("scenario"), "scenario", prov);
    auto& s = c.scenario;
    sc.number("duration_s", s.duration_s);
    sc.number("dt_s", s.dt_s);
    sc.number("sample_dt_s", s.sample_dt_s);
    sc.boolean("validate", s.validate);
    sc.number("inner_tol", s.inner_tol);
    {
      const json* events = sc.child("events");
      const std::string p = sc.child_path("events");
      if (events) {
        if (!events->is_array()) throw SchemaError(p + ": expected an array");
        s.events.clear();
        for (size_t i = 0; i < events->size(); ++i) {
          Obj eo(&(*events)[i], p + "[" + std::to_string(i) + "]", prov);
          EventSpec e;
          eo.integer("bus", e.bus);
          eo.number("time_s", e.time_s);
          eo.number("retained_fraction", e.retained_fraction);
          eo.finish();
          s.events.push_back(e);
        }
        prov[p] = "file";
      } else {
        prov[p] = "default";
      }
    }
    sc.finish();
  }

  {
    Obj outp(root.child("output"), "output", prov);
    outp.text("dir", c.output.dir);
    {
      const json* sig = outp.child("signals");
      const std::string p = outp.child_path("signals");
      if (sig) {
        if (!sig->is_array()) throw SchemaError(p + ": expected an array of strings");
        c.output.signals.clear();
        for (const auto& e : *sig) {
          if (!e.is_string()) throw SchemaError(p + ": expected an array of strings");
          c.output.signals.push_back(e.get<std::string>());
        }
        prov[p] = "file";
      } else {
        prov[p] = "default";
      }
    }
    outp.finish();
  }

  root.finish();
  validate_config(c);
  return out;
}

json effective_json(const RunConfig& c) {
  json j;
  const auto& n = c.network;
  j["network"] = {
      {"f_nom_hz", n.f_nom_hz},
      {"s_base_mva", n.s_base_mva},
      {"line_r_per_km", n.line_r_per_km},
      {"line_x_per_km", n.line_x_per_km},
      {"line_b_per_km", n.line_b_per_km},
      {"trafo_x", n.trafo_x},
      {"sg",
       {{"s_mva", n.sg.s_mva},
        {"xd", n.sg.xd},
        {"xq", n.sg.xq},
        {"xdp", n.sg.xdp},
        {"xqp", n.sg.xqp},
        {"rs", n.sg.rs},
        {"td0p", n.sg.td0p},
        {"tq0p", n.sg.tq0p},
        {"d_pu", n.sg.d_pu},
        {"avr_gain", n.sg.avr_gain},
        {"avr_t", n.sg.avr_t},
        {"gov_droop", n.sg.gov_droop},
        {"gov_t", n.sg.gov_t}}},
      {"sg_h_s", n.sg_h_s},
      {"sg_p_mw", n.sg_p_mw},
      {"sg_v_pu", n.sg_v_pu},
      {"slack_sg", n.slack_sg},
      {"vshp_bus", n.vshp_bus},
      {"vshp_s_mva", n.vshp_s_mva},
      {"vshp_p_pu", n.vshp_p_pu},
      {"vshp_q_pu", n.vshp_q_pu},
  };
  json loads = json::array();
  for (const auto& l : n.loads)
    loads.push_back({{"bus", l.bus},
                     {"p_mw", l.p_mw},
                     {"q_mvar", l.q_mvar},
                     {"q_cap_mvar", l.q_cap_mvar}});
  j["network"]["loads"] = loads;

  const auto& h = c.hydraulic;
  j["hydraulic"] = {{"t_wt", h.t_wt},   {"t_wp", h.t_wp},     {"c_s", h.c_s},
                    {"f_t", h.f_t},     {"f_p", h.f_p},       {"h_0", h.h_0},
                    {"h_t", h.h_t},     {"t_g", h.t_g},       {"g_rate", h.g_rate},
                    {"gov_kp", h.gov_kp}, {"gov_ki", h.gov_ki}, {"omega_ref", h.omega_ref}};

  const auto& k = c.controller;
  j["controller"] = {
      {"scheme", scheme_tag(k.scheme)},
      {"cpc", {{"k_pp", k.cpc.k_pp}, {"k_pi", k.cpc.k_pi}}},
      {"vsg", {{"kp", k.vsg.kp}, {"kd", k.vsg.kd}, {"t_filter", k.vsg.t_filter}}},
      {"vsg_pid",
       {{"kp", k.vsg_pid.kp},
        {"ki", k.vsg_pid.ki},
        {"kd", k.vsg_pid.kd},
        {"t_filter", k.vsg_pid.t_filter}}},
      {"vsm",
       {{"kp_v", k.vsm.kp_v},
        {"ki_v", k.vsm.ki_v},
        {"k_ffe", k.vsm.k_ffe},
        {"w_qf", k.vsm.w_qf},
        {"k_q", k.vsm.k_q},
        {"w_vf", k.vsm.w_vf},
        {"l_s", k.vsm.l_s},
        {"r_s", k.vsm.r_s},
        {"k_omega", k.vsm.k_omega},
        {"t_a", k.vsm.t_a},
        {"k_d", k.vsm.k_d},
        {"w_d", k.vsm.w_d},
        {"k_ad", k.vsm.k_ad},
        {"w_ad", k.vsm.w_ad}}},
      {"vsm_pd", {{"kp", k.vsm_pd.kp}, {"kd", k.vsm_pd.kd}, {"t_filter", k.vsm_pd.t_filter}}},
      {"vsm_pid",
       {{"kp", k.vsm_pid.kp},
        {"ki", k.vsm_pid.ki},
        {"kd", k.vsm_pid.kd},
        {"t_filter", k.vsm_pid.t_filter}}},
      {"k_omega_pd", k.k_omega_pd},
      {"k_omega_pid", k.k_omega_pid},
      {"r_d", k.r_d},
      {"pll_filter_t", k.pll_filter_t},
      {"p_f_filter_t", k.p_f_filter_t},
      {"pll_kp", k.pll_kp},
      {"pll_ki", k.pll_ki},
      {"i_lag_t", k.i_lag_t},
      {"i_limit", k.i_limit},
      {"q_kp", k.q_kp},
      {"q_ki", k.q_ki},
  };

  const auto& s = c.scenario;
  json events = json::array();
  for (const auto& e : s.events)
    events.push_back(
        {{"bus", e.bus}, {"time_s", e.time_s}, {"retained_fraction", e.retained_fraction}});
  j["scenario"] = {{"duration_s", s.duration_s},   {"dt_s", s.dt_s},
                   {"sample_dt_s", s.sample_dt_s}, {"validate", s.validate},
                   {"inner_tol", s.inner_tol},     {"events", events}};

  j["output"] = {{"dir", c.output.dir}, {"signals", c.output.signals}};
  return j;
}

}  // namespace

const char* scheme_tag(Scheme s) {
  switch (s) {
    case Scheme::Cpc: return "cpc";
    case Scheme::Vsg: return "vsg";
    case Scheme::VsgPid: return "vsg-pid";
    case Scheme::Vsm: return "vsm";
    case Scheme::VsmPd: return "vsm-pd";
    case Scheme::VsmPid: return "vsm-pid";
  }
  return "cpc";
}

std::optional<Scheme> scheme_from_tag(const std::string& tag) {
  for (Scheme s : all_schemes())
    if (tag == scheme_tag(s)) return s;
  return std::nullopt;
}

std::vector<Scheme> all_schemes() {
  return {Scheme::Cpc, Scheme::Vsg, Scheme::VsgPid, Scheme::Vsm, Scheme::VsmPd,
          Scheme::VsmPid};
}

VsmParams VIControllerConfig::resolve_vsm_params() const {
  VsmParams p = vsm;
  if (scheme == Scheme::VsmPd) p.k_omega = k_omega_pd;
  if (scheme == Scheme::VsmPid) p.k_omega = k_omega_pid;
  return p;
}

PLLParams VIControllerConfig::resolve_pll_params(double omega_b) const {
  PLLParams p;
  p.kp = pll_kp;
  p.ki = pll_ki;
  p.t_filter = pll_filter_t;
  p.omega_b = omega_b;
  return p;
}

ParsedConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  return parse_document(doc);
}

ParsedConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string effective_config_text(const RunConfig& cfg) {
  return effective_json(cfg).dump(2) + "\n";
}

std::string run_manifest_text(const ParsedConfig& parsed) {
  json j;
  j["config"] = effective_json(parsed.config);
  j["config_hash"] = config_hash(parsed.config);
  json prov = json::object();
  for (const auto& [key, src] : parsed.provenance) prov[key] = src;
  j["provenance"] = prov;
  return j.dump(2) + "\n";
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = effective_config_text(cfg);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::pair<std::string, std::string>> seed_scenarios() {
  std::vector<std::pair<std::string, std::string>> out;
  {
    json j;
    j["controller"] = {{"scheme", "vsg"}};
    j["scenario"] = {{"duration_s", 25.0},
                     {"events", json::array({{{"bus", 7}, {"time_s", 1.0},
                                              {"retained_fraction", 0.5}}})}};
    j["output"] = {{"dir", "out/bus7_step"}};
    out.emplace_back("bus7_step", j.dump(2) + "\n");
  }
  {
    json j;
    j["controller"] = {{"scheme", "vsg"}};
    j["scenario"] = {{"duration_s", 25.0},
                     {"events", json::array({{{"bus", 9}, {"time_s", 1.0},
                                              {"retained_fraction", 0.7}}})}};
    j["output"] = {{"dir", "out/bus9_step"}};
    out.emplace_back("bus9_step", j.dump(2) + "\n");
  }
  {
    json j;
    j["scenario"] = {{"duration_s", 30.0},
                     {"events", json::array({{{"bus", 7}, {"time_s", 1.0},
                                              {"retained_fraction", 0.5}}})}};
    j["output"] = {{"dir", "out/compare"}};
    out.emplace_back("compare", j.dump(2) + "\n");
  }
  return out;
}

}  // namespace vshp
