#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vshp/hydraulic.hpp"
#include "vshp/network.hpp"
#include "vshp/vi_vsg.hpp"
#include "vshp/vi_vsm.hpp"

namespace vshp {

enum class Scheme { Cpc, Vsg, VsgPid, Vsm, VsmPd, VsmPid };

const char* scheme_tag(Scheme s);
std::optional<Scheme> scheme_from_tag(const std::string& tag);
std::vector<Scheme> all_schemes();

// Every controller parameter with its published default. The variant gains
// k_omega_pd / k_omega_pid replace the base VSM k_omega when the respective
// scheme is active; resolve_vsm_params applies that substitution.
struct VIControllerConfig {
  Scheme scheme = Scheme::Cpc;
  CpcParams cpc;
  VsgParams vsg;
  VsgPidParams vsg_pid;
  VsmParams vsm;
  VsmPdParams vsm_pd;
  VsmPidParams vsm_pid;
  double k_omega_pd = 200.0;    // VSM-PD frequency controller gain
  double k_omega_pid = 2000.0;  // VSM-PID frequency controller gain
  // Shared plumbing.
  double r_d = 0.01;            // permanent droop R_d
  double pll_filter_t = 0.001;  // PLL frequency filter, s
  double p_f_filter_t = 0.1;    // droop power feedback filter, s
  double pll_kp = 0.8;
  double pll_ki = 80.0;
  double i_lag_t = 0.005;  // current injection lag, s
  double i_limit = 1.2;    // current magnitude limit, pu
  double q_kp = 0.5;       // reactive PI gains
  double q_ki = 20.0;

  VsmParams resolve_vsm_params() const;
  PLLParams resolve_pll_params(double omega_b) const;
};

struct LoadSpec {
  int bus = 7;  // benchmark (1-based) bus number
  double p_mw = 0.0;
  double q_mvar = 0.0;
  double q_cap_mvar = 0.0;  // shunt compensation at the bus
};

struct NetworkConfig {
  double f_nom_hz = 50.0;
  double s_base_mva = 100.0;
  // Line constants per km on the system base and transformer reactance on the
  // machine base.
  double line_r_per_km = 1e-4;
  double line_x_per_km = 1e-3;
  double line_b_per_km = 1.75e-3;
  double trafo_x = 0.15;
  // Synchronous machine nameplate shared by the four units; inertia per unit.
  SyncMachineNameplate sg;
  std::array<double, 4> sg_h_s{6.5, 6.5, 6.175, 6.175};
  std::array<double, 4> sg_p_mw{560.0, 600.0, 0.0, 700.0};  // slack entry unused
  std::array<double, 4> sg_v_pu{1.03, 1.01, 1.03, 1.01};
  int slack_sg = 3;  // 1-based generator number
  std::vector<LoadSpec> loads{{7, 967.0, 100.0, 200.0}, {9, 1767.0, 100.0, 350.0}};
  // Converter-interfaced plant.
  int vshp_bus = 5;  // benchmark numbering
  double vshp_s_mva = 300.0;
  double vshp_p_pu = 0.90;  // dispatch on the plant base
  double vshp_q_pu = 0.0;
};

struct EventSpec {
  int bus = 7;  // benchmark numbering
  double time_s = 1.0;
  double retained_fraction = 0.5;
};

struct ScenarioConfig {
  double duration_s = 25.0;
  double dt_s = 1e-3;
  double sample_dt_s = 1e-2;
  std::vector<EventSpec> events;
  bool validate = true;      // per-step power balance audit
  double inner_tol = 1e-11;  // implicit step inner solve tolerance
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<std::string> signals;  // empty selects the scheme default set
};

struct RunConfig {
  NetworkConfig network;
  HydraulicParams hydraulic;
  VIControllerConfig controller;
  ScenarioConfig scenario;
  OutputConfig output;
};

// Provenance of each leaf key: "file" when the value came from the parsed
// document, "default" otherwise. Keys use dotted paths.
using Provenance = std::map<std::string, std::string>;

struct ParsedConfig {
  RunConfig config;
  Provenance provenance;
};

// Parses and validates a configuration document (JSON text). Unknown keys,
// malformed structure, or out-of-range values raise SchemaError /
// ConfigInvalid.
ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config_file(const std::string& path);

// Effective configuration (defaults merged) as canonical JSON text.
std::string effective_config_text(const RunConfig& cfg);

// Run manifest: effective config plus per-key provenance.
std::string run_manifest_text(const ParsedConfig& parsed);

// FNV-1a hash of the effective configuration, rendered as hex.
std::string config_hash(const RunConfig& cfg);

// The three study scenario documents (name -> JSON text).
std::vector<std::pair<std::string, std::string>> seed_scenarios();

}  // namespace vshp
