#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vshp/config.hpp"
#include "vshp/errors.hpp"
#include "vshp/sim_engine.hpp"
#include "vshp/smallsignal.hpp"

namespace fs = std::filesystem;
using namespace vshp;

namespace {

ParsedConfig load_config(const std::string& path) {
  if (path.empty()) return parse_config_text("{}");
  return parse_config_file(path);
}

void apply_overrides(ParsedConfig& pc, const std::string& controller, double dt,
                     double duration, const std::string& out_dir) {
  if (!controller.empty()) {
    const auto s = scheme_from_tag(controller);
    if (!s) throw ConfigInvalid("unknown controller tag: " + controller);
    pc.config.controller.scheme = *s;
    pc.provenance["controller.scheme"] = "cli";
  }
  if (dt > 0.0) {
    pc.config.scenario.dt_s = dt;
    pc.provenance["scenario.dt_s"] = "cli";
    if (pc.config.scenario.sample_dt_s < dt) {
      pc.config.scenario.sample_dt_s = dt;
      pc.provenance["scenario.sample_dt_s"] = "cli";
    }
  }
  if (duration > 0.0) {
    pc.config.scenario.duration_s = duration;
    pc.provenance["scenario.duration_s"] = "cli";
  }
  const char* env = std::getenv("VSHP_OUT_DIR");
  if (!out_dir.empty()) {
    pc.config.output.dir = out_dir;
    pc.provenance["output.dir"] = "cli";
  } else if (env && *env) {
    pc.config.output.dir = env;
    pc.provenance["output.dir"] = "env";
  }
}

struct EigenOutcome {
  ModeSet modes;
  ClassificationGroups groups;
};

EigenOutcome eigen_for(const RunConfig& cfg) {
  auto model = SystemModel::assemble(cfg);
  const Eigen::VectorXd x0 = model->initial_guess();
  const Eigen::VectorXd xeq = find_equilibrium(*model, x0);
  const LinearModel lin = numerical_jacobian(*model, xeq);
  ClassificationGroups groups{model->sg_speed_states(), model->sg_rotor_states(),
                              model->converter_states(), model->state_names()};
  return {analyze_modes(lin, groups, scheme_tag(cfg.controller.scheme)), groups};
}

double max_abs_df_hz(const TimeSeries& ts) {
  const auto f = ts.column("f_hz");
  if (f.empty()) return 0.0;
  double worst = 0.0;
  for (double v : f) worst = std::max(worst, std::abs(v - f.front()));
  return worst;
}

int cmd_simulate(ParsedConfig pc) {
  const RunConfig& cfg = pc.config;
  const std::string tag = scheme_tag(cfg.controller.scheme);
  auto model = SystemModel::assemble(cfg);
  const ScenarioResult res = run_scenario(*model, cfg);

  const fs::path dir = cfg.output.dir;
  write_csv(res.series, dir / (tag + "_timeseries.csv"));
  write_text_atomic(dir / (tag + "_manifest.json"), run_manifest_text(pc));
  std::cout << tag << ": " << res.series.rows.size() << " samples, max |df| = "
            << max_abs_df_hz(res.series) << " Hz, wall " << res.wall_seconds << " s\n"
            << "wrote " << (dir / (tag + "_timeseries.csv")).string() << "\n";
  return 0;
}

int cmd_eigen(ParsedConfig pc, std::vector<std::string> controllers,
              std::string baseline) {
  if (controllers.empty()) controllers = {scheme_tag(pc.config.controller.scheme)};
  const fs::path dir = pc.config.output.dir;

  std::vector<ModeSet> sets;
  std::vector<ClassificationGroups> groups;
  for (const auto& tag : controllers) {
    const auto s = scheme_from_tag(tag);
    if (!s) throw ConfigInvalid("unknown controller tag: " + tag);
    RunConfig cfg = pc.config;
    cfg.controller.scheme = *s;
    EigenOutcome out = eigen_for(cfg);
    write_text_atomic(dir / (tag + "_modes.json"), mode_report_json(out.modes));
    std::cout << "wrote " << (dir / (tag + "_modes.json")).string() << "\n";
    sets.push_back(std::move(out.modes));
    groups.push_back(std::move(out.groups));
  }

  if (sets.size() > 1) {
    bool have_base = false;
    for (const auto& s : sets) have_base = have_base || s.controller == baseline;
    if (!have_base) baseline = sets.front().controller;
    const ModeComparison cmp = compare_modes(sets, groups, baseline);
    write_text_atomic(dir / "modes_comparison.json", comparison_json(cmp));
    write_text_atomic(dir / "modes_comparison.txt", comparison_text_table(cmp));
    std::cout << comparison_text_table(cmp);
  }
  return 0;
}

int cmd_compare(ParsedConfig pc, std::vector<std::string> controllers,
                const std::string& baseline) {
  if (controllers.empty())
    for (Scheme s : all_schemes()) controllers.push_back(scheme_tag(s));
  const fs::path dir = pc.config.output.dir;
  fs::create_directories(dir);

  struct PerTag {
    std::string tag;
    double wall_seconds = 0.0;
    double max_df_hz = 0.0;
    ModeSet modes;
    ClassificationGroups groups;
    std::string error;
  };

  auto run_one = [&](const std::string& tag) -> PerTag {
    PerTag out;
    out.tag = tag;
    try {
      const auto s = scheme_from_tag(tag);
      if (!s) throw ConfigInvalid("unknown controller tag: " + tag);
      RunConfig cfg = pc.config;
      cfg.controller.scheme = *s;
      auto model = SystemModel::assemble(cfg);
      const ScenarioResult res = run_scenario(*model, cfg);
      write_csv(res.series, dir / (tag + "_timeseries.csv"));
      out.wall_seconds = res.wall_seconds;
      out.max_df_hz = max_abs_df_hz(res.series);

      EigenOutcome eo = eigen_for(cfg);
      write_text_atomic(dir / (tag + "_modes.json"), mode_report_json(eo.modes));
      out.modes = std::move(eo.modes);
      out.groups = std::move(eo.groups);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    return out;
  };

  std::vector<std::future<PerTag>> futures;
  for (const auto& tag : controllers)
    futures.push_back(std::async(std::launch::async, run_one, tag));
  std::vector<PerTag> results;
  for (auto& f : futures) results.push_back(f.get());

  nlohmann::json summary;
  std::vector<ModeSet> sets;
  std::vector<ClassificationGroups> groups;
  for (const auto& r : results) {
    nlohmann::json jr;
    if (r.error.empty()) {
      jr = {{"wall_seconds", r.wall_seconds}, {"max_df_hz", r.max_df_hz}};
      sets.push_back(r.modes);
      groups.push_back(r.groups);
    } else {
      jr = {{"error", r.error}};
    }
    summary[r.tag] = jr;
    std::cout << r.tag << ": "
              << (r.error.empty()
                      ? "max |df| = " + std::to_string(r.max_df_hz) + " Hz"
                      : "error: " + r.error)
              << "\n";
  }

  int rc = 0;
  if (sets.size() > 1) {
    try {
      std::string base = baseline;
      bool have_base = false;
      for (const auto& s : sets) have_base = have_base || s.controller == base;
      if (!have_base) base = sets.front().controller;
      const ModeComparison cmp = compare_modes(sets, groups, base);
      write_text_atomic(dir / "modes_comparison.json", comparison_json(cmp));
      write_text_atomic(dir / "modes_comparison.txt", comparison_text_table(cmp));
      std::cout << comparison_text_table(cmp);
    } catch (const SimError& e) {
      summary["comparison_error"] = e.what();
      std::cerr << "mode comparison failed: " << e.what() << "\n";
      rc = 2;
    }
  }
  for (const auto& r : results)
    if (!r.error.empty()) rc = 2;
  write_text_atomic(dir / "compare_summary.json", summary.dump(2) + "\n");
  return rc;
}

int cmd_seed(const std::string& dir_arg) {
  const fs::path dir = dir_arg.empty() ? fs::path("configs") : fs::path(dir_arg);
  for (const auto& [name, text] : seed_scenarios()) {
    write_text_atomic(dir / (name + ".json"), text);
    std::cout << "wrote " << (dir / (name + ".json")).string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phasor-domain dynamics and small-signal analysis of a two-area grid "
               "with a converter-interfaced hydro plant"};
  app.require_subcommand(1);

  std::string config_path, out_dir, controller, baseline = "cpc", seed_dir;
  std::vector<std::string> controllers;
  double dt = -1.0, duration = -1.0;

  auto* sim = app.add_subcommand("simulate", "run one time-domain scenario");
  sim->add_option("--config", config_path, "scenario config (JSON)");
  sim->add_option("--controller", controller, "controller tag override");
  sim->add_option("--dt", dt, "integration step, s");
  sim->add_option("--duration", duration, "simulated time, s");
  sim->add_option("--out", out_dir, "output directory");

  auto* eig = app.add_subcommand("eigen", "small-signal modes at the equilibrium");
  eig->add_option("--config", config_path, "scenario config (JSON)");
  eig->add_option("--controller", controllers, "controller tag (repeatable)");
  eig->add_option("--baseline", baseline, "baseline tag for the comparison");
  eig->add_option("--out", out_dir, "output directory");

  auto* cmp = app.add_subcommand("compare", "run all controllers on one scenario");
  cmp->add_option("--config", config_path, "scenario config (JSON)");
  cmp->add_option("--controller", controllers, "controller tag (repeatable)");
  cmp->add_option("--baseline", baseline, "baseline tag for the comparison");
  cmp->add_option("--dt", dt, "integration step, s");
  cmp->add_option("--duration", duration, "simulated time, s");
  cmp->add_option("--out", out_dir, "output directory");

  auto* seed = app.add_subcommand("seed-scenarios", "write the study scenario configs");
  seed->add_option("--dir", seed_dir, "target directory (default: configs)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*seed) return cmd_seed(seed_dir);
    ParsedConfig pc = load_config(config_path);
    apply_overrides(pc, controller, dt, duration, out_dir);
    if (*sim) return cmd_simulate(std::move(pc));
    if (*eig) return cmd_eigen(std::move(pc), controllers, baseline);
    if (*cmp) return cmd_compare(std::move(pc), controllers, baseline);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
