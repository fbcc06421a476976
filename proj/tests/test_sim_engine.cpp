#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "vshp/config.hpp"
#include "vshp/errors.hpp"
#include "vshp/sim_engine.hpp"

using namespace vshp;

namespace {

struct ScalarDecay : DynamicModel {
  int size() const override { return 1; }
  void derivatives(std::span<const double> x, std::span<double> d) override { d[0] = -x[0]; }
};

struct CubicDecay : DynamicModel {
  int size() const override { return 1; }
  void derivatives(std::span<const double> x, std::span<double> d) override {
    d[0] = -x[0] * x[0] * x[0];
  }
};

struct TwoState : DynamicModel {
  int size() const override { return 2; }
  void derivatives(std::span<const double> x, std::span<double> d) override {
    d[0] = x[1] - 0.5;
    d[1] = 4.0 * (2.0 - x[0]) - x[1];
  }
};

struct NoEquilibrium : DynamicModel {
  int size() const override { return 1; }
  void derivatives(std::span<const double>, std::span<double> d) override { d[0] = 1.0; }
};

RunConfig default_cfg(Scheme s) {
  RunConfig cfg = parse_config_text("{}").config;
  cfg.controller.scheme = s;
  return cfg;
}

}  // namespace

TEST_CASE("state registry bookkeeping") {
  StateRegistry reg;
  CHECK(reg.add("sg1", "delta") == 0);
  CHECK(reg.add("sg1", "domega") == 1);
  CHECK(reg.add("conv", "id") == 2);
  CHECK(reg.size() == 3);
  CHECK(reg.index_of("sg1.domega") == 1);
  CHECK(reg.index_of("sg1.missing") == -1);
  auto sg = reg.module_indices("sg1");
  REQUIRE(sg.size() == 2);
  CHECK(sg[0] == 0);
  CHECK(sg[1] == 1);
  CHECK(reg.module_indices("conv").size() == 1);
  CHECK(reg.names()[2] == "conv.id");
}

TEST_CASE("trapezoidal step on the scalar decay") {
  ScalarDecay m;
  Eigen::VectorXd x(1);
  x << 1.0;
  Eigen::VectorXd x1 = integrate_step(m, x, 0.1);
  CHECK(x1[0] == doctest::Approx((1.0 - 0.05) / (1.0 + 0.05)).epsilon(1e-12));
}

TEST_CASE("stationary point is preserved exactly") {
  TwoState m;
  Eigen::VectorXd x(2);
  x << 1.875, 0.5;
  Eigen::VectorXd x1 = integrate_step(m, x, 0.05);
  CHECK(std::abs(x1[0] - x[0]) < 1e-12);
  CHECK(std::abs(x1[1] - x[1]) < 1e-12);
}

TEST_CASE("integration error scales as dt squared") {
  const double exact = 1.0 / std::sqrt(3.0);  // x' = -x^3 from 1 over 1 s
  auto endpoint = [](double dt) {
    CubicDecay m;
    Eigen::VectorXd x(1);
    x << 1.0;
    TrapezoidalIntegrator integ(m, dt);
    const int n = std::lround(1.0 / dt);
    for (int k = 0; k < n; ++k) integ.step(x);
    return x[0];
  };
  const double e1 = std::abs(endpoint(1.0 / 32.0) - exact);
  const double e2 = std::abs(endpoint(1.0 / 64.0) - exact);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("newton equilibrium search") {
  TwoState m;

  SUBCASE("converges from a cold start") {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd eq = find_equilibrium(m, x0);
    CHECK(eq[0] == doctest::Approx(1.875).epsilon(1e-9));
    CHECK(eq[1] == doctest::Approx(0.5).epsilon(1e-9));
  }

  SUBCASE("already at the fixed point") {
    Eigen::VectorXd x0(2);
    x0 << 1.875, 0.5;
    Eigen::VectorXd eq = find_equilibrium(m, x0);
    CHECK((eq - x0).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("reports divergence when no fixed point exists") {
    NoEquilibrium bad;
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
    CHECK_THROWS_AS(find_equilibrium(bad, x0), EquilibriumDiverged);
  }
}

TEST_CASE("assembled registry per controller") {
  struct Expect {
    Scheme s;
    int count;
  };
  // 24 machine states + 6 hydraulic states + the converter block.
  const Expect table[] = {{Scheme::Cpc, 37},    {Scheme::Vsg, 37},   {Scheme::VsgPid, 39},
                          {Scheme::Vsm, 40},    {Scheme::VsmPd, 41}, {Scheme::VsmPid, 43}};
  for (const auto& e : table) {
    CAPTURE(scheme_tag(e.s));
    auto model = SystemModel::assemble(default_cfg(e.s));
    CHECK(model->size() == e.count);
    CHECK(model->registry().size() == e.count);
    CHECK(static_cast<int>(model->state_names().size()) == e.count);
  }

  auto cpc = SystemModel::assemble(default_cfg(Scheme::Cpc));
  auto vsm = SystemModel::assemble(default_cfg(Scheme::Vsm));
  const auto& a = cpc->registry().names();
  const auto& b = vsm->registry().names();
  for (int k = 0; k < 30; ++k) CHECK(a[k] == b[k]);  // sg + hyd blocks shared
  CHECK(cpc->registry().index_of("conv.p_x_int") >= 0);
  CHECK(vsm->registry().index_of("conv.omega") >= 0);
  CHECK(vsm->registry().index_of("conv.p_x_int") == -1);
}

TEST_CASE("classification groups expose rotor and plant states") {
  auto model = SystemModel::assemble(default_cfg(Scheme::Vsg));
  auto speeds = model->sg_speed_states();
  REQUIRE(speeds.size() == 4);
  for (int i : speeds) CHECK(model->registry().names()[i].find("domega") != std::string::npos);
  CHECK(model->sg_rotor_states().size() == 8);
  auto conv = model->converter_states();
  CHECK(conv.size() == 13);  // 6 hydraulic + 7 converter states
  CHECK(model->converter_base_ratio() == doctest::Approx(3.0));
}

TEST_CASE("every controller assembles to a true equilibrium") {
  for (Scheme s : all_schemes()) {
    CAPTURE(scheme_tag(s));
    auto model = SystemModel::assemble(default_cfg(s));
    Eigen::VectorXd x0 = model->initial_guess();
    Eigen::VectorXd eq = find_equilibrium(*model, x0);
    Eigen::VectorXd f(model->size());
    model->derivatives({eq.data(), static_cast<size_t>(eq.size())},
                       {f.data(), static_cast<size_t>(f.size())});
    CHECK(f.cwiseAbs().maxCoeff() < 1e-9);
    CHECK_FALSE(model->clamps_active({eq.data(), static_cast<size_t>(eq.size())}));

    const auto& reg = model->registry();
    CHECK(std::abs(eq[reg.index_of("hyd.omega_t")] - 1.0) < 1e-9);
    CHECK(std::abs(eq[reg.index_of("conv.pll_omega_f")] - 1.0) < 1e-9);
    if (reg.index_of("conv.omega") >= 0) CHECK(std::abs(eq[reg.index_of("conv.omega")] - 1.0) < 1e-9);
    if (reg.index_of("conv.p_f") >= 0) CHECK(std::abs(eq[reg.index_of("conv.p_f")]) < 1e-9);
    if (reg.index_of("conv.sup_p_f") >= 0)
      CHECK(std::abs(eq[reg.index_of("conv.sup_p_f")]) < 1e-9);
  }
}

TEST_CASE("event-free run holds every signal constant") {
  RunConfig cfg = default_cfg(Scheme::Cpc);
  cfg.scenario.duration_s = 2.0;
  ScenarioResult r = run_scenario(cfg);
  REQUIRE(!r.series.rows.empty());
  for (size_t c = 0; c < r.series.columns.size(); ++c) {
    double lo = r.series.rows.front()[c], hi = lo;
    for (const auto& row : r.series.rows) {
      lo = std::min(lo, row[c]);
      hi = std::max(hi, row[c]);
    }
    CAPTURE(r.series.columns[c]);
    CHECK(hi - lo < 1e-9);
  }
  CHECK((r.x_final - r.x_equilibrium).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("identical configurations reproduce bit-identical series") {
  RunConfig cfg = default_cfg(Scheme::Vsg);
  cfg.scenario.duration_s = 1.0;
  cfg.scenario.events.push_back({7, 0.5, 0.5});
  ScenarioResult r1 = run_scenario(cfg);
  ScenarioResult r2 = run_scenario(cfg);
  REQUIRE(r1.series.rows.size() == r2.series.rows.size());
  for (size_t k = 0; k < r1.series.rows.size(); ++k)
    for (size_t c = 0; c < r1.series.columns.size(); ++c)
      CHECK(r1.series.rows[k][c] == r2.series.rows[k][c]);
}

TEST_CASE("load loss responses follow the controller family") {
  auto run20 = [](Scheme s) {
    RunConfig cfg = default_cfg(s);
    cfg.scenario.duration_s = 20.0;
    cfg.scenario.events.push_back({7, 1.0, 0.5});
    return run_scenario(cfg);
  };

  SUBCASE("constant power control recovers the dispatch") {
    ScenarioResult r = run20(Scheme::Cpc);
    auto t = r.series.t;
    auto f = r.series.column("f_hz");
    auto pg = r.series.column("p_g_pu");

    double f_max = 50.0;
    for (double v : f) f_max = std::max(f_max, v);
    CHECK(f_max > 50.1);  // over-frequency after losing load

    // Samples at and before the event time are untouched by the event.
    for (size_t k = 0; k < t.size() && t[k] <= 1.0 + 1e-12; ++k)
      CHECK(std::abs(f[k] - 50.0) < 1e-7);

    // Power heads back toward the dispatch as the integrator works.
    double dev_peak = 0.0;
    for (size_t k = 0; k < t.size(); ++k)
      if (t[k] > 1.0 && t[k] < 3.0) dev_peak = std::max(dev_peak, std::abs(pg[k] - 0.9));
    double dev_end = std::abs(pg.back() - 0.9);
    CHECK(dev_peak > 0.01);
    CHECK(dev_end < 0.7 * dev_peak);
  }

  SUBCASE("vsg settles at a drooped power level") {
    ScenarioResult r = run20(Scheme::Vsg);
    auto pg = r.series.column("p_g_pu");
    auto f = r.series.column("f_hz");
    CHECK(pg.back() < 0.9 - 0.1);
    CHECK(f.back() > 50.05);
  }
}

TEST_CASE("events at load-free buses are rejected") {
  RunConfig cfg = default_cfg(Scheme::Cpc);
  cfg.scenario.duration_s = 0.05;
  cfg.scenario.events.push_back({4, 0.01, 0.5});
  CHECK_THROWS_AS(run_scenario(cfg), NoLoadAtBus);
}

TEST_CASE("unknown selected signal is rejected") {
  RunConfig cfg = default_cfg(Scheme::Cpc);
  cfg.scenario.duration_s = 0.02;
  cfg.output.signals = {"not_a_signal"};
  CHECK_THROWS_AS(run_scenario(cfg), ConfigInvalid);
}

TEST_CASE("csv round trip with metadata") {
  TimeSeries ts;
  ts.columns = {"f_hz", "p_g_pu"};
  ts.t = {0.0, 0.01, 0.02};
  ts.rows = {{50.0, 0.9}, {50.000123456789, 0.899999999999}, {49.9, 0.95}};
  ts.metadata["controller"] = "vsg";
  ts.metadata["config_hash"] = "abc123";

  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "vshp_csv_test";
  fs::create_directories(dir);
  fs::path file = dir / "series.csv";
  write_csv(ts, file);

  TimeSeries back = read_csv(file);
  CHECK(back.columns == ts.columns);
  CHECK(back.metadata.at("controller") == "vsg");
  CHECK(back.metadata.at("config_hash") == "abc123");
  REQUIRE(back.t.size() == 3);
  for (size_t k = 0; k < 3; ++k) {
    CHECK(back.t[k] == doctest::Approx(ts.t[k]).epsilon(1e-14));
    CHECK(back.rows[k][0] == doctest::Approx(ts.rows[k][0]).epsilon(1e-14));
    CHECK(back.rows[k][1] == doctest::Approx(ts.rows[k][1]).epsilon(1e-14));
  }
  CHECK(back.column_index("p_g_pu") == 1);
  CHECK(back.column_index("zzz") == -1);

  // No stray temporaries once the write has landed.
  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
  fs::remove_all(dir);
}

TEST_CASE("atomic text write replaces the target in one move") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "vshp_atomic_test";
  fs::create_directories(dir);
  fs::path file = dir / "out.json";
  write_text_atomic(file, "{\"a\":1}");
  write_text_atomic(file, "{\"a\":2}");
  std::ifstream in(file);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content == "{\"a\":2}");
  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
  fs::remove_all(dir);
}
