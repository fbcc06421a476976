#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vshp/config.hpp"
#include "vshp/network.hpp"

namespace vshp {

// ---------------------------------------------------------------------------
// Generic autonomous ODE interface. Implementations may keep an internal
// algebraic workspace (warm-started network solutions), which derivatives()
// is allowed to update.
// ---------------------------------------------------------------------------

class DynamicModel {
 public:
  virtual ~DynamicModel() = default;
  virtual int size() const = 0;
  virtual void derivatives(std::span<const double> x, std::span<double> dxdt) = 0;
  // Projection of hard-bounded states after an accepted step.
  virtual void project(std::span<double> /*x*/) {}
  virtual std::vector<std::string> state_names() const;
};

// ---------------------------------------------------------------------------
// Flat state registry: module-qualified names in integration order.
// ---------------------------------------------------------------------------

class StateRegistry {
 public:
  int add(const std::string& module, const std::string& state);
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  // Index of "module.state"; -1 when absent.
  int index_of(const std::string& qualified) const;
  // All indices whose name starts with "module_prefix.".
  std::vector<int> module_indices(const std::string& module_prefix) const;

 private:
  std::vector<std::string> names_;
};

// ---------------------------------------------------------------------------
// Equilibrium search and implicit integration.
// ---------------------------------------------------------------------------

struct EquilibriumOptions {
  double tol = 1e-9;      // acceptance threshold on max |f|
  double target = 1e-12;  // keep polishing down to this when possible
  int max_iter = 80;
};

// Damped Newton with a least-squares (rank-revealing) step so structurally
// neutral directions (the global rotation of all angles) do not block
// convergence. Throws EquilibriumDiverged naming the worst residual state.
Eigen::VectorXd find_equilibrium(DynamicModel& model, const Eigen::VectorXd& x0,
                                 const EquilibriumOptions& opts = {});

struct TrapezoidalOptions {
  double tol = 1e-11;  // inner solve tolerance on the step residual
  int max_iter = 40;
};

// Implicit trapezoidal rule with a chord-Newton inner solve. The chord matrix
// (I - dt/2 J) is built from a finite-difference Jacobian and refreshed
// whenever convergence degrades (after events, large angle drift, ...).
class TrapezoidalIntegrator {
 public:
  TrapezoidalIntegrator(DynamicModel& model, double dt, TrapezoidalOptions opts = {});

  // Advances x by one step in place.
  void step(Eigen::VectorXd& x);
  // Drops the cached chord matrix (call after discrete model changes).
  void invalidate();

  int last_iterations() const { return last_iterations_; }
  int jacobian_rebuilds() const { return jacobian_rebuilds_; }

 private:
  void rebuild_chord(const Eigen::VectorXd& x);
  bool solve_stage(const Eigen::VectorXd& xn, const Eigen::VectorXd& fn,
                   Eigen::VectorXd& z);

  DynamicModel& model_;
  double dt_;
  TrapezoidalOptions opts_;
  Eigen::PartialPivLU<Eigen::MatrixXd> chord_;
  bool have_chord_ = false;
  int last_iterations_ = 0;
  int jacobian_rebuilds_ = 0;
  double last_residual_norm_ = 0.0;
  int last_residual_index_ = -1;
  Eigen::VectorXd work_f_, work_g_;
};

// One-shot convenience used by kernel tests.
Eigen::VectorXd integrate_step(DynamicModel& model, const Eigen::VectorXd& x, double dt,
                               const TrapezoidalOptions& opts = {});

// ---------------------------------------------------------------------------
// Sampled results.
// ---------------------------------------------------------------------------

struct TimeSeries {
  std::vector<std::string> columns;  // signal names, excluding t
  std::vector<double> t;
  std::vector<std::vector<double>> rows;  // one row per sample
  std::map<std::string, std::string> metadata;

  int column_index(const std::string& name) const;  // -1 when absent
  std::vector<double> column(const std::string& name) const;
};

// CSV with #-comment metadata, a header row, and t as the first column.
// Writes to a temporary file in the target directory, then renames.
void write_csv(const TimeSeries& ts, const std::filesystem::path& path);
TimeSeries read_csv(const std::filesystem::path& path);

// Atomic text file write (temp + rename).
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

// ---------------------------------------------------------------------------
// Assembled plant + grid model.
// ---------------------------------------------------------------------------

class SystemModel : public DynamicModel {
 public:
  static std::unique_ptr<SystemModel> assemble(const RunConfig& cfg);
  ~SystemModel() override;

  int size() const override;
  void derivatives(std::span<const double> x, std::span<double> dxdt) override;
  void project(std::span<double> x) override;
  std::vector<std::string> state_names() const override;

  const StateRegistry& registry() const;

  // Power flow plus per-module steady-state construction. Resolves the
  // controller references (dispatch, voltage, reactive setpoints) and caches
  // them for later derivative evaluations; must run before derivatives().
  Eigen::VectorXd initial_guess();

  // Measured signal names for this controller scheme.
  const std::vector<std::string>& signal_names() const;
  void measure(std::span<const double> x, std::span<double> out);

  // Applies a load change (benchmark bus numbering already resolved to the
  // dense index) and refreshes the cached network factorization.
  void apply_event(const LoadEvent& ev);

  // True when any saturation or hard limit is active at x.
  bool clamps_active(std::span<const double> x);

  // Complex power balance residual magnitude at the last derivative call.
  double last_power_residual() const;

  // Classification groups.
  std::vector<int> sg_speed_states() const;      // one index per machine
  std::vector<int> sg_rotor_states() const;      // speed + angle per machine
  std::vector<int> converter_states() const;     // hydraulic + converter block
  double converter_base_ratio() const;           // plant MVA / system MVA

  Scheme scheme() const;
  const RunConfig& config() const;

 private:
  explicit SystemModel(const RunConfig& cfg);
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Scenario driver.
// ---------------------------------------------------------------------------

struct ScenarioResult {
  TimeSeries series;
  Eigen::VectorXd x_equilibrium;
  Eigen::VectorXd x_final;
  double wall_seconds = 0.0;
};

ScenarioResult run_scenario(const RunConfig& cfg);
ScenarioResult run_scenario(SystemModel& model, const RunConfig& cfg);

}  // namespace vshp
