#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vshp/sim_engine.hpp"

namespace vshp {

// ---------------------------------------------------------------------------
// Linearization.
// ---------------------------------------------------------------------------

struct LinearModel {
  Eigen::MatrixXd a;
  std::vector<std::string> labels;
  Eigen::VectorXd x_eq;
};

// Central-difference Jacobian with per-state step max(1e-6, 1e-6 |x_i|).
// Throws NonEquilibriumPoint when max |f(x_eq)| exceeds residual_tol.
LinearModel numerical_jacobian(DynamicModel& model, const Eigen::VectorXd& x_eq,
                               double residual_tol = 1e-7);

// ---------------------------------------------------------------------------
// Eigenstructure.
// ---------------------------------------------------------------------------

struct EigenDecomposition {
  Eigen::VectorXcd lambda;
  Eigen::MatrixXcd right;  // columns are right eigenvectors
  Eigen::MatrixXcd left;   // rows are left eigenvectors, biorthogonal to right
};

// Dense eigendecomposition with left vectors from the inverse of the right
// eigenvector matrix, so left * right = I by construction. Residuals
// ||A v - lambda v|| are verified; throws EigenFailed otherwise.
EigenDecomposition eigen_decompose(const Eigen::MatrixXd& a);

double mode_frequency_hz(std::complex<double> lambda);
// 1.0 for purely real eigenvalues.
double mode_damping_ratio(std::complex<double> lambda);

// ---------------------------------------------------------------------------
// Modes and classification.
// ---------------------------------------------------------------------------

struct Mode {
  std::complex<double> lambda;
  double f_hz = 0.0;
  double zeta = 1.0;
  std::string classification;  // interarea | local-area1 | local-area2 |
                               // vshp-sg1 | control | real
  Eigen::VectorXd participation;  // normalized per state, sums to 1
  bool oscillatory = false;
};

struct ClassificationGroups {
  std::vector<int> sg_speed;   // per machine, in unit order
  std::vector<int> sg_rotor;   // speed + angle indices, flattened
  std::vector<int> vshp;       // hydraulic + converter block
  std::vector<std::string> labels;
};

struct ClassifierOptions {
  double sg_rotor_min = 0.25;   // rotor participation for electromech modes
  double area_share_min = 0.20; // each area's share for the interarea label
  double vshp_min = 0.20;       // plant group share for the vshp-sg1 label; a
                                // plant state topping the participation list
                                // qualifies as well
  double sg1_rotor_min = 0.03;  // SG1 rotor share for the vshp-sg1 label, with
                                // SG1 leading the other machines
  double local_dominance = 0.65;
};

struct ModeSet {
  std::string controller;
  std::vector<Mode> modes;  // non-negative-frequency representatives
  std::vector<std::string> labels;
};

ModeSet analyze_modes(const LinearModel& lin, const ClassificationGroups& groups,
                      const std::string& controller_tag,
                      const ClassifierOptions& opts = {});

// ---------------------------------------------------------------------------
// Cross-controller comparison.
// ---------------------------------------------------------------------------

struct TrackedMode {
  bool present = false;
  double f_hz = 0.0;
  double zeta = 0.0;
  double delta_f = 0.0;     // vs baseline
  double delta_zeta = 0.0;  // vs baseline
  std::string note;         // e.g. degeneration diagnostics
};

struct ModeComparison {
  std::vector<std::string> tags;            // controller order, baseline first
  std::vector<std::string> tracked_labels;  // interarea, locals, vshp-sg1
  // tracked_labels.size() x tags.size()
  std::vector<std::vector<TrackedMode>> table;
  double interarea_zeta_ratio_vsg = 0.0;  // zeta(VSG) / zeta(baseline)
};

// Matches same-label modes across controllers by nearest neighbour in
// (frequency, group participation signature) space: the distance is
// |df|/1 Hz + 0.5 * L1 distance of the group signatures. Two candidates
// within 25% of the best distance raise ModeMatchAmbiguous.
ModeComparison compare_modes(const std::vector<ModeSet>& sets,
                             const std::vector<ClassificationGroups>& groups,
                             const std::string& baseline_tag);

std::string mode_report_json(const ModeSet& set);
std::string comparison_json(const ModeComparison& cmp);
std::string comparison_text_table(const ModeComparison& cmp);

}  // namespace vshp
