#include "vshp/smallsignal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "vshp/errors.hpp"

namespace vshp {

namespace {

std::string num_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

constexpr double kOscThreshold = 1e-6;  // rad/s imaginary part

}  // namespace

// ---------------------------------------------------------------------------
// Linearization
// ---------------------------------------------------------------------------

LinearModel numerical_jacobian(DynamicModel& model, const Eigen::VectorXd& x_eq,
                               double residual_tol) {
  const int n = model.size();
  if (x_eq.size() != n) throw NonEquilibriumPoint("state size mismatch");

  Eigen::VectorXd f(n), fp(n), fm(n), xp = x_eq;
  model.derivatives({x_eq.data(), static_cast<size_t>(n)}, {f.data(), static_cast<size_t>(n)});
  const double res = f.lpNorm<Eigen::Infinity>();
  if (res > residual_tol) {
    int worst = 0;
    f.cwiseAbs().maxCoeff(&worst);
    throw NonEquilibriumPoint("derivative residual " + num_text(res) + " at state " +
                              model.state_names()[worst]);
  }
  if (auto* sys = dynamic_cast<SystemModel*>(&model)) {
    if (sys->clamps_active({x_eq.data(), static_cast<size_t>(n)}))
      throw NonEquilibriumPoint("hard limit active at the linearization point");
  }

  LinearModel lin;
  lin.a.resize(n, n);
  lin.labels = model.state_names();
  lin.x_eq = x_eq;
  for (int i = 0; i < n; ++i) {
    const double h = std::max(1e-6, 1e-6 * std::abs(x_eq[i]));
    xp[i] = x_eq[i] + h;
    model.derivatives({xp.data(), static_cast<size_t>(n)}, {fp.data(), static_cast<size_t>(n)});
    xp[i] = x_eq[i] - h;
    model.derivatives({xp.data(), static_cast<size_t>(n)}, {fm.data(), static_cast<size_t>(n)});
    xp[i] = x_eq[i];
    lin.a.col(i) = (fp - fm) / (2.0 * h);
  }
  return lin;
}

// ---------------------------------------------------------------------------
// Eigenstructure
// ---------------------------------------------------------------------------

EigenDecomposition eigen_decompose(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, true);
  if (es.info() != Eigen::Success) throw EigenFailed("eigenvalue iteration did not converge");

  EigenDecomposition out;
  out.lambda = es.eigenvalues();
  out.right = es.eigenvectors();

  for (int k = 0; k < n; ++k) {
    const auto v = out.right.col(k);
    const double resid = (a.cast<std::complex<double>>() * v - out.lambda[k] * v)
                             .lpNorm<Eigen::Infinity>();
    if (resid > 1e-8 * (1.0 + std::abs(out.lambda[k])))
      throw EigenFailed("eigenpair residual " + num_text(resid) + " for mode " +
                        std::to_string(k));
  }

  Eigen::PartialPivLU<Eigen::MatrixXcd> rlu(out.right);
  out.left = rlu.solve(Eigen::MatrixXcd::Identity(n, n));
  const double ortho =
      (out.left * out.right - Eigen::MatrixXcd::Identity(n, n)).lpNorm<Eigen::Infinity>();
  if (ortho > 1e-8)
    throw EigenFailed("left/right biorthogonality residual " + num_text(ortho));
  return out;
}

double mode_frequency_hz(std::complex<double> lambda) {
  return std::abs(lambda.imag()) / (2.0 * M_PI);
}

double mode_damping_ratio(std::complex<double> lambda) {
  if (std::abs(lambda.imag()) <= kOscThreshold) return 1.0;
  const double mag = std::abs(lambda);
  if (mag < 1e-300) return 1.0;
  return -lambda.real() / mag;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

namespace {

double group_share(const Eigen::VectorXd& p, const std::vector<int>& idx) {
  double s = 0.0;
  for (int i : idx) s += p[i];
  return s;
}

std::string classify(const Mode& mode, const Eigen::MatrixXcd& right, int k,
                     const ClassificationGroups& g, const ClassifierOptions& opts) {
  if (!mode.oscillatory) return "real";
  const Eigen::VectorXd& p = mode.participation;

  const double rotor = group_share(p, g.sg_rotor);
  const double vshp = group_share(p, g.vshp);

  std::array<double, 4> speed{};
  std::array<double, 4> machine_rotor{};
  for (int m = 0; m < 4; ++m) {
    speed[m] = p[g.sg_speed[m]];
    machine_rotor[m] = p[g.sg_rotor[2 * m]] + p[g.sg_rotor[2 * m + 1]];
  }
  const double speed_total = speed[0] + speed[1] + speed[2] + speed[3];
  const double w1 = speed_total > 0 ? (speed[0] + speed[1]) / speed_total : 0.0;
  const double w2 = speed_total > 0 ? (speed[2] + speed[3]) / speed_total : 0.0;

  // Phase alignment of the machine speed components against the strongest one.
  int ref = 0;
  double ref_mag = 0.0;
  for (int m = 0; m < 4; ++m) {
    const double mag = std::abs(right(g.sg_speed[m], k));
    if (mag > ref_mag) {
      ref_mag = mag;
      ref = m;
    }
  }
  std::array<bool, 4> aligned{};
  for (int m = 0; m < 4; ++m) {
    const std::complex<double> prod =
        right(g.sg_speed[m], k) * std::conj(right(g.sg_speed[ref], k));
    aligned[m] = prod.real() >= 0.0;
  }
  const bool area_split = (aligned[0] == aligned[1]) && (aligned[2] == aligned[3]) &&
                          (aligned[0] != aligned[2]);

  const bool sg1_leads =
      machine_rotor[0] >= machine_rotor[1] && machine_rotor[0] >= machine_rotor[2] &&
      machine_rotor[0] >= machine_rotor[3] && machine_rotor[0] >= opts.sg1_rotor_min;

  // The plant "leads" a mode when its states carry a substantial share or the
  // single largest participation entry belongs to the plant.
  Eigen::Index top = 0;
  p.maxCoeff(&top);
  bool top_is_vshp = false;
  for (int i : g.vshp)
    if (i == static_cast<int>(top)) top_is_vshp = true;
  const bool vshp_leads = vshp >= opts.vshp_min || top_is_vshp;

  if (rotor >= opts.sg_rotor_min && area_split && std::min(w1, w2) >= opts.area_share_min)
    return "interarea";
  if (vshp_leads && sg1_leads) return "vshp-sg1";
  if (rotor >= opts.sg_rotor_min && w1 >= opts.local_dominance) return "local-area1";
  if (rotor >= opts.sg_rotor_min && w2 >= opts.local_dominance) return "local-area2";
  return "control";
}

}  // namespace

ModeSet analyze_modes(const LinearModel& lin, const ClassificationGroups& groups,
                      const std::string& controller_tag, const ClassifierOptions& opts) {
  if (groups.sg_speed.size() != 4 || groups.sg_rotor.size() != 8)
    throw SimError("classification groups must describe four machines");

  const int n = static_cast<int>(lin.a.rows());
  const EigenDecomposition eig = eigen_decompose(lin.a);

  ModeSet set;
  set.controller = controller_tag;
  set.labels = lin.labels;

  for (int k = 0; k < n; ++k) {
    if (eig.lambda[k].imag() < 0.0) continue;  // keep one of each conjugate pair
    Mode mode;
    mode.lambda = eig.lambda[k];
    mode.f_hz = mode_frequency_hz(mode.lambda);
    mode.zeta = mode_damping_ratio(mode.lambda);
    mode.oscillatory = std::abs(mode.lambda.imag()) > kOscThreshold;

    Eigen::VectorXd p(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      p[i] = std::abs(eig.right(i, k) * eig.left(k, i));
      sum += p[i];
    }
    if (sum > 0.0) p /= sum;
    mode.participation = p;

    mode.classification = classify(mode, eig.right, k, groups, opts);
    set.modes.push_back(std::move(mode));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Cross-controller comparison
// ---------------------------------------------------------------------------

namespace {

// Frequency plus group-participation signature used for nearest-neighbour
// matching: four machine speed shares and the plant share.
std::array<double, 5> signature(const Mode& m, const ClassificationGroups& g) {
  std::array<double, 5> s{};
  for (int i = 0; i < 4; ++i) s[i] = m.participation[g.sg_speed[i]];
  s[4] = group_share(m.participation, g.vshp);
  return s;
}

double match_distance(double f_a, const std::array<double, 5>& sig_a, const Mode& b,
                      const ClassificationGroups& gb) {
  const auto sig_b = signature(b, gb);
  double l1 = 0.0;
  for (int i = 0; i < 5; ++i) l1 += std::abs(sig_a[i] - sig_b[i]);
  return std::abs(b.f_hz - f_a) / 1.0 + 0.5 * l1;
}

double relevance(const Mode& m, const ClassificationGroups& g) {
  if (m.classification == "vshp-sg1") return group_share(m.participation, g.vshp);
  return group_share(m.participation, g.sg_rotor);
}

}  // namespace

ModeComparison compare_modes(const std::vector<ModeSet>& sets,
                             const std::vector<ClassificationGroups>& groups,
                             const std::string& baseline_tag) {
  if (sets.size() != groups.size())
    throw SimError("mode sets and classification groups must pair up");
  int base = -1;
  for (size_t i = 0; i < sets.size(); ++i)
    if (sets[i].controller == baseline_tag) base = static_cast<int>(i);
  if (base < 0) throw SimError("baseline controller not among the analyzed sets");

  ModeComparison cmp;
  cmp.tracked_labels = {"interarea", "local-area1", "local-area2", "vshp-sg1"};
  std::vector<int> order;
  order.push_back(base);
  for (size_t i = 0; i < sets.size(); ++i)
    if (static_cast<int>(i) != base) order.push_back(static_cast<int>(i));
  for (int i : order) cmp.tags.push_back(sets[i].controller);

  for (const auto& label : cmp.tracked_labels) {
    std::vector<TrackedMode> row(order.size());

    // Baseline representative: the most relevant mode carrying the label.
    const Mode* ref = nullptr;
    for (const auto& m : sets[base].modes) {
      if (m.classification != label) continue;
      if (!ref || relevance(m, groups[base]) > relevance(*ref, groups[base])) ref = &m;
    }
    if (ref) {
      row[0].present = true;
      row[0].f_hz = ref->f_hz;
      row[0].zeta = ref->zeta;
    } else {
      row[0].note = "not present in baseline";
    }

    const std::array<double, 5> ref_sig =
        ref ? signature(*ref, groups[base]) : std::array<double, 5>{};
    const double ref_f = ref ? ref->f_hz : 0.0;

    for (size_t c = 1; c < order.size(); ++c) {
      const int si = order[c];
      TrackedMode& cell = row[c];
      if (!ref) {
        // A mode family absent from the baseline (e.g. the plant-SG1 pair) is
        // reported per controller on its own, with no deltas to compute.
        const Mode* own = nullptr;
        for (const auto& m : sets[si].modes) {
          if (m.classification != label) continue;
          if (!own || relevance(m, groups[si]) > relevance(*own, groups[si])) own = &m;
        }
        if (own) {
          cell.present = true;
          cell.f_hz = own->f_hz;
          cell.zeta = own->zeta;
          cell.note = "new relative to baseline";
        } else {
          cell.note = "label missing";
        }
        continue;
      }
      const Mode* best = nullptr;
      const Mode* second = nullptr;
      double best_d = std::numeric_limits<double>::infinity();
      double second_d = std::numeric_limits<double>::infinity();
      for (const auto& m : sets[si].modes) {
        if (m.classification != label) continue;
        const double d = match_distance(ref_f, ref_sig, m, groups[si]);
        if (d < best_d) {
          second = best;
          second_d = best_d;
          best = &m;
          best_d = d;
        } else if (d < second_d) {
          second = &m;
          second_d = d;
        }
      }
      if (!best) {
        // Degeneration: report the nearest oscillatory mode of any label.
        const Mode* nearest = nullptr;
        double nearest_d = std::numeric_limits<double>::infinity();
        for (const auto& m : sets[si].modes) {
          if (!m.oscillatory) continue;
          const double d = match_distance(ref_f, ref_sig, m, groups[si]);
          if (d < nearest_d) {
            nearest_d = d;
            nearest = &m;
          }
        }
        cell.note = "label missing";
        if (nearest)
          cell.note += "; nearest oscillatory mode f=" + num_text(nearest->f_hz) +
                       " Hz zeta=" + num_text(nearest->zeta) + " (" +
                       nearest->classification + ")";
        continue;
      }
      if (second && second_d <= 1.25 * best_d)
        throw ModeMatchAmbiguous("two '" + label + "' candidates for " +
                                 sets[si].controller + " within 25%: d1=" +
                                 num_text(best_d) + " d2=" + num_text(second_d));
      cell.present = true;
      cell.f_hz = best->f_hz;
      cell.zeta = best->zeta;
      cell.delta_f = best->f_hz - ref->f_hz;
      cell.delta_zeta = best->zeta - ref->zeta;
    }
    cmp.table.push_back(std::move(row));
  }

  // zeta(interarea, vsg) / zeta(interarea, baseline)
  const auto& ia = cmp.table[0];
  for (size_t c = 0; c < cmp.tags.size(); ++c) {
    if (cmp.tags[c] == "vsg" && ia[c].present && ia[0].present && ia[0].zeta != 0.0)
      cmp.interarea_zeta_ratio_vsg = ia[c].zeta / ia[0].zeta;
  }
  return cmp;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string mode_report_json(const ModeSet& set) {
  nlohmann::json j;
  j["controller"] = set.controller;
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : set.modes) {
    nlohmann::json jm;
    jm["lambda_re"] = m.lambda.real();
    jm["lambda_im"] = m.lambda.imag();
    jm["f_hz"] = m.f_hz;
    jm["zeta"] = m.zeta;
    jm["oscillatory"] = m.oscillatory;
    jm["classification"] = m.classification;
    std::vector<int> idx(m.participation.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return m.participation[a] > m.participation[b]; });
    nlohmann::json part = nlohmann::json::array();
    for (size_t i = 0; i < idx.size() && i < 8; ++i)
      part.push_back({{"state", set.labels[idx[i]]},
                      {"value", m.participation[idx[i]]}});
    jm["participation_top"] = part;
    modes.push_back(jm);
  }
  j["modes"] = modes;
  return j.dump(2) + "\n";
}

std::string comparison_json(const ModeComparison& cmp) {
  nlohmann::json j;
  j["baseline"] = cmp.tags.empty() ? "" : cmp.tags[0];
  j["tags"] = cmp.tags;
  nlohmann::json tracked = nlohmann::json::object();
  for (size_t r = 0; r < cmp.tracked_labels.size(); ++r) {
    nlohmann::json row = nlohmann::json::object();
    for (size_t c = 0; c < cmp.tags.size(); ++c) {
      const TrackedMode& t = cmp.table[r][c];
      row[cmp.tags[c]] = {{"present", t.present}, {"f_hz", t.f_hz},
                          {"zeta", t.zeta},       {"delta_f", t.delta_f},
                          {"delta_zeta", t.delta_zeta}, {"note", t.note}};
    }
    tracked[cmp.tracked_labels[r]] = row;
  }
  j["tracked"] = tracked;
  j["interarea_zeta_ratio_vsg"] = cmp.interarea_zeta_ratio_vsg;
  return j.dump(2) + "\n";
}

std::string comparison_text_table(const ModeComparison& cmp) {
  std::ostringstream out;
  out << "mode tracking (f in Hz, zeta in %)\n";
  char buf[96];
  std::snprintf(buf, sizeof buf, "%-14s", "mode");
  out << buf;
  for (const auto& tag : cmp.tags) {
    std::snprintf(buf, sizeof buf, " %-20s", tag.c_str());
    out << buf;
  }
  out << "\n";
  for (size_t r = 0; r < cmp.tracked_labels.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%-14s", cmp.tracked_labels[r].c_str());
    out << buf;
    for (size_t c = 0; c < cmp.tags.size(); ++c) {
      const TrackedMode& t = cmp.table[r][c];
      if (t.present)
        std::snprintf(buf, sizeof buf, " f=%6.3f z=%7.2f%%  ", t.f_hz, 100.0 * t.zeta);
      else
        std::snprintf(buf, sizeof buf, " %-20s", "--");
      out << buf;
    }
    out << "\n";
  }
  if (cmp.interarea_zeta_ratio_vsg > 0.0)
    out << "interarea zeta ratio (vsg/baseline): " << num_text(cmp.interarea_zeta_ratio_vsg)
        << "\n";
  return out.str();
}

}  // namespace vshp
