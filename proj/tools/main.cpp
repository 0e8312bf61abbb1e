#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vahrs/analysis.hpp"
#include "vahrs/attitude_observers.hpp"
#include "vahrs/companion.hpp"
#include "vahrs/record.hpp"
#include "vahrs/rng.hpp"
#include "vahrs/scenario.hpp"
#include "vahrs/tilt_observers.hpp"

namespace {

using namespace vahrs;

void apply_seed_env(ScenarioConfig& cfg) {
  const char* env = std::getenv("VAHRS_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  const unsigned long long seed = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') {
    throw ConfigError(std::string("VAHRS_SEED: not an integer: ") + env);
  }
  cfg.noise.seed = seed;
}

void print_report_table(const Report& rep) {
  std::printf("# window %g %g\n", rep.window_t0, rep.window_t1);
  std::printf("%-16s %14s %14s %14s %8s\n", "estimator", "mean_tilt[rad]",
              "mean_yaw[rad]", "conv_time[s]", "invalid");
  for (const ReportRow& r : rep.rows) {
    std::printf("%-16s %14.6g %14.6g %14.6g %8ld\n", r.name.c_str(),
                r.mean_tilt_angle_rad, r.mean_yaw_proxy_rad,
                r.convergence_time_s, r.invalid_samples);
  }
}

const char* kPlotStub = R"(#!/usr/bin/env python3
"""Quick look at a run: tilt error traces plus the report table."""
import csv
import os.path
import sys

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "run.csv")) as f:
    rows = list(csv.reader(f))
header, data = rows[0], rows[1:]
t = [float(r[header.index("t")]) for r in data]
fig, ax = plt.subplots()
for i, name in enumerate(header):
    if name.endswith(".tilt_angle"):
        ax.plot(t, [float(r[i]) for r in data], label=name[: -len(".tilt_angle")])
ax.set_xlabel("t [s]")
ax.set_ylabel("tilt error [rad]")
ax.legend()
ax.grid(True)
plt.savefig(os.path.join(here, "tilt_traces.png"), dpi=150)
print("wrote", os.path.join(here, "tilt_traces.png"))
)";

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  ScenarioConfig cfg = load_scenario(config_path);
  apply_seed_env(cfg);
  cfg.estimators.clear();
  const ScenarioResult res = run_scenario(cfg);
  std::filesystem::create_directories(out_dir);
  const std::string run_path = out_dir + "/run.csv";
  record_run(res.record, run_path);
  std::printf("wrote %s (%zu rows)\n", run_path.c_str(),
              res.record.truth.size());
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  ScenarioConfig cfg = load_scenario(config_path);
  apply_seed_env(cfg);
  bool rejected = false;
  for (const EstimatorValidation& v : validate_estimators(cfg)) {
    if (!v.error.empty()) {
      std::fprintf(stderr, "config error: estimator %s: %s\n", v.name.c_str(),
                   v.error.c_str());
      rejected = true;
    }
  }
  if (rejected) return 1;
  const ScenarioResult res = run_scenario(cfg);
  std::filesystem::create_directories(out_dir);
  record_run(res.record, out_dir + "/run.csv");
  write_report(out_dir + "/report.csv", res.report);
  {
    std::ofstream plot(out_dir + "/plot_traces.py");
    plot << kPlotStub;
  }
  print_report_table(res.report);
  std::printf("wrote %s/run.csv, %s/report.csv, %s/plot_traces.py\n",
              out_dir.c_str(), out_dir.c_str(), out_dir.c_str());
  return 0;
}

int cmd_compare(const std::vector<std::string>& paths) {
  struct Tagged {
    ReportRow row;
    std::string source;
  };
  std::vector<Tagged> rows;
  Report first;
  for (size_t i = 0; i < paths.size(); ++i) {
    const Report rep = read_report(paths[i]);
    if (i == 0) {
      first = rep;
    } else if (rep.window_t0 != first.window_t0 ||
               rep.window_t1 != first.window_t1) {
      throw std::runtime_error("compare: window mismatch between " + paths[0] +
                               " and " + paths[i]);
    }
    const std::string base = std::filesystem::path(paths[i]).filename();
    for (const ReportRow& r : rep.rows) rows.push_back({r, base});
  }
  const auto key = [](double x) {
    return std::isnan(x) ? std::numeric_limits<double>::infinity() : x;
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const Tagged& a,
                                                 const Tagged& b) {
    const double at = key(a.row.mean_tilt_angle_rad);
    const double bt = key(b.row.mean_tilt_angle_rad);
    if (at != bt) return at < bt;
    const double ay = key(a.row.mean_yaw_proxy_rad);
    const double by = key(b.row.mean_yaw_proxy_rad);
    if (ay != by) return ay < by;
    return a.row.name < b.row.name;
  });
  std::printf("# window %.17g %.17g\n", first.window_t0, first.window_t1);
  std::printf(
      "estimator,source,mean_tilt_angle_rad,mean_yaw_proxy_rad,"
      "convergence_time_s,invalid_samples\n");
  for (const Tagged& r : rows) {
    std::printf("%s,%s,%.17g,%.17g,%.17g,%ld\n", r.row.name.c_str(),
                r.source.c_str(), r.row.mean_tilt_angle_rad,
                r.row.mean_yaw_proxy_rad, r.row.convergence_time_s,
                r.row.invalid_samples);
  }
  return 0;
}

// ---- stability battery ----

struct Battery {
  bool failed = false;

  void result(bool ok, const char* name, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    if (!ok) failed = true;
  }
};

std::string fmtg(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

double fit_log_slope(const std::vector<double>& t,
                     const std::vector<double>& lognorm) {
  const size_t n = t.size();
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (size_t i = 0; i < n; ++i) {
    st += t[i];
    sy += lognorm[i];
    stt += t[i] * t[i];
    sty += t[i] * lognorm[i];
  }
  const double d = static_cast<double>(n) * stt - st * st;
  return (static_cast<double>(n) * sty - st * sy) / d;
}

Eigen::VectorXd binomial_gains(int n, double beta) {
  Eigen::VectorXd alphas(n);
  for (int k = 0; k < n; ++k) {
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
    alphas(k) = c * std::pow(beta, n - k);
  }
  return alphas;
}

Vec3 random_unit(Rng& rng) {
  Vec3 v = rng.next_gaussian3();
  while (v.norm() < 1e-3) v = rng.next_gaussian3();
  return v / v.norm();
}

void check_lyapunov_residual(Battery& b) {
  const double beta = 2.0 * std::sqrt(20.0 * 9.81);
  double worst = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= 4; ++n) {
    const CompanionSystem sys = companion(binomial_gains(n, beta));
    const Eigen::MatrixXd P = solve_lyapunov(sys);
    const Eigen::MatrixXd res = sys.M_alpha.transpose() * P + P * sys.M_alpha +
                                Eigen::MatrixXd::Identity(3 * n, 3 * n);
    worst = std::max(worst, res.norm());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
  b.result(worst <= 1e-8 && min_eig > 0.0, "lyapunov-residual",
           "orders 1..4, max residual " + fmtg(worst) + ", min eig " +
               fmtg(min_eig));
}

void check_decay_rate(Battery& b, double alpha1, double gamma, double g0) {
  TrajectorySpec spec;
  spec.duration = 0.5;
  spec.dt = 1e-3;
  for (auto& w : spec.omega_waves) w = Wave{0.0, 0.0, 0.0};
  for (auto& w : spec.vel_waves) w = Wave{0.0, 0.0, 0.0};
  const std::vector<TrueState> states = gen_trajectory(spec);
  Eigen::VectorXd a1(1);
  a1 << alpha1;
  const TwoStepGains gains = make_two_step_gains(a1, gamma);
  TwoStepState st =
      make_two_step_state(1, Vec3(10.0, 0.0, 0.0), Vec3::Zero(), Vec3::UnitZ());
  // Fit only while the error is well above the double-precision floor: after
  // ~20 decay constants the norm has shrunk by e^-20 ~ 2e-9 and further
  // samples just measure roundoff, which flattens the fitted slope.
  const double t_end = std::min(0.4, 0.02 + 20.0 / alpha1);
  std::vector<double> ts, ys;
  for (size_t k = 0; k < states.size(); ++k) {
    if (k > 0 && states[k].t >= 0.02 && states[k].t <= t_end) {
      const Eigen::VectorXd psi =
          tilt_error_psi(states[k], st, gains, g0);
      ts.push_back(states[k].t);
      ys.push_back(std::log(psi.norm()));
    }
    if (k + 1 < states.size()) {
      st = two_step_step(st, gains,
                         synth_measurements(states[k], Vec3::UnitX(), g0), g0,
                         spec.dt);
    }
  }
  const double slope = fit_log_slope(ts, ys);
  const double rel = std::abs(slope + alpha1) / alpha1;
  b.result(rel <= 0.01, "tilt-decay-rate",
           "n=1 fitted slope " + fmtg(slope) + " vs -alpha1 " +
               fmtg(-alpha1) + " (rel err " + fmtg(rel) + ")");
}

void check_tilt_error_flow(Battery& b, double gamma, double g0) {
  const double beta = 2.0 * std::sqrt(gamma * g0);
  Rng rng(12345);
  double worst = 0.0;
  for (int n = 1; n <= 2; ++n) {
    const Eigen::VectorXd alphas = binomial_gains(n, beta);
    const CompanionSystem sys = companion(alphas);
    const Eigen::MatrixXd P = solve_lyapunov(sys);
    for (int trial = 0; trial < 5; ++trial) {
      TiltErrorState xi;
      xi.psi = Eigen::VectorXd::Zero(3 * n);
      for (int i = 0; i < 3 * n; ++i) xi.psi(i) = 2.0 * rng.next_gaussian();
      xi.z2 = Vec3::UnitZ() - random_unit(rng);
      const double dt = 5e-4;
      double v_prev = (n == 1) ? lyapunov_v1(xi.psi.head<3>(), xi.z2,
                                             alphas(0), gamma)
                               : lyapunov_vn(xi.psi, xi.z2, P, gamma);
      for (int k = 0; k < 4000; ++k) {
        xi = tilt_error_step(xi, alphas, gamma, dt);
        const double v = (n == 1) ? lyapunov_v1(xi.psi.head<3>(), xi.z2,
                                                alphas(0), gamma)
                                  : lyapunov_vn(xi.psi, xi.z2, P, gamma);
        if (v_prev > 0.0) worst = std::max(worst, (v - v_prev) / v_prev);
        v_prev = v;
      }
    }
  }
  b.result(worst <= 1e-8, "tilt-lyapunov-monotone",
           "V1/Vn error flows, worst per-step rise " + fmtg(worst));
}

void check_one_step_vdot(Battery& b, double alpha, double gamma, double g0) {
  Rng rng(777);
  const double G0 = gamma * g0 / (alpha * alpha);
  double worst_pos = -std::numeric_limits<double>::infinity();
  double worst_gap = 0.0;
  for (int i = 0; i < 10000; ++i) {
    OneStepErrorState xi;
    xi.z2 = Vec3::UnitZ() - random_unit(rng);
    xi.z1 = std::pow(10.0, -1.0 + 2.0 * rng.next_double()) *
            rng.next_gaussian3();
    const Vec3 u = Vec3::UnitZ() - xi.z2;
    const Vec3 w = alpha * xi.z1 + g0 * xi.z2;
    const Vec3 ez_x_z2 = Vec3::UnitZ().cross(xi.z2);
    const double formula = -alpha * (1.0 - G0) * w.squaredNorm() -
                           alpha * g0 * g0 * G0 * ez_x_z2.squaredNorm() -
                           alpha * G0 * std::pow(w.dot(u), 2);
    const OneStepErrorState d = one_step_error_rhs(xi, alpha, gamma, g0);
    const double numeric =
        w.dot(alpha * d.z1 + g0 * d.z2) + g0 * g0 * xi.z2.dot(d.z2);
    const double scale =
        alpha * w.squaredNorm() + alpha * g0 * g0 * xi.z2.squaredNorm() + 1.0;
    worst_pos = std::max(worst_pos, formula / scale);
    worst_gap = std::max(worst_gap, std::abs(formula - numeric) / scale);
  }
  b.result(worst_pos <= 1e-15 && worst_gap <= 1e-9, "one-step-vdot",
           "10^4 states, max formula/scale " + fmtg(worst_pos) +
               ", max |formula-numeric|/scale " + fmtg(worst_gap));
}

void check_attitude_vdot(Battery& b, double rho1, double rho2, double mu,
                         double alpha1, const Vec3& m_unit) {
  const Wrho w = build_wrho(rho1, rho2, m_unit);
  Rng rng(4242);
  double worst_bound = -std::numeric_limits<double>::infinity();
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    QuatErrorState xi;
    xi.q = Quat(rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian(),
                rng.next_gaussian());
    while (xi.q.norm() < 1e-3) xi.q(0) = rng.next_gaussian();
    xi.q.normalize();
    xi.z_p1 = 3.0 * rng.next_gaussian3();
    const Vec3 qv = xi.q.tail<3>();
    const Vec3 varpi =
        (xi.q(0) * Mat3::Identity() - skew(qv)) * (w.matrix * qv);
    const double bound = -2.0 * rho1 * rho1 * xi.z_p1.squaredNorm() -
                         4.0 * varpi.squaredNorm() +
                         2.0 * rho1 * varpi.norm() * xi.z_p1.norm();
    const QuatErrorState d = quat_error_rhs(xi, rho1, rho2, mu, alpha1,
                                            w.matrix);
    const double vdot = 2.0 * (rho1 * rho1 / alpha1) *
                            xi.z_p1.dot(d.z_p1) +
                        4.0 * qv.dot(w.matrix * Vec3(d.q.tail<3>()));
    const double scale = rho1 * rho1 * xi.z_p1.squaredNorm() +
                         4.0 * varpi.squaredNorm() + 1.0;
    worst_bound = std::max(worst_bound, bound / scale);
    worst_excess = std::max(worst_excess, (vdot - bound) / scale);
  }
  b.result(worst_bound <= 1e-15 && worst_excess <= 1e-9, "attitude-vdot",
           "10^4 states, max bound/scale " + fmtg(worst_bound) +
               ", max (vdot-bound)/scale " + fmtg(worst_excess));
}

void check_attitude_v_monotone(Battery& b, double rho1, double rho2,
                               double mu, double alpha1, const Vec3& m_unit) {
  const Wrho w = build_wrho(rho1, rho2, m_unit);
  Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    QuatErrorState xi;
    xi.q = Quat(rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian(),
                rng.next_gaussian());
    xi.q.normalize();
    xi.z_p1 = 2.0 * rng.next_gaussian3();
    const double dt = 5e-4;
    double v_prev = lyapunov_att(xi.z_p1, xi.q.tail<3>(), w.matrix, rho1,
                                 alpha1);
    for (int k = 0; k < 4000; ++k) {
      xi = quat_error_step(xi, rho1, rho2, mu, alpha1, w.matrix, dt, true);
      const double v = lyapunov_att(xi.z_p1, xi.q.tail<3>(), w.matrix, rho1,
                                    alpha1);
      if (v_prev > 0.0) worst = std::max(worst, (v - v_prev) / v_prev);
      v_prev = v;
    }
  }
  b.result(worst <= 1e-8, "attitude-lyapunov-monotone",
           "quat error flows, worst per-step rise " + fmtg(worst));
}

void check_equilibrium_hold(Battery& b, double gamma) {
  const double beta = 2.0 * std::sqrt(gamma * 9.81);
  Eigen::VectorXd alphas(1);
  alphas << beta;
  double worst = 0.0;
  for (int which = 0; which < 2; ++which) {
    TiltErrorState xi;
    xi.psi = Eigen::VectorXd::Zero(3);
    xi.z2 = which == 0 ? Vec3::Zero() : Vec3(0.0, 0.0, 2.0);
    const Vec3 target = xi.z2;
    for (int k = 0; k < 4000; ++k) {
      xi = tilt_error_step(xi, alphas, gamma, 5e-4);
      worst = std::max(worst, (xi.z2 - target).norm() + xi.psi.norm());
    }
  }
  b.result(worst <= 1e-6, "equilibrium-hold",
           "origin and (0, 2e_z) over 2 s, max drift " + fmtg(worst));
}

void check_instability(Battery& b, double rho1, double rho2, double mu,
                       double alpha1, const Vec3& m_unit) {
  const Wrho w = build_wrho(rho1, rho2, m_unit);
  double min_max_re = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= 3; ++j) {
    const LinearizationA lin = linearization_A(w, j, mu, alpha1);
    min_max_re = std::min(min_max_re, lin.eigenvalues.real().maxCoeff());
  }
  b.result(min_max_re > 0.0, "instability-certificate",
           "min over j of max Re(eig) " + fmtg(min_max_re));
}

void check_manifold_drift(Battery& b, const ScenarioConfig& cfg_in,
                          const std::vector<EstimatorValidation>& vals) {
  ScenarioConfig cfg = cfg_in;
  cfg.noise_enabled = false;
  cfg.trajectory.duration = std::min(cfg.trajectory.duration, 2.0);
  std::vector<EstimatorConfig> kept;
  for (size_t i = 0; i < cfg.estimators.size(); ++i) {
    if (vals[i].error.empty()) kept.push_back(cfg.estimators[i]);
  }
  cfg.estimators = kept;
  if (cfg.estimators.empty()) {
    b.result(true, "manifold-drift", "no accepted estimators to run");
    return;
  }
  const ScenarioResult res = run_scenario(cfg);
  const std::vector<std::string>& cols = res.record.est_columns;
  double worst = 0.0;
  for (size_t c = 0; c < cols.size(); ++c) {
    const bool x2_col = cols[c].size() > 8 &&
                        cols[c].rfind(".xhat2.0") == cols[c].size() - 8;
    const bool rhat_col = cols[c].size() > 7 &&
                          cols[c].rfind(".Rhat.0") == cols[c].size() - 7;
    if (!x2_col && !rhat_col) continue;
    for (const std::vector<double>& row : res.record.est_values) {
      if (x2_col) {
        const Vec3 x2(row[c], row[c + 1], row[c + 2]);
        worst = std::max(worst, std::abs(x2.norm() - 1.0));
      } else {
        Mat3 R;
        for (int i = 0; i < 9; ++i) R(i / 3, i % 3) = row[c + i];
        worst = std::max(
            worst, (R.transpose() * R - Mat3::Identity()).norm());
      }
    }
  }
  b.result(worst <= 1e-9, "manifold-drift",
           "unit/SO(3) drift over " + fmtg(cfg.trajectory.duration) +
               " s run: " + fmtg(worst));
}

int cmd_stability(const std::string& config_path) {
  const ScenarioConfig cfg = load_scenario(config_path);
  const Vec3 m_unit = normalize_s2(cfg.marker);
  const std::vector<EstimatorValidation> vals = validate_estimators(cfg);
  for (const EstimatorValidation& v : vals) {
    if (!v.error.empty()) {
      std::printf("INFO rejected gains %s: %s\n", v.name.c_str(),
                  v.error.c_str());
    }
  }

  double gamma = 20.0;
  double alpha1 = 2.0 * std::sqrt(gamma * cfg.g0);
  double alpha_one = alpha1;
  double rho1 = 20.0, rho2 = 20.0, mu = 0.0, att_alpha1 = alpha1;
  for (size_t i = 0; i < cfg.estimators.size(); ++i) {
    if (!vals[i].error.empty()) continue;
    const EstimatorConfig& e = cfg.estimators[i];
    if (e.kind == EstimatorKind::kTwoStep) {
      alpha1 = e.alphas(0);
      gamma = e.gamma;
      break;
    }
  }
  for (size_t i = 0; i < cfg.estimators.size(); ++i) {
    if (!vals[i].error.empty()) continue;
    if (cfg.estimators[i].kind == EstimatorKind::kOneStep) {
      alpha_one = cfg.estimators[i].alpha;
      break;
    }
  }
  for (size_t i = 0; i < cfg.estimators.size(); ++i) {
    if (!vals[i].error.empty()) continue;
    const EstimatorConfig& e = cfg.estimators[i];
    if (e.kind == EstimatorKind::kAttitude && e.rho2 > 0.0) {
      rho1 = e.rho1;
      rho2 = e.rho2;
      mu = e.mu;
      att_alpha1 = e.alphas(0);
      break;
    }
  }

  Battery b;
  check_lyapunov_residual(b);
  check_decay_rate(b, alpha1, gamma, cfg.g0);
  check_tilt_error_flow(b, gamma, cfg.g0);
  check_one_step_vdot(b, alpha_one, std::min(gamma, alpha_one * alpha_one /
                                                        cfg.g0),
                      cfg.g0);
  check_attitude_vdot(b, rho1, rho2, mu, att_alpha1, m_unit);
  check_attitude_v_monotone(b, rho1, rho2, mu, att_alpha1, m_unit);
  check_equilibrium_hold(b, gamma);
  check_instability(b, rho1, rho2, mu, att_alpha1, m_unit);
  check_manifold_drift(b, cfg, vals);
  std::printf("%s\n", b.failed ? "SUITE FAIL" : "SUITE PASS");
  return b.failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"velocity-aided tilt and attitude observer bench"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::string> report_paths;

  CLI::App* sim = app.add_subcommand(
      "simulate", "generate ground truth and measurements as CSV");
  sim->add_option("--config", config_path, "scenario JSON path")->required();
  sim->add_option("--out", out_dir, "output directory")->required();

  CLI::App* run = app.add_subcommand(
      "run", "run the configured estimator bank and write run + report CSV");
  run->add_option("--config", config_path, "scenario JSON path")->required();
  run->add_option("--out", out_dir, "output directory")->required();

  CLI::App* cmp = app.add_subcommand(
      "compare", "merge report CSVs into one ranking (stdout)");
  cmp->add_option("reports", report_paths, "report CSV paths")
      ->required()
      ->expected(-1);

  CLI::App* stab = app.add_subcommand(
      "stability-check", "run the stability/property battery");
  stab->add_option("--config", config_path, "scenario JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_dir);
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (cmp->parsed()) return cmd_compare(report_paths);
    if (stab->parsed()) return cmd_stability(config_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
