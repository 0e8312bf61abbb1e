#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "vahrs/analysis.hpp"
#include "vahrs/record.hpp"
#include "vahrs/scenario.hpp"

using namespace vahrs;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int code = -1;
  std::string output;
};

CmdResult run_cmd(const std::string& cmd) {
  static int counter = 0;
  const fs::path log =
      fs::temp_directory_path() / ("vahrs_cmd_" + std::to_string(counter++) +
                                   "_" + std::to_string(getpid()) + ".log");
  const std::string full = cmd + " > " + log.string() + " 2>&1";
  const int rc = std::system(full.c_str());
  CmdResult r;
  r.code = (rc == -1) ? -1 : WEXITSTATUS(rc);
  std::ifstream in(log);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  fs::remove(log);
  return r;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() /
                     ("vahrs_test_" + tag + "_" + std::to_string(getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const std::string kCli = VAHRS_CLI_PATH;
const std::string kConfigDir = VAHRS_CONFIG_DIR;

// All wave amplitudes zero: the body stays at rest so truth-initialized
// observers must hold their state to round-off.
const char* kStationary =
    R"("trajectory": {"duration": 1.0, "dt": 0.001,
        "omega_waves": [{"amp": 0, "freq_hz": 1, "phase": 0},
                        {"amp": 0, "freq_hz": 1, "phase": 0},
                        {"amp": 0, "freq_hz": 1, "phase": 0}],
        "vel_waves": [{"amp": 0, "freq_hz": 1, "phase": 0},
                      {"amp": 0, "freq_hz": 1, "phase": 0},
                      {"amp": 0, "freq_hz": 1, "phase": 0}]})";

std::string stationary_cfg(const std::string& estimators,
                           const std::string& extra = "") {
  return std::string("{") + kStationary +
         R"(, "noise": "none", "window": [0.5, 1.0], "estimators": [)" +
         estimators + "]" + extra + "}";
}

int column_index(const RunRecord& rec, const std::string& name) {
  for (size_t i = 0; i < rec.est_columns.size(); ++i) {
    if (rec.est_columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

const char* kTwoStepJson =
    R"({"name": "ts", "kind": "two_step",
        "alphas": [196.2, 28.014282071829005], "gamma": 20.0})";

}  // namespace

TEST_CASE("config errors carry the field path") {
  CHECK_THROWS_AS(parse_scenario("{"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_scenario(R"({"window": [2.0, 1.0]})"), "window: need t0 < t1",
      ConfigError);
  CHECK_THROWS_WITH_AS(parse_scenario(R"({"g0": -1.0})"),
                       "g0: must be positive", ConfigError);
  CHECK_THROWS_AS(
      parse_scenario(
          R"({"estimators": [{"name": "a", "kind": "kalman"}]})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_scenario(
          R"({"estimators": [{"name": "bad name!", "kind": "one_step",
               "alpha": 30.0, "gamma": 20.0}]})"),
      ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"({"noise": 3})"), ConfigError);
  CHECK_THROWS_AS(
      parse_scenario(R"({"trajectory": {"R0": [1,1,0, 0,1,0, 0,0,1]}})"),
      ConfigError);
  // duplicate names are rejected with the index of the second occurrence
  try {
    parse_scenario(stationary_cfg(std::string(kTwoStepJson) + "," +
                                  kTwoStepJson));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("estimators[1].name") !=
          std::string::npos);
  }
}

TEST_CASE("scenario run produces a full grid and report") {
  const ScenarioConfig cfg = parse_scenario(stationary_cfg(
      std::string(kTwoStepJson) + R"(, {"name": "att", "kind": "attitude",
        "alphas": [196.2, 28.014282071829005], "gamma": 20.0,
        "rho1": 20.0, "rho2": 20.0, "mu": 0.0})"));
  const ScenarioResult res = run_scenario(cfg);
  CHECK(res.record.truth.size() == 1001);
  CHECK(res.record.samples.size() == 1001);
  CHECK(res.record.est_values.size() == 1001);
  CHECK(res.record.est_columns.size() ==
        res.record.est_values.front().size());
  REQUIRE(res.report.rows.size() == 2);
  // truth init on a stationary trajectory: errors stay at round-off
  for (const ReportRow& row : res.report.rows) {
    CHECK(row.mean_tilt_angle_rad < 1e-9);
    CHECK(row.invalid_samples == 0);
    CHECK(row.convergence_time_s == doctest::Approx(0.0));
  }
  // the attitude estimator reports a heading mean, the tilt stage does not
  const ReportRow& att = res.report.rows[0].name == "att"
                             ? res.report.rows[0]
                             : res.report.rows[1];
  const ReportRow& ts = res.report.rows[0].name == "att"
                            ? res.report.rows[1]
                            : res.report.rows[0];
  CHECK(std::isfinite(att.mean_yaw_proxy_rad));
  CHECK(att.mean_yaw_proxy_rad < 1e-9);
  CHECK(std::isnan(ts.mean_yaw_proxy_rad));
}

TEST_CASE("estimators evolve independently of the bank composition") {
  const std::string noisy = R"(, "noise": {"seed": 7})";
  const ScenarioConfig lone = parse_scenario(
      stationary_cfg(kTwoStepJson, noisy));
  const ScenarioConfig bank = parse_scenario(stationary_cfg(
      std::string(kTwoStepJson) +
          R"(, {"name": "os", "kind": "one_step", "alpha": 30.0,
            "gamma": 20.0})",
      noisy));
  const ScenarioResult a = run_scenario(lone);
  const ScenarioResult b = run_scenario(bank);
  const int ia = column_index(a.record, "ts.xhat2.0");
  const int ib = column_index(b.record, "ts.xhat2.0");
  REQUIRE(ia >= 0);
  REQUIRE(ib >= 0);
  for (size_t k = 0; k < a.record.est_values.size(); ++k) {
    for (int d = 0; d < 3; ++d) {
      CHECK(a.record.est_values[k][ia + d] ==
            b.record.est_values[k][ib + d]);
    }
  }
}

TEST_CASE("a fixed config replays bitwise") {
  const ScenarioConfig cfg = parse_scenario(
      stationary_cfg(kTwoStepJson, R"(, "noise": {"seed": 3})"));
  const ScenarioResult a = run_scenario(cfg);
  const ScenarioResult b = run_scenario(cfg);
  REQUIRE(a.record.est_values.size() == b.record.est_values.size());
  for (size_t k = 0; k < a.record.est_values.size(); ++k) {
    CHECK(a.record.est_values[k] == b.record.est_values[k]);
  }
}

TEST_CASE("undesired equilibrium init flips the unit tilt state") {
  // noise kicks the unit state off the antipodal equilibrium; the
  // instantaneous-correction state converges regardless
  const std::string cfg_text = std::string("{") + kStationary +
      R"(, "noise": {"seed": 1}, "window": [2.5, 3.0],
        "init_policy": "undesired_equilibrium",
        "estimators": [)" + kTwoStepJson + "]}";
  ScenarioConfig cfg = parse_scenario(cfg_text);
  cfg.trajectory.duration = 3.0;
  const ScenarioResult res = run_scenario(cfg);
  const int ix2 = column_index(res.record, "ts.xhat2.0");
  const int itilt = column_index(res.record, "ts.tilt_angle");
  REQUIRE(ix2 >= 0);
  REQUIRE(itilt >= 0);
  // stationary truth has R = I: the flipped init is exactly -e_z
  CHECK(res.record.est_values[0][ix2 + 0] == doctest::Approx(0.0));
  CHECK(res.record.est_values[0][ix2 + 2] == doctest::Approx(-1.0));
  CHECK(res.record.est_values[0][itilt] ==
        doctest::Approx(3.141592653589793).epsilon(1e-9));
  // escaped and converged by the end of the run
  CHECK(res.record.est_values.back()[itilt] < 0.2);
}

TEST_CASE("report files round trip including missing heading values") {
  const fs::path dir = fresh_dir("report_rt");
  Report rep;
  rep.window_t0 = 2.0;
  rep.window_t1 = 10.0;
  ReportRow a;
  a.name = "alpha";
  a.mean_tilt_angle_rad = 0.04419;
  a.mean_yaw_proxy_rad = std::numeric_limits<double>::quiet_NaN();
  a.convergence_time_s = 1.25;
  a.invalid_samples = 3;
  ReportRow b;
  b.name = "beta";
  b.mean_tilt_angle_rad = 0.1543;
  b.mean_yaw_proxy_rad = 0.2374;
  b.convergence_time_s = std::numeric_limits<double>::quiet_NaN();
  b.invalid_samples = 0;
  rep.rows = {a, b};
  const std::string path = (dir / "report.csv").string();
  write_report(path, rep);
  const Report back = read_report(path);
  CHECK(back.window_t0 == rep.window_t0);
  CHECK(back.window_t1 == rep.window_t1);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0].name == "alpha");
  CHECK(back.rows[0].mean_tilt_angle_rad == a.mean_tilt_angle_rad);
  CHECK(std::isnan(back.rows[0].mean_yaw_proxy_rad));
  CHECK(back.rows[0].convergence_time_s == 1.25);
  CHECK(back.rows[0].invalid_samples == 3);
  CHECK(back.rows[1].mean_yaw_proxy_rad == 0.2374);
  CHECK(std::isnan(back.rows[1].convergence_time_s));
  CHECK_THROWS_AS(read_report((dir / "missing.csv").string()),
                  std::runtime_error);
}

TEST_CASE("report rows sort by tilt then heading then name") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<ReportRow> rows(4);
  rows[0].name = "d";
  rows[0].mean_tilt_angle_rad = nan;
  rows[1].name = "c";
  rows[1].mean_tilt_angle_rad = 0.2;
  rows[1].mean_yaw_proxy_rad = 0.1;
  rows[2].name = "b";
  rows[2].mean_tilt_angle_rad = 0.2;
  rows[2].mean_yaw_proxy_rad = nan;
  rows[3].name = "a";
  rows[3].mean_tilt_angle_rad = 0.1;
  sort_report_rows(rows);
  CHECK(rows[0].name == "a");
  CHECK(rows[1].name == "c");   // finite heading beats NaN at equal tilt
  CHECK(rows[2].name == "b");
  CHECK(rows[3].name == "d");   // NaN tilt sorts last
}

TEST_CASE("cli simulate writes a deterministic measurement log") {
  const fs::path dir = fresh_dir("cli_sim");
  const std::string cfg = kConfigDir + std::string("/default.json");
  const CmdResult r1 = run_cmd(kCli + " simulate --config " + cfg +
                               " --out " + (dir / "a").string());
  CHECK(r1.code == 0);
  const RunRecord rec = replay_run((dir / "a" / "run.csv").string());
  CHECK(rec.truth.size() == 10001);
  CHECK(rec.est_columns.empty());
  // noiseless marker measurements keep unit norm
  CHECK(rec.samples[5000].y_m.norm() == doctest::Approx(1.0).epsilon(1e-12));
  const CmdResult r2 = run_cmd(kCli + " simulate --config " + cfg +
                               " --out " + (dir / "b").string());
  CHECK(r2.code == 0);
  CHECK(slurp(dir / "a" / "run.csv") == slurp(dir / "b" / "run.csv"));
}

TEST_CASE("cli run emits artifacts and a readable table") {
  const fs::path dir = fresh_dir("cli_run");
  spit(dir / "cfg.json", stationary_cfg(kTwoStepJson));
  const CmdResult r = run_cmd(kCli + " run --config " +
                              (dir / "cfg.json").string() + " --out " +
                              (dir / "out").string());
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "out" / "run.csv"));
  CHECK(fs::exists(dir / "out" / "report.csv"));
  CHECK(fs::exists(dir / "out" / "plot_traces.py"));
  CHECK(r.output.find("window") != std::string::npos);
  CHECK(r.output.find("ts") != std::string::npos);
  const Report rep = read_report((dir / "out" / "report.csv").string());
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].mean_tilt_angle_rad < 1e-9);
}

TEST_CASE("cli run rejects out-of-condition gains up front") {
  const fs::path dir = fresh_dir("cli_badgains");
  // one_step needs gamma g0 <= alpha^2; hua with k2v = 0 needs
  // k1r g0 <= k1v^2 -- both violated here
  spit(dir / "cfg.json", stationary_cfg(
      R"({"name": "weak", "kind": "one_step", "alpha": 1.0, "gamma": 1.0},
         {"name": "hot", "kind": "hua", "k1v": 1.0, "k2v": 0.0,
          "k1r": 1.0})"));
  const CmdResult r = run_cmd(kCli + " run --config " +
                              (dir / "cfg.json").string() + " --out " +
                              (dir / "out").string());
  CHECK(r.code == 1);
  CHECK(r.output.find("weak") != std::string::npos);
  CHECK(r.output.find("hot") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "run.csv"));
}

TEST_CASE("cli surfaces missing files and bad configs as exit 1") {
  const CmdResult missing =
      run_cmd(kCli + " run --config /nonexistent/cfg.json --out /tmp/x");
  CHECK(missing.code == 1);
  const fs::path dir = fresh_dir("cli_badcfg");
  spit(dir / "cfg.json", R"({"window": [5.0, 1.0]})");
  const CmdResult bad = run_cmd(kCli + " simulate --config " +
                                (dir / "cfg.json").string() + " --out " +
                                (dir / "out").string());
  CHECK(bad.code == 1);
  CHECK(bad.output.find("config error") != std::string::npos);
  CHECK(bad.output.find("window") != std::string::npos);
}

TEST_CASE("cli compare merges reports and flags window mismatches") {
  const fs::path dir = fresh_dir("cli_cmp");
  Report rep;
  rep.window_t0 = 2.0;
  rep.window_t1 = 10.0;
  ReportRow row;
  row.name = "ts";
  row.mean_tilt_angle_rad = 0.05;
  rep.rows = {row};
  write_report((dir / "a.csv").string(), rep);
  row.mean_tilt_angle_rad = 0.02;
  rep.rows = {row};
  write_report((dir / "b.csv").string(), rep);
  const CmdResult ok = run_cmd(kCli + " compare " + (dir / "a.csv").string() +
                               " " + (dir / "b.csv").string());
  CHECK(ok.code == 0);
  CHECK(ok.output.find("window") != std::string::npos);
  // the better run sorts first
  CHECK(ok.output.find("b.csv") < ok.output.find("a.csv"));
  rep.window_t1 = 8.0;
  write_report((dir / "c.csv").string(), rep);
  const CmdResult bad = run_cmd(kCli + " compare " +
                                (dir / "a.csv").string() + " " +
                                (dir / "c.csv").string());
  CHECK(bad.code == 1);
  CHECK(bad.output.find("window") != std::string::npos);
}

TEST_CASE("seed override steers the noise draw") {
  const fs::path dir = fresh_dir("cli_seed");
  spit(dir / "cfg.json",
       stationary_cfg(kTwoStepJson, R"(, "noise": {"seed": 1})"));
  const std::string base = kCli + " simulate --config " +
                           (dir / "cfg.json").string() + " --out ";
  CHECK(run_cmd(base + (dir / "s1").string()).code == 0);
  CHECK(run_cmd("VAHRS_SEED=99 " + base + (dir / "s99").string()).code == 0);
  CHECK(run_cmd("VAHRS_SEED=1 " + base + (dir / "s1b").string()).code == 0);
  const std::string a = slurp(dir / "s1" / "run.csv");
  CHECK(a != slurp(dir / "s99" / "run.csv"));
  CHECK(a == slurp(dir / "s1b" / "run.csv"));
  const CmdResult garbage =
      run_cmd("VAHRS_SEED=abc " + base + (dir / "junk").string());
  CHECK(garbage.code == 1);
  CHECK(garbage.output.find("VAHRS_SEED") != std::string::npos);
}

TEST_CASE("cli stability check passes on the shipped default config") {
  const CmdResult r = run_cmd(kCli + " stability-check --config " +
                              kConfigDir + std::string("/default.json"));
  CHECK(r.code == 0);
  CHECK(r.output.find("SUITE PASS") != std::string::npos);
  CHECK(r.output.find("FAIL") == std::string::npos);
}
