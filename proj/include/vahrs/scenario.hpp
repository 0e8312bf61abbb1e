#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vahrs/measurement.hpp"
#include "vahrs/record.hpp"
#include "vahrs/trajectory.hpp"

namespace vahrs {

// Raised on malformed configuration; the message carries the field path.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class EstimatorKind {
  kTwoStep,
  kOneStep,
  kHua,
  kMartinTilt,
  kAttitude,
  kHuaAttitude,
  kMartinAttitude,
};

enum class InitPolicy { kTruth, kUndesired, kExplicit };

// Fields absent from an explicit init fall back to the truth policy.
struct ExplicitInit {
  std::optional<Vec3> xhat1;
  std::optional<Vec3> xhat2;
  std::optional<Vec3> xhat2_prime;
  std::optional<Vec3> xhat3_prime;
  std::optional<Mat3> Rhat;
};

struct EstimatorConfig {
  std::string name;
  EstimatorKind kind = EstimatorKind::kTwoStep;
  InitPolicy init = InitPolicy::kTruth;
  ExplicitInit explicit_init;
  Eigen::VectorXd alphas;  // two_step / attitude chain
  double gamma = 0.0;
  double alpha = 0.0;                            // one_step
  double k1v = 0.0, k2v = 0.0, k1r = 0.0;        // hua
  double k2r = 0.0;                              // hua_attitude
  double L = 0.0, K = 0.0, M = 0.0;              // martin
  double rho1 = 0.0, rho2 = 0.0, mu = 0.0;       // attitude
};

struct ScenarioConfig {
  TrajectorySpec trajectory;
  Vec3 marker = Vec3(1.0, 0.0, 1.0);  // world marker, normalized internally
  double g0 = 9.81;
  bool noise_enabled = false;
  NoiseSpec noise;
  double window_t0 = 2.0;
  double window_t1 = 10.0;
  double convergence_threshold = 0.05;  // rad
  double convergence_hold = 0.5;        // s
  std::vector<EstimatorConfig> estimators;
};

// Throws ConfigError naming the offending field. Unknown keys are ignored.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);

struct ReportRow {
  std::string name;
  double mean_tilt_angle_rad = std::numeric_limits<double>::quiet_NaN();
  double mean_yaw_proxy_rad = std::numeric_limits<double>::quiet_NaN();
  double convergence_time_s = std::numeric_limits<double>::quiet_NaN();
  long invalid_samples = 0;
};

struct Report {
  double window_t0 = 0.0;
  double window_t1 = 0.0;
  std::vector<ReportRow> rows;
};

struct ScenarioResult {
  RunRecord record;
  Report report;
};

// Simulates the trajectory, synthesizes (optionally noisy) measurements,
// runs every configured estimator and aggregates the report. Gain or init
// violations surface as std::invalid_argument from the observer
// constructors. Deterministic for a fixed config.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

// Dry-constructs each estimator against a placeholder state, capturing the
// gain-condition violations its constructors raise. error is empty when the
// estimator is accepted.
struct EstimatorValidation {
  std::string name;
  std::string error;
};
std::vector<EstimatorValidation> validate_estimators(const ScenarioConfig& cfg);

// Ascending by (mean tilt, mean yaw, name); NaN sorts last.
void sort_report_rows(std::vector<ReportRow>& rows);

// CSV prefixed by a "# window <t0> <t1>" comment line. Values use 17
// significant digits. Throws std::runtime_error on I/O or malformed input.
void write_report(const std::string& path, const Report& report);
Report read_report(const std::string& path);

}  // namespace vahrs
