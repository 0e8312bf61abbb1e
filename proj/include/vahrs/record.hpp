#pragma once

#include <string>
#include <vector>

#include "vahrs/measurement.hpp"

namespace vahrs {

// A simulated run: truth + measurements on a shared time grid, plus a flat
// block of named per-estimator columns ("<estimator>.<field>[.<i>]").
struct RunRecord {
  std::vector<TrueState> truth;
  std::vector<ImuSample> samples;
  std::vector<std::string> est_columns;
  std::vector<std::vector<double>> est_values;  // row-major, one row per step
};

// CSV with a fixed truth/measurement header prefix
// (t, R.0..R.8 row-major, v.*, omega.*, vdot.*, y_v.*, y_g.*, y_a.*, y_m.*)
// followed by the estimator columns. Values use 17 significant digits so the
// file round-trips doubles exactly. Throws std::runtime_error on I/O failure.
void record_run(const RunRecord& rec, const std::string& path);

// Inverse of record_run. Throws std::runtime_error naming the offending row
// on malformed input (wrong column count, unparsable number, bad header).
RunRecord replay_run(const std::string& path);

}  // namespace vahrs
