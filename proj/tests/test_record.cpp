#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "vahrs/measurement.hpp"
#include "vahrs/record.hpp"

using namespace vahrs;

namespace {

std::string temp_path(const char* name) {
  return std::string("vahrs_test_") + name + ".csv";
}

RunRecord small_record() {
  Rng rng(20);
  RunRecord rec;
  for (int k = 0; k < 3; ++k) {
    TrueState s;
    s.t = 1e-3 * k;
    s.R = test::random_rotation(rng);
    s.v = rng.next_gaussian3();
    s.omega = rng.next_gaussian3();
    s.vdot = rng.next_gaussian3();
    rec.truth.push_back(s);
    rec.samples.push_back(
        synth_measurements(s, Vec3(1.0, 0.0, 1.0).normalized(), 9.81));
  }
  rec.est_columns = {"a.x", "a.valid"};
  rec.est_values = {{0.1, 1.0},
                    {1e-300, 0.0},
                    {std::nan(""), 1.0}};
  return rec;
}

}  // namespace

TEST_CASE("record round trip is exact") {
  const RunRecord rec = small_record();
  const std::string path = temp_path("roundtrip");
  record_run(rec, path);
  const RunRecord back = replay_run(path);
  REQUIRE(back.truth.size() == rec.truth.size());
  REQUIRE(back.est_columns == rec.est_columns);
  for (size_t k = 0; k < rec.truth.size(); ++k) {
    CHECK(back.truth[k].t == rec.truth[k].t);
    CHECK((back.truth[k].R - rec.truth[k].R).norm() == 0.0);
    CHECK((back.truth[k].v - rec.truth[k].v).norm() == 0.0);
    CHECK((back.truth[k].omega - rec.truth[k].omega).norm() == 0.0);
    CHECK((back.truth[k].vdot - rec.truth[k].vdot).norm() == 0.0);
    CHECK((back.samples[k].y_a - rec.samples[k].y_a).norm() == 0.0);
    CHECK((back.samples[k].y_m - rec.samples[k].y_m).norm() == 0.0);
  }
  CHECK(back.est_values[0][0] == 0.1);
  CHECK(back.est_values[1][0] == 1e-300);
  CHECK(std::isnan(back.est_values[2][0]));
  CHECK(back.est_values[2][1] == 1.0);
  std::remove(path.c_str());
}

TEST_CASE("replay rejects a foreign header") {
  const std::string path = temp_path("badheader");
  {
    std::ofstream f(path);
    f << "time,x,y\n0,1,2\n";
  }
  CHECK_THROWS_AS(replay_run(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("replay names the offending row") {
  const RunRecord rec = small_record();
  const std::string path = temp_path("badrow");
  record_run(rec, path);
  {
    std::ofstream f(path, std::ios::app);
    f << "1,2,3\n";
  }
  try {
    replay_run(path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("row 4") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("replay of a missing file throws") {
  CHECK_THROWS_AS(replay_run("no_such_dir/nothing.csv"), std::runtime_error);
}
