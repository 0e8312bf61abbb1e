#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "support.hpp"
#include "vahrs/measurement.hpp"
#include "vahrs/trajectory.hpp"

using namespace vahrs;

TEST_CASE("default trajectory waves at t = 0") {
  const TrajectorySpec spec = default_trajectory();
  const Vec3 w0 = omega_at(spec, 0.0);
  CHECK(w0(0) == doctest::Approx(0.0));
  CHECK(w0(1) == doctest::Approx(0.8 * std::sin(M_PI / 3)).epsilon(1e-14));
  CHECK(w0(2) == doctest::Approx(1.0 * std::sin(M_PI / 5)).epsilon(1e-14));
  const Vec3 v0 = vel_at(spec, 0.0);
  CHECK(v0(0) == doctest::Approx(1.5 * std::sin(M_PI / 4)).epsilon(1e-14));
  CHECK(v0(1) == doctest::Approx(0.0));
  CHECK(v0(2) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("vdot is the analytic derivative of vel") {
  const TrajectorySpec spec = default_trajectory();
  const double h = 1e-6;
  for (double t : {0.0, 0.37, 1.9, 8.88}) {
    const Vec3 fd = (vel_at(spec, t + h) - vel_at(spec, t - h)) / (2.0 * h);
    CHECK((vdot_at(spec, t) - fd).norm() < 1e-7);
  }
}

TEST_CASE("gen_trajectory grid and rotation validity") {
  TrajectorySpec spec = default_trajectory();
  spec.duration = 1.0;
  const std::vector<TrueState> tr = gen_trajectory(spec);
  REQUIRE(tr.size() == 1001);
  CHECK(tr[0].t == 0.0);
  CHECK(tr.back().t == doctest::Approx(1.0).epsilon(1e-12));
  for (size_t k = 0; k < tr.size(); k += 100) {
    CHECK((tr[k].R.transpose() * tr[k].R - Mat3::Identity()).norm() < 1e-13);
    CHECK((tr[k].v - vel_at(spec, tr[k].t)).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("single axis rotation matches the quadrature closed form") {
  TrajectorySpec spec;
  spec.duration = 1.0;
  spec.dt = 1e-3;
  spec.omega_waves = {Wave{0.0, 0.0, 0.0}, Wave{0.0, 0.0, 0.0},
                      Wave{1.3, 0.5, 0.0}};
  spec.vel_waves = {Wave{0.0, 0.0, 0.0}, Wave{0.0, 0.0, 0.0},
                    Wave{0.0, 0.0, 0.0}};
  const std::vector<TrueState> tr = gen_trajectory(spec);
  // integral of 1.3 sin(pi t) from 0 to 1 is 1.3 * 2 / pi
  const double angle = 1.3 * (1.0 - std::cos(M_PI * 1.0)) / M_PI;
  const Mat3 expect = exp_so3(angle * Vec3::UnitZ());
  CHECK(geodesic_angle(tr.back().R, expect) < 1e-6);
}

TEST_CASE("stationary trajectory keeps R0") {
  TrajectorySpec spec;
  spec.duration = 0.5;
  spec.dt = 1e-3;
  spec.R0 = exp_so3(Vec3(0.2, -0.1, 0.4));
  const std::vector<TrueState> tr = gen_trajectory(spec);
  for (const TrueState& s : tr) {
    CHECK((s.R - spec.R0).norm() < 1e-13);
    CHECK(s.v.norm() == 0.0);
    CHECK(s.omega.norm() == 0.0);
  }
}

TEST_CASE("gen_trajectory rejects bad steps") {
  TrajectorySpec spec = default_trajectory();
  spec.dt = 0.02;
  CHECK_THROWS_AS(gen_trajectory(spec), std::invalid_argument);
  spec.dt = 0.0;
  CHECK_THROWS_AS(gen_trajectory(spec), std::invalid_argument);
  spec.dt = 1e-3;
  spec.duration = -1.0;
  CHECK_THROWS_AS(gen_trajectory(spec), std::invalid_argument);
}

TEST_CASE("synthesized measurements satisfy the sensor model") {
  Rng rng(11);
  TrueState s;
  s.R = test::random_rotation(rng);
  s.v = rng.next_gaussian3();
  s.omega = rng.next_gaussian3();
  s.vdot = rng.next_gaussian3();
  const Vec3 m = Vec3(1.0, 0.0, 1.0).normalized();
  const double g0 = 9.81;
  const ImuSample y = synth_measurements(s, m, g0);
  CHECK((y.y_v - s.v).norm() == 0.0);
  CHECK((y.y_g - s.omega).norm() == 0.0);
  CHECK((y.y_a - (s.omega.cross(s.v) + s.vdot +
                  g0 * s.R.transpose() * Vec3::UnitZ()))
            .norm() < 1e-14);
  CHECK((y.y_m - s.R.transpose() * m).norm() < 1e-15);
  CHECK(y.y_m.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("noise is reproducible and channel ordered") {
  const NoiseSpec spec = default_noise(42);
  ImuSample clean;
  clean.y_v = Vec3(1.0, 2.0, 3.0);
  clean.y_g = Vec3(0.1, 0.2, 0.3);
  clean.y_a = Vec3(-1.0, 0.0, 9.81);
  clean.y_m = Vec3(0.7, 0.0, 0.7);
  Rng a(42), b(42);
  const ImuSample na = add_noise(clean, spec, a);
  const ImuSample nb = add_noise(clean, spec, b);
  CHECK((na.y_v - nb.y_v).norm() == 0.0);
  CHECK((na.y_m - nb.y_m).norm() == 0.0);

  // same stream drawn by hand: y_v, y_g, y_a, y_m, three gaussians each
  Rng c(42);
  const Vec3 gv = c.next_gaussian3();
  const Vec3 gg = c.next_gaussian3();
  const Vec3 ga = c.next_gaussian3();
  const Vec3 gm = c.next_gaussian3();
  CHECK((na.y_v - (clean.y_v + spec.vel.stddev * gv + spec.vel.bias)).norm() <
        1e-15);
  CHECK((na.y_g - (clean.y_g + spec.gyro.stddev * gg + spec.gyro.bias))
            .norm() < 1e-15);
  CHECK((na.y_a - (clean.y_a + spec.accel.stddev * ga + spec.accel.bias))
            .norm() < 1e-15);
  CHECK((na.y_m - (clean.y_m + spec.mag.stddev * gm + spec.mag.bias)).norm() <
        1e-15);
}

TEST_CASE("default noise magnitudes") {
  const NoiseSpec spec = default_noise(0);
  CHECK(spec.vel.stddev == doctest::Approx(0.31));
  CHECK(spec.gyro.stddev == doctest::Approx(0.1));
  CHECK(spec.accel.stddev == doctest::Approx(0.31));
  CHECK(spec.mag.stddev == doctest::Approx(0.71));
  CHECK((spec.mag.bias - Vec3(0.2, 0.2, 0.2)).norm() == doctest::Approx(0.0));
  CHECK(spec.vel.bias.norm() == 0.0);
  CHECK(spec.gyro.bias.norm() == 0.0);
  CHECK(spec.accel.bias.norm() == 0.0);
}

TEST_CASE("gaussian samples have the right first moments") {
  Rng rng(123);
  double sum = 0.0, sumsq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    sum += g;
    sumsq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("uniform doubles stay in the unit interval") {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("rng streams differ by seed") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 16; ++i) {
    if (a.next_u64() == b.next_u64()) ++same;
  }
  CHECK(same == 0);
}
