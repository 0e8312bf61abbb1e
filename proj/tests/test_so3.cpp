#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "support.hpp"
#include "vahrs/so3.hpp"

using namespace vahrs;

TEST_CASE("skew identities on random inputs") {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const Vec3 v = rng.next_gaussian3();
    const Vec3 w = rng.next_gaussian3();
    const Mat3 R = test::random_rotation(rng);
    CHECK(check_skew_identities(v, w, R));
    CHECK((skew(v) * w - v.cross(w)).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("exp_so3 closed form about a coordinate axis") {
  const double th = 0.7;
  const Mat3 R = exp_so3(th * Vec3::UnitZ());
  CHECK(R(0, 0) == doctest::Approx(std::cos(th)).epsilon(1e-14));
  CHECK(R(1, 0) == doctest::Approx(std::sin(th)).epsilon(1e-14));
  CHECK(R(0, 1) == doctest::Approx(-std::sin(th)).epsilon(1e-14));
  CHECK(R(2, 2) == doctest::Approx(1.0));
  CHECK(exp_so3(Vec3::Zero()).isApprox(Mat3::Identity(), 1e-16));
}

TEST_CASE("exp_so3 is a rotation and inverts by negation") {
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const Vec3 w = 3.0 * rng.next_gaussian3();
    const Mat3 R = exp_so3(w);
    CHECK((R.transpose() * R - Mat3::Identity()).norm() < 1e-13);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((exp_so3(-w) - R.transpose()).norm() < 1e-13);
  }
}

TEST_CASE("exp_so3 small angle branch matches the series") {
  for (double th : {1e-12, 1e-8, 1e-5}) {
    const Vec3 w = th * Vec3(1.0, 2.0, 2.0).normalized();
    const Mat3 R = exp_so3(w);
    const Mat3 series = Mat3::Identity() + skew(w) + 0.5 * skew(w) * skew(w);
    CHECK((R - series).norm() < 1e-15 + th * th * th);
    CHECK((R.transpose() * R - Mat3::Identity()).norm() < 1e-15);
  }
}

TEST_CASE("project_so3 restores a perturbed rotation") {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Mat3 R = test::random_rotation(rng);
    Mat3 M = R;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) M(r, c) += 1e-4 * rng.next_gaussian();
    const Mat3 P = project_so3(M);
    CHECK((P.transpose() * P - Mat3::Identity()).norm() < 1e-14);
    CHECK(P.determinant() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(geodesic_angle(P, R) < 1e-3);
    CHECK((project_so3(P) - P).norm() < 1e-15);
  }
  CHECK_THROWS_AS(project_so3(Mat3::Zero()), std::domain_error);
}

TEST_CASE("normalize_s2 rejects near-zero input") {
  CHECK(normalize_s2(Vec3(0.0, 3.0, 4.0)).isApprox(Vec3(0.0, 0.6, 0.8)));
  CHECK_THROWS_AS(normalize_s2(Vec3(1e-12, 0.0, 0.0)), std::domain_error);
}

TEST_CASE("quaternion product matches rotation composition") {
  Rng rng(4);
  for (int i = 0; i < 30; ++i) {
    const Quat a = quat_normalize(
        Quat(rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian(),
             rng.next_gaussian()));
    const Quat b = quat_normalize(
        Quat(rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian(),
             rng.next_gaussian()));
    CHECK((quat_to_rot(quat_mul(a, b)) - quat_to_rot(a) * quat_to_rot(b))
              .norm() < 1e-13);
    const Quat id = quat_mul(a, quat_conj(a));
    CHECK(id(0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(id.tail<3>().norm() < 1e-13);
  }
}

TEST_CASE("quaternion of a coordinate axis rotation") {
  const double th = 1.1;
  const Quat q(std::cos(th / 2), 0.0, 0.0, std::sin(th / 2));
  CHECK((quat_to_rot(q) - exp_so3(th * Vec3::UnitZ())).norm() < 1e-14);
}

TEST_CASE("rot_to_quat round trip with positive scalar part") {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const Mat3 R = test::random_rotation(rng);
    const Quat q = rot_to_quat(R);
    CHECK(q(0) >= 0.0);
    CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK((quat_to_rot(q) - R).norm() < 1e-12);
  }
  CHECK_THROWS_AS(rot_to_quat(2.0 * Mat3::Identity()), std::domain_error);
}

TEST_CASE("rot_to_quat handles trace minus one rotations") {
  for (int axis = 0; axis < 3; ++axis) {
    const Mat3 R = exp_so3(M_PI * Vec3::Unit(axis));
    const Quat q = rot_to_quat(R);
    CHECK((quat_to_rot(q) - R).norm() < 1e-12);
  }
}

TEST_CASE("triad reconstructs the rotation exactly") {
  Rng rng(6);
  for (int i = 0; i < 30; ++i) {
    const Mat3 R = test::random_rotation(rng);
    const Vec3 r1 = Vec3::UnitZ();
    const Vec3 r2 = test::random_unit(rng);
    if (r1.cross(r2).norm() < 0.1) continue;
    const Vec3 b1 = R.transpose() * r1;
    const Vec3 b2 = R.transpose() * r2;
    const Mat3 T = triad(b1, b2, r1, r2);
    // frobenius distance: the acos-based geodesic metric bottoms out near
    // sqrt(machine eps) for nearly identical rotations
    CHECK((T - R).norm() < 1e-13);
  }
}

TEST_CASE("triad keeps the tilt pair exact under mag disturbance") {
  Rng rng(7);
  const Mat3 R = test::random_rotation(rng);
  const Vec3 r1 = Vec3::UnitZ();
  const Vec3 r2 = Vec3(1.0, 0.0, 1.0).normalized();
  const Vec3 b1 = R.transpose() * r1;
  const Vec3 b2 = (R.transpose() * r2 + Vec3(0.05, -0.03, 0.04)).normalized();
  const Mat3 T = triad(b1, b2, r1, r2);
  CHECK((T * b1 - r1).norm() < 1e-13);
  CHECK((T.transpose() * T - Mat3::Identity()).norm() < 1e-13);
}

TEST_CASE("triad rejects collinear pairs") {
  CHECK_THROWS_AS(
      triad(Vec3::UnitZ(), Vec3::UnitZ(), Vec3::UnitZ(), Vec3::UnitX()),
      std::domain_error);
  CHECK_THROWS_AS(
      triad(Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitZ(), Vec3::UnitZ()),
      std::domain_error);
}

TEST_CASE("geodesic_angle recovers the rotation angle") {
  Rng rng(8);
  for (double th : {1e-7, 0.3, 1.5, 3.0}) {
    const Mat3 A = test::random_rotation(rng);
    const Vec3 u = test::random_unit(rng);
    CHECK(geodesic_angle(A, A * exp_so3(th * u)) ==
          doctest::Approx(th).epsilon(1e-6));
  }
  const Mat3 B = test::random_rotation(rng);
  CHECK(geodesic_angle(B, B) == doctest::Approx(0.0));
}

TEST_CASE("vector_angle is stable at the ends") {
  CHECK(vector_angle(Vec3::UnitX(), Vec3::UnitY()) ==
        doctest::Approx(M_PI / 2));
  CHECK(vector_angle(Vec3::UnitX(), Vec3(1.0, 1e-9, 0.0)) ==
        doctest::Approx(1e-9).epsilon(1e-6));
  CHECK(vector_angle(Vec3::UnitX(), Vec3(-1.0, 1e-9, 0.0)) ==
        doctest::Approx(M_PI - 1e-9).epsilon(1e-9));
  CHECK(vector_angle(2.0 * Vec3::UnitX(), 5.0 * Vec3::UnitX()) ==
        doctest::Approx(0.0));
}
