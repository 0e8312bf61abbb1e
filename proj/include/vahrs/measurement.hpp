#pragma once

#include <cstdint>

#include "vahrs/rng.hpp"
#include "vahrs/trajectory.hpp"

namespace vahrs {

// Body-frame sensor set: velocity, rate gyro, specific force, magnetometer.
struct ImuSample {
  double t = 0.0;
  Vec3 y_v = Vec3::Zero();
  Vec3 y_g = Vec3::Zero();
  Vec3 y_a = Vec3::Zero();
  Vec3 y_m = Vec3::Zero();
};

// y_v = v, y_g = omega, y_a = S(omega) v + vdot + g0 R^T e_z, y_m = R^T m.
// m is the world magnetic direction (unit), g0 the gravity magnitude.
ImuSample synth_measurements(const TrueState& s, const Vec3& m, double g0);

struct NoiseChannel {
  double stddev = 0.0;
  Vec3 bias = Vec3::Zero();
};

struct NoiseSpec {
  NoiseChannel vel;
  NoiseChannel gyro;
  NoiseChannel accel;
  NoiseChannel mag;
  std::uint64_t seed = 0;
};

// Benchmark noise set: accel 0.31, gyro 0.1, mag 0.71 with bias
// (0.2, 0.2, 0.2), velocity 0.31; i.i.d. per sample and component.
NoiseSpec default_noise(std::uint64_t seed);

// Adds bias + stddev * N(0,1) per component. Draw order is fixed:
// y_v, y_g, y_a, y_m, three gaussians each, consumed from rng in sequence.
ImuSample add_noise(const ImuSample& clean, const NoiseSpec& spec, Rng& rng);

}  // namespace vahrs
