#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vahrs/so3.hpp"

namespace vahrs {

// One sinusoid per axis: amp * sin(2*pi*freq_hz*t + phase).
struct Wave {
  double amp = 0.0;
  double freq_hz = 0.0;
  double phase = 0.0;
};

struct TrajectorySpec {
  double duration = 10.0;
  double dt = 1e-3;  // must satisfy 0 < dt <= 0.01
  std::array<Wave, 3> omega_waves{};
  std::array<Wave, 3> vel_waves{};
  Mat3 R0 = Mat3::Identity();
  std::uint64_t seed = 0;
};

struct TrueState {
  double t = 0.0;
  Mat3 R = Mat3::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  Vec3 vdot = Vec3::Zero();
};

// Benchmark trajectory from the reference simulation study.
TrajectorySpec default_trajectory();

Vec3 omega_at(const TrajectorySpec& spec, double t);
Vec3 vel_at(const TrajectorySpec& spec, double t);
Vec3 vdot_at(const TrajectorySpec& spec, double t);

// Attitude integrated by the midpoint rule
// R(t+dt) = R(t) * exp_so3(omega(t + dt/2) * dt), then projected to SO(3);
// v, omega, vdot evaluated analytically on the grid t_k = k*dt.
// Throws std::invalid_argument on bad dt or duration.
std::vector<TrueState> gen_trajectory(const TrajectorySpec& spec);

}  // namespace vahrs
