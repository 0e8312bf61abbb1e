#include "vahrs/trajectory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vahrs {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TrajectorySpec default_trajectory() {
  TrajectorySpec spec;
  spec.duration = 10.0;
  spec.dt = 1e-3;
  spec.omega_waves = {Wave{1.2, 0.3, 0.0},
                      Wave{0.8, 0.5, std::numbers::pi / 3.0},
                      Wave{1.0, 0.7, std::numbers::pi / 5.0}};
  spec.vel_waves = {Wave{1.5, 0.4, std::numbers::pi / 4.0},
                    Wave{1.0, 0.6, 0.0},
                    Wave{0.5, 0.2, std::numbers::pi / 2.0}};
  return spec;
}

Vec3 omega_at(const TrajectorySpec& spec, double t) {
  Vec3 w;
  for (int i = 0; i < 3; ++i) {
    const Wave& wv = spec.omega_waves[static_cast<size_t>(i)];
    w(i) = wv.amp * std::sin(kTwoPi * wv.freq_hz * t + wv.phase);
  }
  return w;
}

Vec3 vel_at(const TrajectorySpec& spec, double t) {
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    const Wave& wv = spec.vel_waves[static_cast<size_t>(i)];
    v(i) = wv.amp * std::sin(kTwoPi * wv.freq_hz * t + wv.phase);
  }
  return v;
}

Vec3 vdot_at(const TrajectorySpec& spec, double t) {
  Vec3 a;
  for (int i = 0; i < 3; ++i) {
    const Wave& wv = spec.vel_waves[static_cast<size_t>(i)];
    a(i) = wv.amp * kTwoPi * wv.freq_hz *
           std::cos(kTwoPi * wv.freq_hz * t + wv.phase);
  }
  return a;
}

std::vector<TrueState> gen_trajectory(const TrajectorySpec& spec) {
  if (!(spec.dt > 0.0) || spec.dt > 0.01) {
    throw std::invalid_argument("gen_trajectory: dt must be in (0, 0.01]");
  }
  if (!(spec.duration > 0.0)) {
    throw std::invalid_argument("gen_trajectory: duration must be positive");
  }
  const auto steps = static_cast<long>(std::llround(spec.duration / spec.dt));
  if (steps < 1) {
    throw std::invalid_argument("gen_trajectory: duration shorter than dt");
  }

  std::vector<TrueState> out(static_cast<size_t>(steps) + 1);
  Mat3 R = spec.R0;
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * spec.dt;
    TrueState& s = out[static_cast<size_t>(k)];
    s.t = t;
    s.R = R;
    s.v = vel_at(spec, t);
    s.omega = omega_at(spec, t);
    s.vdot = vdot_at(spec, t);
    if (k < steps) {
      const Vec3 wm = omega_at(spec, t + 0.5 * spec.dt);
      R = project_so3(R * exp_so3(wm * spec.dt));
    }
  }
  return out;
}

}  // namespace vahrs
