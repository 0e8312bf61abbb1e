#include "vahrs/measurement.hpp"

namespace vahrs {

ImuSample synth_measurements(const TrueState& s, const Vec3& m, double g0) {
  ImuSample y;
  y.t = s.t;
  y.y_v = s.v;
  y.y_g = s.omega;
  y.y_a = s.omega.cross(s.v) + s.vdot + g0 * (s.R.transpose() * Vec3::UnitZ());
  y.y_m = s.R.transpose() * m;
  return y;
}

NoiseSpec default_noise(std::uint64_t seed) {
  NoiseSpec n;
  n.vel.stddev = 0.31;
  n.gyro.stddev = 0.1;
  n.accel.stddev = 0.31;
  n.mag.stddev = 0.71;
  n.mag.bias = Vec3(0.2, 0.2, 0.2);
  n.seed = seed;
  return n;
}

ImuSample add_noise(const ImuSample& clean, const NoiseSpec& spec, Rng& rng) {
  ImuSample y = clean;
  y.y_v += spec.vel.bias + spec.vel.stddev * rng.next_gaussian3();
  y.y_g += spec.gyro.bias + spec.gyro.stddev * rng.next_gaussian3();
  y.y_a += spec.accel.bias + spec.accel.stddev * rng.next_gaussian3();
  y.y_m += spec.mag.bias + spec.mag.stddev * rng.next_gaussian3();
  return y;
}

}  // namespace vahrs
