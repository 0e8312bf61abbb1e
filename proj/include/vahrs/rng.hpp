#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace vahrs {

// xoshiro256++ with splitmix64 seeding. Gaussian draws use Box-Muller with a
// fixed two-uniforms-per-draw layout so streams are reproducible bit for bit
// on any platform, which std::normal_distribution does not guarantee.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double next_double();    // uniform in [0, 1)
  double next_gaussian();  // standard normal
  Eigen::Vector3d next_gaussian3();

 private:
  std::uint64_t s_[4];
};

}  // namespace vahrs
