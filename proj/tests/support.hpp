#pragma once

#include <vector>

#include "vahrs/rng.hpp"
#include "vahrs/so3.hpp"

namespace vahrs::test {

inline Vec3 random_unit(Rng& rng) {
  Vec3 v = rng.next_gaussian3();
  while (v.norm() < 1e-3) v = rng.next_gaussian3();
  return v.normalized();
}

inline Mat3 random_rotation(Rng& rng) {
  return exp_so3(rng.next_gaussian3());
}

// Least-squares slope of y over t.
inline double fit_slope(const std::vector<double>& t,
                        const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace vahrs::test
