#pragma once

#include <vector>

#include "vahrs/companion.hpp"
#include "vahrs/measurement.hpp"
#include "vahrs/so3.hpp"

namespace vahrs {

// Gains for the two-step observer family: characteristic polynomial
// s^n + alpha_n s^(n-1) + ... + alpha_1 must be Hurwitz, gamma > 0.
struct TwoStepGains {
  Eigen::VectorXd alphas;
  double gamma = 0.0;
};

// Throws std::invalid_argument when not Hurwitz or gamma <= 0.
TwoStepGains make_two_step_gains(const Eigen::VectorXd& alphas, double gamma);

// Two-step observer of order n on R^(3n) x S^2.
// n == 1: xhat2_prime is algebraic, -(alpha_1/g0)(y_v - xhat1), recomputed
// after every step. n >= 2: xhat2_prime is an integrated state and p holds
// the intermediate chain states p_2 .. p_(n-1) (p_n = y_v - xhat1 is
// algebraic). xhat2 is kept unit norm.
struct TwoStepState {
  int n = 1;
  Vec3 xhat1 = Vec3::Zero();
  std::vector<Vec3> p;
  Vec3 xhat2_prime = Vec3::Zero();
  Vec3 xhat2 = Vec3::UnitZ();
};

// p initialized to zeros; xhat2 is normalized. Throws on n < 1 or n > 8.
TwoStepState make_two_step_state(int n, const Vec3& xhat1,
                                 const Vec3& xhat2_prime, const Vec3& xhat2);

// One RK4 step treating the measurements as constant over the step.
TwoStepState two_step_step(const TwoStepState& st, const TwoStepGains& gains,
                           const ImuSample& y, double g0, double dt);

// One-step observer on R^3 x S^2. Requires gamma * g0 <= alpha^2.
struct OneStepState {
  Vec3 xhat1 = Vec3::Zero();
  Vec3 xhat2 = Vec3::UnitZ();
  double alpha = 0.0;
  double gamma = 0.0;
};

OneStepState make_one_step_state(double alpha, double gamma, double g0,
                                 const Vec3& xhat1, const Vec3& xhat2);
OneStepState one_step_step(const OneStepState& st, const ImuSample& y,
                           double g0, double dt);

// Velocity-aided observer of Hua et al. (2016). With k2v == 0 the gain
// condition is k1r * g0 <= k1v^2 and the dynamics coincide with the
// one-step observer under alpha = k1v, gamma = k1r; otherwise
// k1r * g0 <= k1v * k2v.
struct HuaState {
  Vec3 xhat1 = Vec3::Zero();
  Vec3 xhat2 = Vec3::UnitZ();
  double k1v = 0.0;
  double k2v = 0.0;
  double k1r = 0.0;
};

HuaState make_hua_state(double k1v, double k2v, double k1r, double g0,
                        const Vec3& xhat1, const Vec3& xhat2);
HuaState hua_step(const HuaState& st, const ImuSample& y, double g0,
                  double dt);

// Benchmark of Martin & Sarras (2016): two unconstrained chains. The gravity
// chain matches the two-step n = 2 first stage under alpha_1 = L*K,
// alpha_2 = L+K; the magnetic chain is xhat3' with
// d xhat3'/dt = -S(y_g) xhat3' - M (xhat3' - y_m).
struct MartinTiltState {
  Vec3 xhat1 = Vec3::Zero();
  Vec3 xhat2_prime = Vec3::Zero();
  Vec3 xhat3_prime = Vec3::Zero();
  double L = 0.0;
  double K = 0.0;
  double M = 0.0;
};

MartinTiltState make_martin_tilt_state(double L, double K, double M,
                                       const Vec3& xhat1,
                                       const Vec3& xhat2_prime,
                                       const Vec3& xhat3_prime);
MartinTiltState martin_tilt_step(const MartinTiltState& st,
                                 const ImuSample& y, double g0, double dt);

// Unit tilt estimate of each observer. Hides the n = 1 / n >= 2 storage
// difference of the two-step family. The Martin variant normalizes
// xhat2_prime and throws std::domain_error when its norm is below kNormEps.
Vec3 tilt_of(const TwoStepState& st);
Vec3 tilt_of(const OneStepState& st);
Vec3 tilt_of(const HuaState& st);
Vec3 tilt_of(const MartinTiltState& st);

}  // namespace vahrs
