#pragma once

#include "vahrs/tilt_observers.hpp"

namespace vahrs {

// Full attitude observer stacked on a two-step tilt stage. The correction is
//   sigma = rho1 S(Rhat^T e_z) xhat2' + rho2 S(Rhat^T m) y_m
//         + mu (Rhat^T e_z)(Rhat^T e_z)^T S(Rhat^T m) y_m
// and Rhat integrates Rhat <- Rhat exp_so3((y_g - sigma) dt).
// rho2 = 0 with mu > 0 is the hierarchic variant (magnetometer only steers
// yaw); mu = 0 with rho2 > 0 is the invariant two-vector variant.
struct AttitudeObserverState {
  Mat3 Rhat = Mat3::Identity();
  TwoStepState tilt;
  TwoStepGains tilt_gains;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double mu = 0.0;
};

// Throws std::invalid_argument on rho1 <= 0, rho2 < 0, mu < 0, or a
// non-rotation Rhat0.
AttitudeObserverState make_attitude_state(const Mat3& Rhat0,
                                          const TwoStepState& tilt,
                                          const TwoStepGains& tilt_gains,
                                          double rho1, double rho2, double mu);

// Steps the tilt stage with the same sample first, then updates Rhat using
// the current xhat2'. When rho2 == 0 the increment is split into rotations
// about Rhat^T e_z and orthogonal to it, which keeps the tilt trace
// Rhat^T e_z exactly independent of the magnetometer channel. Rhat is
// reprojected to SO(3) whenever orthogonality drifts past 1e-12.
AttitudeObserverState attitude_step(const AttitudeObserverState& st,
                                    const ImuSample& y, const Vec3& m,
                                    double g0, double dt);

// Velocity-aided attitude observer of Hua et al. (2016). Unlike the layered
// design above there is no separate tilt stage: the tilt estimate is the
// third row of Rhat itself and every correction acts on the full rotation,
//   d/dt xhat1 = -S(y_g) xhat1 - g0 Rhat^T e_z + y_a
//                + k1v xt1 - k2v S^2(Rhat^T e_z) xt1,    xt1 = y_v - xhat1
//   Rhat <- Rhat exp_so3((y_g + k1r S(Rhat^T e_z) xt1
//                              - k2r S(Rhat^T m) y_m) dt)
// so the magnetometer channel leaks into the tilt rows (no decoupling).
struct HuaAttitudeState {
  Mat3 Rhat = Mat3::Identity();
  Vec3 xhat1 = Vec3::Zero();
  double k1v = 0.0;
  double k2v = 0.0;
  double k1r = 0.0;
  double k2r = 0.0;
};

// Velocity gains obey the same condition as make_hua_state
// (k1r g0 <= k1v k2v, or k1v^2 when k2v == 0); k2r >= 0; Rhat0 must be a
// rotation. Throws std::invalid_argument otherwise.
HuaAttitudeState make_hua_attitude_state(const Mat3& Rhat0, const Vec3& xhat1,
                                         double k1v, double k2v, double k1r,
                                         double k2r, double g0);
HuaAttitudeState hua_attitude_step(const HuaAttitudeState& st,
                                   const ImuSample& y, const Vec3& m,
                                   double g0, double dt);

// Martin & Sarras (2016) benchmark attitude: TRIAD on the two normalized
// chain estimates. When either chain norm collapses or the pair goes
// collinear the previous Rhat is kept and valid is cleared for that step.
struct MartinAttitudeState {
  MartinTiltState tilt;
  Mat3 Rhat = Mat3::Identity();
  bool valid = true;
};

MartinAttitudeState make_martin_attitude_state(const Mat3& Rhat0,
                                               const MartinTiltState& tilt);
MartinAttitudeState martin_attitude_step(const MartinAttitudeState& st,
                                         const ImuSample& y, const Vec3& m,
                                         double g0, double dt);

// Attitude error state (z_p1, Qtilde) with Qtilde = (q0, qv) the unit
// quaternion of Rtilde = R Rhat^T.
struct QuatErrorState {
  Vec3 z_p1 = Vec3::Zero();
  Quat q = Quat(1.0, 0.0, 0.0, 0.0);
};

// Autonomous error-flow right-hand side for the n = 1 attitude observer:
//   dz_p1 = -alpha1 z_p1
//   dq0 = qv^T B pi + (rho1/2) qv^T S(e_z) Rt^T z_p1
//   dqv = -(q0 I + S(qv)) B pi - (rho1/2)(q0 I + S(qv)) S(e_z) Rt^T z_p1
// with pi = (q0 I - S(qv)) W qv, B = I + (mu/rho2) e_z e_z^T and
// Rt^T = I - 2 q0 S(qv) + 2 S(qv)^2. Requires rho2 > 0 (the hierarchic
// limit is not analyzed in these coordinates); throws otherwise.
QuatErrorState quat_error_rhs(const QuatErrorState& xi, double rho1,
                              double rho2, double mu, double alpha1,
                              const Mat3& W_rho);

// RK4 step of the error flow; optionally renormalizes the quaternion.
QuatErrorState quat_error_step(const QuatErrorState& xi, double rho1,
                               double rho2, double mu, double alpha1,
                               const Mat3& W_rho, double dt, bool renormalize);

// Integrates the error flow from the initial observer error and returns the
// maximum geodesic angle between the propagated error rotation and the
// recorded R Rhat^T over the whole trace. Requires equally long traces and
// rho2 > 0; throws std::invalid_argument otherwise.
double consistency_check(const std::vector<Mat3>& R,
                         const std::vector<Mat3>& Rhat, const Vec3& z_p1_0,
                         double rho1, double rho2, double mu, double alpha1,
                         const Mat3& W_rho, double dt);

}  // namespace vahrs
