#pragma once

#include <vector>

#include "vahrs/attitude_observers.hpp"
#include "vahrs/tilt_observers.hpp"
#include "vahrs/trajectory.hpp"

namespace vahrs {

// Tilt error of an estimate against the true state. z2 = e_z - R * est_unit
// is the spherical error coordinate; angle is the angle between the true
// body-frame gravity direction R^T e_z and the estimate. Unconstrained
// estimates are normalized first; a norm below kNormEps clears valid.
struct TiltMetrics {
  Vec3 z2 = Vec3::Zero();
  double angle = 0.0;
  bool valid = true;
};

TiltMetrics tilt_metrics(const TrueState& s, const Vec3& est,
                         bool unit_constrained);

// Heading proxy: angle between the horizontal projection of the world
// marker (m with its vertical component removed, normalized) and the
// horizontal projection of its image under R Rhat^T. Throws
// std::domain_error when m is collinear with e_z or the image degenerates.
double yaw_proxy_angle(const Mat3& R, const Mat3& Rhat, const Vec3& m);

// Angle between the true body-frame marker direction R^T m and its
// estimate Rhat^T m; picks up every attitude error component except
// rotation about m itself. Throws std::domain_error when m is near zero.
double marker_angle(const Mat3& R, const Mat3& Rhat, const Vec3& m);

// W_rho = -rho1 S(e_z)^2 - rho2 S(m)^2 with its eigenpairs (ascending).
// m is normalized internally; collinear m/e_z is rejected when rho2 > 0.
struct Wrho {
  double rho1 = 0.0;
  double rho2 = 0.0;
  Vec3 m = Vec3::UnitX();
  Mat3 matrix = Mat3::Zero();
  Vec3 eigenvalues = Vec3::Zero();   // ascending
  Mat3 eigenvectors = Mat3::Identity();  // columns match eigenvalues
};

Wrho build_wrho(double rho1, double rho2, const Vec3& m);

// Reflection-like rotation R3 = 2uu^T - I, u = normalize(m x e_z): the
// attitude error that both mirrors gravity and lands heading in the
// antipodal basin. Symmetric involution with det +1 and trace -1.
Mat3 undesired_init(const Vec3& m);

// First-order tilt Lyapunov function |z_p1|^2/(2 alpha1) + |z2|^2/(2 gamma).
double lyapunov_v1(const Vec3& z_p1, const Vec3& z2, double alpha1,
                   double gamma);

// n-th order: psi^T P psi + |z2|^2/(2 gamma), psi = (z_p1 .. z_pn).
double lyapunov_vn(const Eigen::VectorXd& psi, const Vec3& z2,
                   const Eigen::MatrixXd& P, double gamma);

// Attitude stage: (rho1^2/alpha1) |z_p1|^2 + 2 qv^T W_rho qv.
double lyapunov_att(const Vec3& z_p1, const Vec3& q_vec, const Mat3& W_rho,
                    double rho1, double alpha1);

// Jacobian of the attitude error flow at the undesired equilibrium
// (0, (0, v_j)), v_j the j-th unit eigenvector of W_rho (j in 1..3,
// ascending). State order (z_p1, q0, qv). Requires rho2 > 0.
struct LinearizationA {
  Eigen::Matrix<double, 7, 7> A;
  Eigen::VectorXcd eigenvalues;
  double lambda = 0.0;
  Vec3 v = Vec3::Zero();
};

LinearizationA linearization_A(const Wrho& w, int j, double mu,
                               double alpha1);

// Mean over samples with t0 <= t <= t1 and valid set. skipped counts
// in-window samples dropped by the valid flag. Throws std::invalid_argument
// when the window holds no valid samples.
struct WindowMean {
  double mean = 0.0;
  long count = 0;
  long skipped = 0;
};

WindowMean mean_error_window(const std::vector<double>& t,
                             const std::vector<double>& value,
                             const std::vector<unsigned char>& valid,
                             double t0, double t1);

// ---- autonomous error flows (analysis / test harness utilities) ----

// Tilt error flow state: psi = (z_p1 .. z_pn) in R^(3n) plus z2.
struct TiltErrorState {
  Eigen::VectorXd psi;
  Vec3 z2 = Vec3::Zero();
};

// d psi = M_alpha psi (chain with -(alpha) feedback on the last block),
// d z2 = gamma S(e_z - z2)^2 (z2 - z_p1), cross-product form.
TiltErrorState tilt_error_rhs(const TiltErrorState& xi,
                              const Eigen::VectorXd& alphas, double gamma);
TiltErrorState tilt_error_step(const TiltErrorState& xi,
                               const Eigen::VectorXd& alphas, double gamma,
                               double dt);

// One-step error flow: d z1 = -alpha z1 - g0 z2,
// d z2 = -gamma S(e_z - z2)^2 z1.
struct OneStepErrorState {
  Vec3 z1 = Vec3::Zero();
  Vec3 z2 = Vec3::Zero();
};

OneStepErrorState one_step_error_rhs(const OneStepErrorState& xi,
                                     double alpha, double gamma, double g0);
OneStepErrorState one_step_error_step(const OneStepErrorState& xi,
                                      double alpha, double gamma, double g0,
                                      double dt);

// Error coordinates of a two-step observer against the truth:
// z_p1 = R (x2 - xhat2'), z_pi = (alpha1/g0) R p_i for i >= 2 with
// p_n = v - xhat1, stacked into psi; z2 = e_z - R xhat2.
Eigen::VectorXd tilt_error_psi(const TrueState& s, const TwoStepState& st,
                               const TwoStepGains& gains, double g0);
Vec3 tilt_error_z2(const TrueState& s, const Vec3& xhat2);

}  // namespace vahrs
