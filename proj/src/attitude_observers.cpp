#include "vahrs/attitude_observers.hpp"

#include <stdexcept>

namespace vahrs {

namespace {

bool is_rotation(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).norm() <= 1e-6 &&
         R.determinant() > 0.0;
}

Mat3 reproject_if_drifted(const Mat3& R) {
  if ((R.transpose() * R - Mat3::Identity()).norm() > 1e-12) {
    return project_so3(R);
  }
  return R;
}

// Increment split into the rotation about u = Rhat^T e_z and the rotation
// orthogonal to it. Rotating about u leaves u fixed to rounding, so the
// parallel channel (where the magnetometer terms live in the hierarchic
// variants) cannot leak into the tilt trace.
Mat3 split_update(const Mat3& Rhat, const Vec3& u, double wpar_scale,
                  const Vec3& wperp, double dt) {
  return Rhat * exp_so3(u * (wpar_scale * dt)) * exp_so3(wperp * dt);
}

}  // namespace

AttitudeObserverState make_attitude_state(const Mat3& Rhat0,
                                          const TwoStepState& tilt,
                                          const TwoStepGains& tilt_gains,
                                          double rho1, double rho2,
                                          double mu) {
  if (!(rho1 > 0.0) || rho2 < 0.0 || mu < 0.0) {
    throw std::invalid_argument("make_attitude_state: bad gains");
  }
  if (!is_rotation(Rhat0)) {
    throw std::invalid_argument("make_attitude_state: Rhat0 not a rotation");
  }
  AttitudeObserverState st;
  st.Rhat = Rhat0;
  st.tilt = tilt;
  st.tilt_gains = tilt_gains;
  st.rho1 = rho1;
  st.rho2 = rho2;
  st.mu = mu;
  return st;
}

AttitudeObserverState attitude_step(const AttitudeObserverState& st,
                                    const ImuSample& y, const Vec3& m,
                                    double g0, double dt) {
  AttitudeObserverState out = st;
  out.tilt = two_step_step(st.tilt, st.tilt_gains, y, g0, dt);
  const Vec3& x2p = out.tilt.xhat2_prime;

  const Vec3 u = st.Rhat.row(2).transpose();  // Rhat^T e_z
  const Vec3 b = st.Rhat.transpose() * m;
  const double s_yaw = u.dot(b.cross(y.y_m));

  if (st.rho2 == 0.0) {
    const Vec3 w_tilt = y.y_g - st.rho1 * u.cross(x2p);
    const double wpar = u.dot(w_tilt) - st.mu * s_yaw;
    const Vec3 wperp = w_tilt - u * u.dot(w_tilt);
    out.Rhat = reproject_if_drifted(split_update(st.Rhat, u, wpar, wperp, dt));
  } else {
    const Vec3 sigma = st.rho1 * u.cross(x2p) + st.rho2 * b.cross(y.y_m) +
                       st.mu * u * s_yaw;
    out.Rhat = reproject_if_drifted(st.Rhat * exp_so3((y.y_g - sigma) * dt));
  }
  return out;
}

HuaAttitudeState make_hua_attitude_state(const Mat3& Rhat0, const Vec3& xhat1,
                                         double k1v, double k2v, double k1r,
                                         double k2r, double g0) {
  if (!(k1v > 0.0) || k2v < 0.0 || !(k1r > 0.0) || k2r < 0.0) {
    throw std::invalid_argument(
        "make_hua_attitude_state: gains must be positive");
  }
  const double bound = (k2v == 0.0) ? k1v * k1v : k1v * k2v;
  if (k1r * g0 > bound) {
    throw std::invalid_argument(
        "make_hua_attitude_state: gain condition violated");
  }
  if (!is_rotation(Rhat0)) {
    throw std::invalid_argument(
        "make_hua_attitude_state: Rhat0 not a rotation");
  }
  HuaAttitudeState st;
  st.Rhat = Rhat0;
  st.xhat1 = xhat1;
  st.k1v = k1v;
  st.k2v = k2v;
  st.k1r = k1r;
  st.k2r = k2r;
  return st;
}

HuaAttitudeState hua_attitude_step(const HuaAttitudeState& st,
                                   const ImuSample& y, const Vec3& m,
                                   double g0, double dt) {
  const Vec3 u = st.Rhat.row(2).transpose();  // tilt estimate Rhat^T e_z
  const Vec3 b = st.Rhat.transpose() * m;

  // xhat1 and Rhat advance simultaneously: the angular rate uses the
  // pre-step velocity estimate and u is held over the RK4 substeps.
  const auto rhs = [&](const Vec3& x1) -> Vec3 {
    const Vec3 xt1 = y.y_v - x1;
    return -y.y_g.cross(x1) - g0 * u + y.y_a + st.k1v * xt1 -
           st.k2v * u.cross(u.cross(xt1));
  };
  const Vec3 k1 = rhs(st.xhat1);
  const Vec3 k2 = rhs(st.xhat1 + 0.5 * dt * k1);
  const Vec3 k3 = rhs(st.xhat1 + 0.5 * dt * k2);
  const Vec3 k4 = rhs(st.xhat1 + dt * k3);

  const Vec3 xt1 = y.y_v - st.xhat1;
  const Vec3 w = y.y_g + st.k1r * u.cross(xt1) - st.k2r * b.cross(y.y_m);

  HuaAttitudeState out = st;
  out.xhat1 += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  out.Rhat = reproject_if_drifted(st.Rhat * exp_so3(w * dt));
  return out;
}

MartinAttitudeState make_martin_attitude_state(const Mat3& Rhat0,
                                               const MartinTiltState& tilt) {
  if (!is_rotation(Rhat0)) {
    throw std::invalid_argument(
        "make_martin_attitude_state: Rhat0 not a rotation");
  }
  MartinAttitudeState st;
  st.tilt = tilt;
  st.Rhat = Rhat0;
  st.valid = true;
  return st;
}

MartinAttitudeState martin_attitude_step(const MartinAttitudeState& st,
                                         const ImuSample& y, const Vec3& m,
                                         double g0, double dt) {
  MartinAttitudeState out = st;
  out.tilt = martin_tilt_step(st.tilt, y, g0, dt);
  try {
    out.Rhat = triad(normalize_s2(out.tilt.xhat2_prime),
                     normalize_s2(out.tilt.xhat3_prime), Vec3::UnitZ(), m);
    out.valid = true;
  } catch (const std::domain_error&) {
    out.Rhat = st.Rhat;
    out.valid = false;
  }
  return out;
}

QuatErrorState quat_error_rhs(const QuatErrorState& xi, double rho1,
                              double rho2, double mu, double alpha1,
                              const Mat3& W_rho) {
  if (!(rho2 > 0.0)) {
    throw std::invalid_argument("quat_error_rhs: requires rho2 > 0");
  }
  const double q0 = xi.q(0);
  const Vec3 qv = xi.q.tail<3>();
  const Vec3 Wq = W_rho * qv;
  const Vec3 pi = q0 * Wq - qv.cross(Wq);
  Vec3 Bpi = pi;
  Bpi.z() += (mu / rho2) * pi.z();
  const Mat3 S = skew(qv);
  const Mat3 RtT = Mat3::Identity() - 2.0 * q0 * S + 2.0 * (S * S);
  const Vec3 r = RtT * xi.z_p1;
  const Vec3 u = Vec3::UnitZ().cross(r);

  QuatErrorState d;
  d.z_p1 = -alpha1 * xi.z_p1;
  d.q(0) = qv.dot(Bpi) + 0.5 * rho1 * qv.dot(u);
  d.q.tail<3>() =
      -(q0 * Bpi + qv.cross(Bpi)) - 0.5 * rho1 * (q0 * u + qv.cross(u));
  return d;
}

QuatErrorState quat_error_step(const QuatErrorState& xi, double rho1,
                               double rho2, double mu, double alpha1,
                               const Mat3& W_rho, double dt,
                               bool renormalize) {
  const auto rhs = [&](const QuatErrorState& s) {
    return quat_error_rhs(s, rho1, rho2, mu, alpha1, W_rho);
  };
  const auto add = [](const QuatErrorState& a, double c,
                      const QuatErrorState& b) {
    QuatErrorState out;
    out.z_p1 = a.z_p1 + c * b.z_p1;
    out.q = a.q + c * b.q;
    return out;
  };
  const QuatErrorState k1 = rhs(xi);
  const QuatErrorState k2 = rhs(add(xi, 0.5 * dt, k1));
  const QuatErrorState k3 = rhs(add(xi, 0.5 * dt, k2));
  const QuatErrorState k4 = rhs(add(xi, dt, k3));
  QuatErrorState out;
  out.z_p1 = xi.z_p1 + (dt / 6.0) * (k1.z_p1 + 2.0 * k2.z_p1 +
                                     2.0 * k3.z_p1 + k4.z_p1);
  out.q = xi.q + (dt / 6.0) * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
  if (renormalize) out.q = quat_normalize(out.q);
  return out;
}

double consistency_check(const std::vector<Mat3>& R,
                         const std::vector<Mat3>& Rhat, const Vec3& z_p1_0,
                         double rho1, double rho2, double mu, double alpha1,
                         const Mat3& W_rho, double dt) {
  if (R.size() != Rhat.size() || R.empty()) {
    throw std::invalid_argument("consistency_check: trace size mismatch");
  }
  QuatErrorState xi;
  xi.z_p1 = z_p1_0;
  xi.q = rot_to_quat(R[0] * Rhat[0].transpose());
  double max_dev = 0.0;
  for (size_t k = 0; k < R.size(); ++k) {
    if (k > 0) {
      xi = quat_error_step(xi, rho1, rho2, mu, alpha1, W_rho, dt, true);
    }
    const double dev =
        geodesic_angle(quat_to_rot(xi.q), R[k] * Rhat[k].transpose());
    max_dev = std::max(max_dev, dev);
  }
  return max_dev;
}

}  // namespace vahrs
