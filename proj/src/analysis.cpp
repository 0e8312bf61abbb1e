#include "vahrs/analysis.hpp"

#include <cstddef>
#include <limits>
#include <stdexcept>

namespace vahrs {

TiltMetrics tilt_metrics(const TrueState& s, const Vec3& est,
                         bool unit_constrained) {
  TiltMetrics out;
  Vec3 unit = est;
  if (!unit_constrained) {
    const double n = est.norm();
    if (n < kNormEps) {
      out.valid = false;
      out.angle = std::numeric_limits<double>::quiet_NaN();
      out.z2 = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
      return out;
    }
    unit = est / n;
  }
  out.z2 = Vec3::UnitZ() - s.R * unit;
  const Vec3 x2 = s.R.transpose() * Vec3::UnitZ();
  out.angle = vector_angle(x2, unit);
  return out;
}

double yaw_proxy_angle(const Mat3& R, const Mat3& Rhat, const Vec3& m) {
  Vec3 mh = m;
  mh.z() = 0.0;
  const double n = mh.norm();
  if (n < kNormEps) {
    throw std::domain_error("yaw_proxy_angle: marker collinear with e_z");
  }
  mh /= n;
  Vec3 image = R * (Rhat.transpose() * mh);
  image.z() = 0.0;
  if (image.norm() < kNormEps) {
    throw std::domain_error("yaw_proxy_angle: projected image degenerate");
  }
  return vector_angle(mh, image);
}

double marker_angle(const Mat3& R, const Mat3& Rhat, const Vec3& m) {
  const double n = m.norm();
  if (n < kNormEps) {
    throw std::domain_error("marker_angle: marker direction near zero");
  }
  const Vec3 mu = m / n;
  return vector_angle(R.transpose() * mu, Rhat.transpose() * mu);
}

Wrho build_wrho(double rho1, double rho2, const Vec3& m) {
  if (!(rho1 > 0.0) || rho2 < 0.0) {
    throw std::invalid_argument("build_wrho: need rho1 > 0 and rho2 >= 0");
  }
  Wrho out;
  out.rho1 = rho1;
  out.rho2 = rho2;
  out.m = normalize_s2(m);
  if (rho2 > 0.0 && out.m.cross(Vec3::UnitZ()).norm() < 1e-6) {
    throw std::domain_error("build_wrho: m collinear with e_z");
  }
  const Mat3 Sz = skew(Vec3::UnitZ());
  const Mat3 Sm = skew(out.m);
  out.matrix = -rho1 * (Sz * Sz) - rho2 * (Sm * Sm);
  const Eigen::SelfAdjointEigenSolver<Mat3> es(out.matrix);
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  return out;
}

Mat3 undesired_init(const Vec3& m) {
  const Vec3 c = normalize_s2(m).cross(Vec3::UnitZ());
  if (c.norm() < 1e-6) {
    throw std::domain_error("undesired_init: m collinear with e_z");
  }
  const Vec3 u = c / c.norm();
  return 2.0 * (u * u.transpose()) - Mat3::Identity();
}

double lyapunov_v1(const Vec3& z_p1, const Vec3& z2, double alpha1,
                   double gamma) {
  return z_p1.squaredNorm() / (2.0 * alpha1) + z2.squaredNorm() / (2.0 * gamma);
}

double lyapunov_vn(const Eigen::VectorXd& psi, const Vec3& z2,
                   const Eigen::MatrixXd& P, double gamma) {
  if (psi.size() != P.rows() || P.rows() != P.cols()) {
    throw std::invalid_argument("lyapunov_vn: dimension mismatch");
  }
  return psi.dot(P * psi) + z2.squaredNorm() / (2.0 * gamma);
}

double lyapunov_att(const Vec3& z_p1, const Vec3& q_vec, const Mat3& W_rho,
                    double rho1, double alpha1) {
  return (rho1 * rho1 / alpha1) * z_p1.squaredNorm() +
         2.0 * q_vec.dot(W_rho * q_vec);
}

LinearizationA linearization_A(const Wrho& w, int j, double mu,
                               double alpha1) {
  if (!(w.rho2 > 0.0)) {
    throw std::invalid_argument(
        "linearization_A: requires rho2 > 0 (hierarchic limit not covered)");
  }
  if (j < 1 || j > 3) {
    throw std::invalid_argument("linearization_A: j must be in 1..3");
  }
  LinearizationA out;
  out.lambda = w.eigenvalues(j - 1);
  out.v = w.eigenvectors.col(j - 1);
  const Vec3& v = out.v;
  const double lambda = out.lambda;
  const double kappa = mu / w.rho2;
  const double vz = v.dot(Vec3::UnitZ());
  const Vec3 vperp = v.cross(Vec3::UnitZ());  // S(v) e_z
  const Mat3 lw = lambda * Mat3::Identity() - w.matrix;

  Eigen::Matrix<double, 7, 7> A = Eigen::Matrix<double, 7, 7>::Zero();
  A.block<3, 3>(0, 0) = -alpha1 * Mat3::Identity();
  A.block<1, 3>(3, 0) = -0.5 * w.rho1 * vperp.transpose();
  A(3, 3) = lambda * (1.0 + kappa * vz * vz);
  A.block<1, 3>(3, 4) = -kappa * vz * (vperp.transpose() * lw);
  A.block<3, 3>(4, 0) = 0.5 * w.rho1 * skew(v) * skew(Vec3::UnitZ()) *
                        (Mat3::Identity() - 2.0 * (v * v.transpose()));
  A.block<3, 1>(4, 3) = -lambda * kappa * vz * vperp;
  A.block<3, 3>(4, 4) =
      (Mat3::Identity() + kappa * (vperp * vperp.transpose())) * lw;
  out.A = A;

  const Eigen::EigenSolver<Eigen::Matrix<double, 7, 7>> es(A);
  out.eigenvalues = es.eigenvalues();
  return out;
}

WindowMean mean_error_window(const std::vector<double>& t,
                             const std::vector<double>& value,
                             const std::vector<unsigned char>& valid,
                             double t0, double t1) {
  if (t.size() != value.size() ||
      (!valid.empty() && valid.size() != t.size())) {
    throw std::invalid_argument("mean_error_window: size mismatch");
  }
  WindowMean out;
  double sum = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    if (!valid.empty() && !valid[i]) {
      ++out.skipped;
      continue;
    }
    sum += value[i];
    ++out.count;
  }
  if (out.count == 0) {
    throw std::invalid_argument("mean_error_window: empty window");
  }
  out.mean = sum / static_cast<double>(out.count);
  return out;
}

TiltErrorState tilt_error_rhs(const TiltErrorState& xi,
                              const Eigen::VectorXd& alphas, double gamma) {
  const int n = static_cast<int>(alphas.size());
  if (xi.psi.size() != 3 * n) {
    throw std::invalid_argument("tilt_error_rhs: psi dimension mismatch");
  }
  TiltErrorState d;
  d.psi.resize(3 * n);
  for (int i = 0; i < n - 1; ++i) {
    d.psi.segment<3>(3 * i) = xi.psi.segment<3>(3 * (i + 1));
  }
  Vec3 last = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    last -= alphas(i) * Vec3(xi.psi.segment<3>(3 * i));
  }
  d.psi.segment<3>(3 * (n - 1)) = last;

  const Vec3 z_p1 = xi.psi.segment<3>(0);
  const Vec3 u = Vec3::UnitZ() - xi.z2;
  d.z2 = gamma * u.cross(u.cross(xi.z2 - z_p1));
  return d;
}

TiltErrorState tilt_error_step(const TiltErrorState& xi,
                               const Eigen::VectorXd& alphas, double gamma,
                               double dt) {
  const auto add = [](const TiltErrorState& a, double c,
                      const TiltErrorState& b) {
    TiltErrorState out;
    out.psi = a.psi + c * b.psi;
    out.z2 = a.z2 + c * b.z2;
    return out;
  };
  const TiltErrorState k1 = tilt_error_rhs(xi, alphas, gamma);
  const TiltErrorState k2 = tilt_error_rhs(add(xi, 0.5 * dt, k1), alphas,
                                           gamma);
  const TiltErrorState k3 = tilt_error_rhs(add(xi, 0.5 * dt, k2), alphas,
                                           gamma);
  const TiltErrorState k4 = tilt_error_rhs(add(xi, dt, k3), alphas, gamma);
  TiltErrorState out;
  out.psi = xi.psi + (dt / 6.0) * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi +
                                   k4.psi);
  out.z2 = xi.z2 + (dt / 6.0) * (k1.z2 + 2.0 * k2.z2 + 2.0 * k3.z2 + k4.z2);
  return out;
}

OneStepErrorState one_step_error_rhs(const OneStepErrorState& xi,
                                     double alpha, double gamma, double g0) {
  OneStepErrorState d;
  d.z1 = -alpha * xi.z1 - g0 * xi.z2;
  const Vec3 u = Vec3::UnitZ() - xi.z2;
  d.z2 = -gamma * u.cross(u.cross(xi.z1));
  return d;
}

OneStepErrorState one_step_error_step(const OneStepErrorState& xi,
                                      double alpha, double gamma, double g0,
                                      double dt) {
  const auto add = [](const OneStepErrorState& a, double c,
                      const OneStepErrorState& b) {
    OneStepErrorState out;
    out.z1 = a.z1 + c * b.z1;
    out.z2 = a.z2 + c * b.z2;
    return out;
  };
  const OneStepErrorState k1 = one_step_error_rhs(xi, alpha, gamma, g0);
  const OneStepErrorState k2 =
      one_step_error_rhs(add(xi, 0.5 * dt, k1), alpha, gamma, g0);
  const OneStepErrorState k3 =
      one_step_error_rhs(add(xi, 0.5 * dt, k2), alpha, gamma, g0);
  const OneStepErrorState k4 =
      one_step_error_rhs(add(xi, dt, k3), alpha, gamma, g0);
  OneStepErrorState out;
  out.z1 = xi.z1 + (dt / 6.0) * (k1.z1 + 2.0 * k2.z1 + 2.0 * k3.z1 + k4.z1);
  out.z2 = xi.z2 + (dt / 6.0) * (k1.z2 + 2.0 * k2.z2 + 2.0 * k3.z2 + k4.z2);
  return out;
}

Eigen::VectorXd tilt_error_psi(const TrueState& s, const TwoStepState& st,
                               const TwoStepGains& gains, double g0) {
  const int n = st.n;
  const double scale = gains.alphas(0) / g0;
  const Vec3 x2 = s.R.transpose() * Vec3::UnitZ();
  Eigen::VectorXd psi(3 * n);
  psi.segment<3>(0) = s.R * (x2 - st.xhat2_prime);
  for (int i = 2; i <= n; ++i) {
    Vec3 p_i;
    if (i == n) {
      p_i = s.v - st.xhat1;
    } else {
      p_i = st.p[static_cast<size_t>(i - 2)];
    }
    psi.segment<3>(3 * (i - 1)) = scale * (s.R * p_i);
  }
  return psi;
}

Vec3 tilt_error_z2(const TrueState& s, const Vec3& xhat2) {
  return Vec3::UnitZ() - s.R * xhat2;
}

}  // namespace vahrs
