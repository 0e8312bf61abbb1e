#include "vahrs/so3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vahrs {

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return S;
}

bool check_skew_identities(const Vec3& v, const Vec3& w, const Mat3& R,
                           double tol) {
  const Mat3 S = skew(v);
  if ((S * w - v.cross(w)).norm() > tol) return false;
  if ((S.transpose() + S).norm() > tol) return false;
  if ((S * v).norm() > tol) return false;
  const Mat3 sq = v * v.transpose() - v.squaredNorm() * Mat3::Identity();
  if ((S * S - sq).norm() > tol) return false;
  if ((skew(R * v) - R * S * R.transpose()).norm() > tol) return false;
  const Mat3 outer = w * v.transpose() - v * w.transpose();
  if ((skew(v.cross(w)) - outer).norm() > tol) return false;
  return true;
}

Mat3 exp_so3(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  const Mat3 S = skew(w);
  double a, b;
  if (theta2 < 1e-16) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * S + b * (S * S);
}

Mat3 project_so3(const Mat3& M) {
  if (M.determinant() <= 1e-6) {
    throw std::domain_error("project_so3: determinant not positive enough");
  }
  Mat3 X = M;
  for (int it = 0; it < 30; ++it) {
    const Mat3 Xn = 0.5 * (X + X.inverse().transpose());
    X = Xn;
    if ((X.transpose() * X - Mat3::Identity()).norm() <= 1e-13) break;
  }
  return X;
}

Vec3 normalize_s2(const Vec3& v) {
  const double n = v.norm();
  if (n < kNormEps) {
    throw std::domain_error("normalize_s2: vector norm below threshold");
  }
  return v / n;
}

Quat quat_mul(const Quat& a, const Quat& b) {
  const double a0 = a(0);
  const Vec3 av = a.tail<3>();
  const double b0 = b(0);
  const Vec3 bv = b.tail<3>();
  Quat out;
  out(0) = a0 * b0 - av.dot(bv);
  out.tail<3>() = a0 * bv + b0 * av + av.cross(bv);
  return out;
}

Quat quat_conj(const Quat& q) {
  return Quat(q(0), -q(1), -q(2), -q(3));
}

Quat quat_normalize(const Quat& q) {
  const double n = q.norm();
  if (n < kNormEps) {
    throw std::domain_error("quat_normalize: norm below threshold");
  }
  return q / n;
}

Mat3 quat_to_rot(const Quat& q) {
  const Vec3 qv = q.tail<3>();
  const Mat3 S = skew(qv);
  return Mat3::Identity() + 2.0 * q(0) * S + 2.0 * (S * S);
}

Quat rot_to_quat(const Mat3& R) {
  if ((R.transpose() * R - Mat3::Identity()).norm() > 1e-6 ||
      R.determinant() < 0.0) {
    throw std::domain_error("rot_to_quat: input is not a rotation");
  }
  const Eigen::Quaterniond q(R);
  Quat out(q.w(), q.x(), q.y(), q.z());
  if (out(0) < 0.0) out = -out;
  return out;
}

Mat3 triad(const Vec3& tilt_b, const Vec3& mag_b, const Vec3& tilt_w,
           const Vec3& mag_w) {
  const Vec3 t1 = normalize_s2(tilt_b);
  const Vec3 mb = normalize_s2(mag_b);
  const Vec3 w1 = normalize_s2(tilt_w);
  const Vec3 mw = normalize_s2(mag_w);
  const Vec3 cb = t1.cross(mb);
  const Vec3 cw = w1.cross(mw);
  if (cb.norm() < 1e-6 || cw.norm() < 1e-6) {
    throw std::domain_error("triad: collinear observation pair");
  }
  const Vec3 t2 = cb / cb.norm();
  const Vec3 t3 = t1.cross(t2);
  const Vec3 w2 = cw / cw.norm();
  const Vec3 w3 = w1.cross(w2);
  Mat3 Tb, Tw;
  Tb.col(0) = t1;
  Tb.col(1) = t2;
  Tb.col(2) = t3;
  Tw.col(0) = w1;
  Tw.col(1) = w2;
  Tw.col(2) = w3;
  return Tw * Tb.transpose();
}

double geodesic_angle(const Mat3& A, const Mat3& B) {
  const double c = ((A.transpose() * B).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

double vector_angle(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace vahrs
