#pragma once

#include <Eigen/Dense>

namespace vahrs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
// Quaternions are scalar-first [q0, qx, qy, qz] with the Hamilton product.
using Quat = Eigen::Vector4d;

inline constexpr double kNormEps = 1e-9;

// Cross-product matrix: skew(v) * w == v.cross(w).
Mat3 skew(const Vec3& v);

// Checks S(v)w = v x w, S(v)^T = -S(v), S(v)v = 0, S(v)^2 = vv^T - |v|^2 I,
// S(Rv) = R S(v) R^T, and S(v x w) = wv^T - vw^T, all within tol.
bool check_skew_identities(const Vec3& v, const Vec3& w, const Mat3& R,
                           double tol = 1e-10);

// Rodrigues formula; series fallback near zero angle.
Mat3 exp_so3(const Vec3& w);

// Nearest rotation via Newton polar iteration X <- (X + X^-T) / 2.
// Throws std::domain_error when det(M) <= 1e-6.
Mat3 project_so3(const Mat3& M);

// Throws std::domain_error when |v| < kNormEps.
Vec3 normalize_s2(const Vec3& v);

Quat quat_mul(const Quat& a, const Quat& b);
Quat quat_conj(const Quat& q);
Quat quat_normalize(const Quat& q);

// R(q) = I + 2 q0 S(qv) + 2 S(qv)^2 for unit q.
Mat3 quat_to_rot(const Quat& q);

// Throws std::domain_error when R is not a rotation (tolerance 1e-6).
// Returns the representative with q0 >= 0.
Quat rot_to_quat(const Mat3& R);

// Rotation taking body observations (tilt_b, mag_b) to world references
// (tilt_w, mag_w), prioritizing the tilt pair exactly.
// Throws std::domain_error when either pair is collinear (angle sine < 1e-6).
Mat3 triad(const Vec3& tilt_b, const Vec3& mag_b, const Vec3& tilt_w,
           const Vec3& mag_w);

// Geodesic distance on SO(3): acos((trace(A^T B) - 1) / 2), clamped.
double geodesic_angle(const Mat3& A, const Mat3& B);

// Angle between two nonzero vectors via atan2, stable near 0 and pi.
double vector_angle(const Vec3& a, const Vec3& b);

}  // namespace vahrs
