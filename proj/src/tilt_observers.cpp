#include "vahrs/tilt_observers.hpp"

#include <array>
#include <stdexcept>

namespace vahrs {

namespace {

constexpr int kMaxOrder = 8;

// Fixed-capacity stack of Vec3 blocks for the RK4 stages.
struct Blocks {
  std::array<Vec3, kMaxOrder + 2> b{};
  int count = 0;
};

Blocks axpy(const Blocks& x, double a, const Blocks& d) {
  Blocks out;
  out.count = x.count;
  for (int i = 0; i < x.count; ++i) out.b[i] = x.b[i] + a * d.b[i];
  return out;
}

template <typename Rhs>
Blocks rk4(const Blocks& x0, double dt, const Rhs& rhs) {
  const Blocks k1 = rhs(x0);
  const Blocks k2 = rhs(axpy(x0, 0.5 * dt, k1));
  const Blocks k3 = rhs(axpy(x0, 0.5 * dt, k2));
  const Blocks k4 = rhs(axpy(x0, dt, k3));
  Blocks out;
  out.count = x0.count;
  for (int i = 0; i < x0.count; ++i) {
    out.b[i] = x0.b[i] + (dt / 6.0) * (k1.b[i] + 2.0 * k2.b[i] +
                                       2.0 * k3.b[i] + k4.b[i]);
  }
  return out;
}

}  // namespace

TwoStepGains make_two_step_gains(const Eigen::VectorXd& alphas, double gamma) {
  companion(alphas);  // throws when not Hurwitz
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("make_two_step_gains: gamma must be positive");
  }
  return TwoStepGains{alphas, gamma};
}

TwoStepState make_two_step_state(int n, const Vec3& xhat1,
                                 const Vec3& xhat2_prime, const Vec3& xhat2) {
  if (n < 1 || n > kMaxOrder) {
    throw std::invalid_argument("make_two_step_state: order out of range");
  }
  TwoStepState st;
  st.n = n;
  st.xhat1 = xhat1;
  st.xhat2_prime = xhat2_prime;
  st.xhat2 = normalize_s2(xhat2);
  if (n >= 3) st.p.assign(static_cast<size_t>(n - 2), Vec3::Zero());
  return st;
}

TwoStepState two_step_step(const TwoStepState& st, const TwoStepGains& gains,
                           const ImuSample& y, double g0, double dt) {
  const int n = st.n;
  if (static_cast<int>(gains.alphas.size()) != n) {
    throw std::invalid_argument("two_step_step: gain order mismatch");
  }
  const double a1_over_g0 = gains.alphas(0) / g0;
  const double gamma = gains.gamma;

  if (n == 1) {
    // state blocks: [xhat1, xhat2]
    Blocks x0;
    x0.count = 2;
    x0.b[0] = st.xhat1;
    x0.b[1] = st.xhat2;
    const auto rhs = [&](const Blocks& s) {
      const Vec3& x1 = s.b[0];
      const Vec3& x2 = s.b[1];
      const Vec3 x2p = -a1_over_g0 * (y.y_v - x1);
      Blocks d;
      d.count = 2;
      d.b[0] = -y.y_g.cross(x1) + y.y_a - g0 * x2p;
      const Vec3 w = y.y_g - gamma * x2.cross(x2p);
      d.b[1] = -w.cross(x2);
      return d;
    };
    const Blocks x1 = rk4(x0, dt, rhs);
    TwoStepState out = st;
    out.xhat1 = x1.b[0];
    out.xhat2 = normalize_s2(x1.b[1]);
    out.xhat2_prime = -a1_over_g0 * (y.y_v - out.xhat1);
    return out;
  }

  // state blocks: [xhat2_prime, p_2 .. p_(n-1), xhat1, xhat2]
  const int np = n - 2;
  Blocks x0;
  x0.count = np + 3;
  x0.b[0] = st.xhat2_prime;
  for (int i = 0; i < np; ++i) x0.b[1 + i] = st.p[static_cast<size_t>(i)];
  x0.b[np + 1] = st.xhat1;
  x0.b[np + 2] = st.xhat2;

  const auto rhs = [&](const Blocks& s) {
    const Vec3& x2p = s.b[0];
    const Vec3& x1 = s.b[static_cast<size_t>(np + 1)];
    const Vec3& x2 = s.b[static_cast<size_t>(np + 2)];
    const Vec3 pn = y.y_v - x1;
    const auto p_i = [&](int i) -> const Vec3& {  // i in 2..n
      return i == n ? pn : s.b[static_cast<size_t>(i - 1)];
    };
    Blocks d;
    d.count = np + 3;
    d.b[0] = -y.y_g.cross(x2p) - a1_over_g0 * p_i(2);
    for (int i = 2; i <= n - 1; ++i) {
      d.b[static_cast<size_t>(i - 1)] = -y.y_g.cross(p_i(i)) + p_i(i + 1);
    }
    Vec3 corr = Vec3::Zero();
    for (int i = 2; i <= n; ++i) corr += gains.alphas(i - 1) * p_i(i);
    d.b[static_cast<size_t>(np + 1)] =
        -y.y_g.cross(x1) + y.y_a + corr - g0 * x2p;
    const Vec3 w = y.y_g - gamma * x2.cross(x2p);
    d.b[static_cast<size_t>(np + 2)] = -w.cross(x2);
    return d;
  };

  const Blocks xn = rk4(x0, dt, rhs);
  TwoStepState out = st;
  out.xhat2_prime = xn.b[0];
  for (int i = 0; i < np; ++i) out.p[static_cast<size_t>(i)] = xn.b[1 + i];
  out.xhat1 = xn.b[static_cast<size_t>(np + 1)];
  out.xhat2 = normalize_s2(xn.b[static_cast<size_t>(np + 2)]);
  return out;
}

OneStepState make_one_step_state(double alpha, double gamma, double g0,
                                 const Vec3& xhat1, const Vec3& xhat2) {
  if (!(alpha > 0.0) || !(gamma > 0.0)) {
    throw std::invalid_argument("make_one_step_state: gains must be positive");
  }
  if (gamma * g0 > alpha * alpha) {
    throw std::invalid_argument(
        "make_one_step_state: gain condition gamma*g0 <= alpha^2 violated");
  }
  OneStepState st;
  st.xhat1 = xhat1;
  st.xhat2 = normalize_s2(xhat2);
  st.alpha = alpha;
  st.gamma = gamma;
  return st;
}

OneStepState one_step_step(const OneStepState& st, const ImuSample& y,
                           double g0, double dt) {
  Blocks x0;
  x0.count = 2;
  x0.b[0] = st.xhat1;
  x0.b[1] = st.xhat2;
  const auto rhs = [&](const Blocks& s) {
    const Vec3& x1 = s.b[0];
    const Vec3& x2 = s.b[1];
    const Vec3 xt1 = y.y_v - x1;
    Blocks d;
    d.count = 2;
    d.b[0] = -y.y_g.cross(x1) - g0 * x2 + y.y_a + st.alpha * xt1;
    const Vec3 w = y.y_g + st.gamma * x2.cross(xt1);
    d.b[1] = -w.cross(x2);
    return d;
  };
  const Blocks x1 = rk4(x0, dt, rhs);
  OneStepState out = st;
  out.xhat1 = x1.b[0];
  out.xhat2 = normalize_s2(x1.b[1]);
  return out;
}

HuaState make_hua_state(double k1v, double k2v, double k1r, double g0,
                        const Vec3& xhat1, const Vec3& xhat2) {
  if (!(k1v > 0.0) || k2v < 0.0 || !(k1r > 0.0)) {
    throw std::invalid_argument("make_hua_state: gains must be positive");
  }
  const double bound = (k2v == 0.0) ? k1v * k1v : k1v * k2v;
  if (k1r * g0 > bound) {
    throw std::invalid_argument("make_hua_state: gain condition violated");
  }
  HuaState st;
  st.xhat1 = xhat1;
  st.xhat2 = normalize_s2(xhat2);
  st.k1v = k1v;
  st.k2v = k2v;
  st.k1r = k1r;
  return st;
}

HuaState hua_step(const HuaState& st, const ImuSample& y, double g0,
                  double dt) {
  Blocks x0;
  x0.count = 2;
  x0.b[0] = st.xhat1;
  x0.b[1] = st.xhat2;
  const auto rhs = [&](const Blocks& s) {
    const Vec3& x1 = s.b[0];
    const Vec3& x2 = s.b[1];
    const Vec3 xt1 = y.y_v - x1;
    Blocks d;
    d.count = 2;
    d.b[0] = -y.y_g.cross(x1) - g0 * x2 + y.y_a + st.k1v * xt1 -
             st.k2v * x2.cross(x2.cross(xt1));
    const Vec3 w = y.y_g + st.k1r * x2.cross(xt1);
    d.b[1] = -w.cross(x2);
    return d;
  };
  const Blocks x1 = rk4(x0, dt, rhs);
  HuaState out = st;
  out.xhat1 = x1.b[0];
  out.xhat2 = normalize_s2(x1.b[1]);
  return out;
}

MartinTiltState make_martin_tilt_state(double L, double K, double M,
                                       const Vec3& xhat1,
                                       const Vec3& xhat2_prime,
                                       const Vec3& xhat3_prime) {
  if (!(L > 0.0) || !(K > 0.0) || !(M > 0.0)) {
    throw std::invalid_argument(
        "make_martin_tilt_state: gains must be positive");
  }
  MartinTiltState st;
  st.xhat1 = xhat1;
  st.xhat2_prime = xhat2_prime;
  st.xhat3_prime = xhat3_prime;
  st.L = L;
  st.K = K;
  st.M = M;
  return st;
}

MartinTiltState martin_tilt_step(const MartinTiltState& st, const ImuSample& y,
                                 double g0, double dt) {
  const double a1_over_g0 = (st.L * st.K) / g0;
  const double a2 = st.L + st.K;
  Blocks x0;
  x0.count = 3;
  x0.b[0] = st.xhat2_prime;
  x0.b[1] = st.xhat1;
  x0.b[2] = st.xhat3_prime;
  const auto rhs = [&](const Blocks& s) {
    const Vec3& x2p = s.b[0];
    const Vec3& x1 = s.b[1];
    const Vec3& x3p = s.b[2];
    const Vec3 p2 = y.y_v - x1;
    Blocks d;
    d.count = 3;
    d.b[0] = -y.y_g.cross(x2p) - a1_over_g0 * p2;
    d.b[1] = -y.y_g.cross(x1) + y.y_a + a2 * p2 - g0 * x2p;
    d.b[2] = -y.y_g.cross(x3p) - st.M * (x3p - y.y_m);
    return d;
  };
  const Blocks x1 = rk4(x0, dt, rhs);
  MartinTiltState out = st;
  out.xhat2_prime = x1.b[0];
  out.xhat1 = x1.b[1];
  out.xhat3_prime = x1.b[2];
  return out;
}

Vec3 tilt_of(const TwoStepState& st) { return st.xhat2; }
Vec3 tilt_of(const OneStepState& st) { return st.xhat2; }
Vec3 tilt_of(const HuaState& st) { return st.xhat2; }
Vec3 tilt_of(const MartinTiltState& st) { return normalize_s2(st.xhat2_prime); }

}  // namespace vahrs
