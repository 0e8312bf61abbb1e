#include "vahrs/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <variant>

#include "json.hpp"
#include "vahrs/analysis.hpp"
#include "vahrs/attitude_observers.hpp"
#include "vahrs/rng.hpp"
#include "vahrs/tilt_observers.hpp"

namespace vahrs {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

const json* find(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double as_num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double req_num(const json& j, const char* key, const std::string& path) {
  const json* p = find(j, key);
  if (!p) fail(path + "." + key, "missing");
  return as_num(*p, path + "." + key);
}

double opt_num(const json& j, const char* key, const std::string& path,
               double def) {
  const json* p = find(j, key);
  return p ? as_num(*p, path + "." + key) : def;
}

std::uint64_t opt_u64(const json& j, const char* key, const std::string& path,
                      std::uint64_t def) {
  const json* p = find(j, key);
  if (!p) return def;
  if (!p->is_number_integer() && !p->is_number_unsigned()) {
    fail(path + "." + key, "expected a non-negative integer");
  }
  if (p->is_number_integer() && p->get<std::int64_t>() < 0) {
    fail(path + "." + key, "expected a non-negative integer");
  }
  return p->get<std::uint64_t>();
}

Vec3 as_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    out(i) = as_num(j[static_cast<size_t>(i)],
                    path + "[" + std::to_string(i) + "]");
  }
  return out;
}

Mat3 as_mat3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 9) {
    fail(path, "expected 9 numbers (row-major)");
  }
  Mat3 out;
  for (int i = 0; i < 9; ++i) {
    out(i / 3, i % 3) = as_num(j[static_cast<size_t>(i)],
                               path + "[" + std::to_string(i) + "]");
  }
  return out;
}

Wave as_wave(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected {amp, freq_hz, phase}");
  Wave w;
  w.amp = req_num(j, "amp", path);
  w.freq_hz = opt_num(j, "freq_hz", path, 0.0);
  w.phase = opt_num(j, "phase", path, 0.0);
  return w;
}

void parse_waves(const json& j, const std::string& path,
                 std::array<Wave, 3>& out) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected 3 wave objects");
  for (int i = 0; i < 3; ++i) {
    out[static_cast<size_t>(i)] = as_wave(
        j[static_cast<size_t>(i)], path + "[" + std::to_string(i) + "]");
  }
}

void parse_channel(const json& j, const std::string& path, NoiseChannel& ch) {
  if (!j.is_object()) fail(path, "expected {stddev, bias}");
  ch.stddev = opt_num(j, "stddev", path, ch.stddev);
  if (const json* b = find(j, "bias")) ch.bias = as_vec3(*b, path + ".bias");
}

EstimatorKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "two_step") return EstimatorKind::kTwoStep;
  if (s == "one_step") return EstimatorKind::kOneStep;
  if (s == "hua") return EstimatorKind::kHua;
  if (s == "martin_tilt") return EstimatorKind::kMartinTilt;
  if (s == "attitude") return EstimatorKind::kAttitude;
  if (s == "hua_attitude") return EstimatorKind::kHuaAttitude;
  if (s == "martin_attitude") return EstimatorKind::kMartinAttitude;
  fail(path, "unknown estimator kind '" + s + "'");
}

bool has_yaw(EstimatorKind k) {
  return k == EstimatorKind::kAttitude || k == EstimatorKind::kHuaAttitude ||
         k == EstimatorKind::kMartinAttitude;
}

InitPolicy parse_init(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  const std::string s = j.get<std::string>();
  if (s == "truth") return InitPolicy::kTruth;
  if (s == "undesired" || s == "undesired_equilibrium") {
    return InitPolicy::kUndesired;
  }
  if (s == "explicit") return InitPolicy::kExplicit;
  fail(path, "expected truth | undesired_equilibrium | explicit");
}

EstimatorConfig parse_estimator(const json& j, const std::string& path,
                                InitPolicy default_init) {
  if (!j.is_object()) fail(path, "expected an object");
  EstimatorConfig e;
  e.init = default_init;
  const json* n = find(j, "name");
  if (!n || !n->is_string()) fail(path + ".name", "missing string");
  e.name = n->get<std::string>();
  if (e.name.empty() ||
      e.name.find_first_not_of("abcdefghijklmnopqrstuvwxyz"
                               "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
          std::string::npos) {
    fail(path + ".name", "use [A-Za-z0-9_-]+");
  }
  const json* k = find(j, "kind");
  if (!k || !k->is_string()) fail(path + ".kind", "missing string");
  e.kind = parse_kind(k->get<std::string>(), path + ".kind");

  if (const json* in = find(j, "init")) {
    e.init = parse_init(*in, path + ".init");
  }
  if (e.init == InitPolicy::kExplicit) {
    const json* st = find(j, "state");
    if (!st || !st->is_object()) {
      fail(path + ".state", "explicit init needs a state object");
    }
    const std::string sp = path + ".state";
    if (const json* p = find(*st, "xhat1")) {
      e.explicit_init.xhat1 = as_vec3(*p, sp + ".xhat1");
    }
    if (const json* p = find(*st, "xhat2")) {
      e.explicit_init.xhat2 = as_vec3(*p, sp + ".xhat2");
    }
    if (const json* p = find(*st, "xhat2_prime")) {
      e.explicit_init.xhat2_prime = as_vec3(*p, sp + ".xhat2_prime");
    }
    if (const json* p = find(*st, "xhat3_prime")) {
      e.explicit_init.xhat3_prime = as_vec3(*p, sp + ".xhat3_prime");
    }
    if (const json* p = find(*st, "Rhat")) {
      e.explicit_init.Rhat = as_mat3(*p, sp + ".Rhat");
    }
  }

  switch (e.kind) {
    case EstimatorKind::kTwoStep:
    case EstimatorKind::kAttitude: {
      const json* a = find(j, "alphas");
      if (!a || !a->is_array() || a->empty()) {
        fail(path + ".alphas", "expected a non-empty array");
      }
      e.alphas.resize(static_cast<Eigen::Index>(a->size()));
      for (size_t i = 0; i < a->size(); ++i) {
        e.alphas(static_cast<Eigen::Index>(i)) =
            as_num((*a)[i], path + ".alphas[" + std::to_string(i) + "]");
      }
      if (e.kind == EstimatorKind::kAttitude) {
        e.rho1 = req_num(j, "rho1", path);
        e.rho2 = opt_num(j, "rho2", path, 0.0);
        e.mu = opt_num(j, "mu", path, 0.0);
        e.gamma = opt_num(j, "gamma", path, e.rho1);
      } else {
        e.gamma = req_num(j, "gamma", path);
      }
      break;
    }
    case EstimatorKind::kOneStep:
      e.alpha = req_num(j, "alpha", path);
      e.gamma = req_num(j, "gamma", path);
      break;
    case EstimatorKind::kHua:
    case EstimatorKind::kHuaAttitude:
      e.k1v = req_num(j, "k1v", path);
      e.k2v = opt_num(j, "k2v", path, 0.0);
      e.k1r = req_num(j, "k1r", path);
      if (e.kind == EstimatorKind::kHuaAttitude) {
        e.k2r = opt_num(j, "k2r", path, 0.0);
      }
      break;
    case EstimatorKind::kMartinTilt:
    case EstimatorKind::kMartinAttitude:
      e.L = req_num(j, "L", path);
      e.K = req_num(j, "K", path);
      e.M = req_num(j, "M", path);
      break;
  }
  return e;
}

struct TwoStepRunner {
  TwoStepGains gains;
  TwoStepState st;
};

using Runner =
    std::variant<TwoStepRunner, OneStepState, HuaState, MartinTiltState,
                 AttitudeObserverState, HuaAttitudeState, MartinAttitudeState>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Runner make_runner(const EstimatorConfig& e, const TrueState& s0,
                   const ImuSample& y0, const Vec3& m_unit, double g0) {
  const bool first_order_chain = (e.kind == EstimatorKind::kTwoStep ||
                                  e.kind == EstimatorKind::kAttitude) &&
                                 e.alphas.size() == 1;
  Mat3 Rhat0 = s0.R;
  Vec3 xhat1 = s0.v;
  Vec3 xhat2 = s0.R.transpose() * Vec3::UnitZ();
  Vec3 xhat2_prime = xhat2;
  Vec3 xhat3_prime = s0.R.transpose() * m_unit;
  // with a single chain state xhat1 absorbs the gravity integral, so its
  // rest point sits g0/alpha1 above the true velocity
  if (first_order_chain) xhat1 = s0.v + (g0 / e.alphas(0)) * xhat2;
  if (e.init == InitPolicy::kUndesired) {
    Rhat0 = undesired_init(m_unit) * s0.R;
    xhat1 = y0.y_v;
    xhat2 = Rhat0.transpose() * Vec3::UnitZ();
    xhat2_prime = xhat2;
    xhat3_prime = Rhat0.transpose() * m_unit;
  } else if (e.init == InitPolicy::kExplicit) {
    const ExplicitInit& x = e.explicit_init;
    if (x.Rhat) Rhat0 = *x.Rhat;
    if (x.xhat1) xhat1 = *x.xhat1;
    if (x.xhat2) xhat2 = *x.xhat2;
    if (x.xhat2_prime) xhat2_prime = *x.xhat2_prime;
    if (x.xhat3_prime) xhat3_prime = *x.xhat3_prime;
  }
  switch (e.kind) {
    case EstimatorKind::kTwoStep: {
      TwoStepRunner r{make_two_step_gains(e.alphas, e.gamma),
                      make_two_step_state(static_cast<int>(e.alphas.size()),
                                          xhat1, xhat2_prime, xhat2)};
      if (r.st.n == 1) {
        r.st.xhat2_prime =
            -(r.gains.alphas(0) / g0) * (y0.y_v - r.st.xhat1);
      }
      return r;
    }
    case EstimatorKind::kOneStep:
      return make_one_step_state(e.alpha, e.gamma, g0, xhat1, xhat2);
    case EstimatorKind::kHua:
      return make_hua_state(e.k1v, e.k2v, e.k1r, g0, xhat1, xhat2);
    case EstimatorKind::kMartinTilt:
      return make_martin_tilt_state(e.L, e.K, e.M, xhat1, xhat2_prime,
                                    xhat3_prime);
    case EstimatorKind::kAttitude: {
      TwoStepGains g = make_two_step_gains(e.alphas, e.gamma);
      TwoStepState tilt = make_two_step_state(
          static_cast<int>(e.alphas.size()), xhat1, xhat2_prime, xhat2);
      if (tilt.n == 1) {
        tilt.xhat2_prime = -(g.alphas(0) / g0) * (y0.y_v - tilt.xhat1);
      }
      return make_attitude_state(Rhat0, tilt, g, e.rho1, e.rho2, e.mu);
    }
    case EstimatorKind::kHuaAttitude:
      return make_hua_attitude_state(Rhat0, xhat1, e.k1v, e.k2v, e.k1r,
                                     e.k2r, g0);
    case EstimatorKind::kMartinAttitude:
      return make_martin_attitude_state(
          Rhat0, make_martin_tilt_state(e.L, e.K, e.M, xhat1, xhat2_prime,
                                        xhat3_prime));
  }
  throw std::logic_error("make_runner: unreachable");
}

void step_runner(Runner& r, const ImuSample& y, const Vec3& m, double g0,
                 double dt) {
  std::visit(
      overloaded{
          [&](TwoStepRunner& x) {
            x.st = two_step_step(x.st, x.gains, y, g0, dt);
          },
          [&](OneStepState& x) { x = one_step_step(x, y, g0, dt); },
          [&](HuaState& x) { x = hua_step(x, y, g0, dt); },
          [&](MartinTiltState& x) { x = martin_tilt_step(x, y, g0, dt); },
          [&](AttitudeObserverState& x) {
            x = attitude_step(x, y, m, g0, dt);
          },
          [&](HuaAttitudeState& x) { x = hua_attitude_step(x, y, m, g0, dt); },
          [&](MartinAttitudeState& x) {
            x = martin_attitude_step(x, y, m, g0, dt);
          },
      },
      r);
}

void append_columns(const EstimatorConfig& e, std::vector<std::string>& cols) {
  const auto push3 = [&](const char* field) {
    for (int i = 0; i < 3; ++i) {
      cols.push_back(e.name + "." + field + "." + std::to_string(i));
    }
  };
  const auto push9 = [&](const char* field) {
    for (int i = 0; i < 9; ++i) {
      cols.push_back(e.name + "." + field + "." + std::to_string(i));
    }
  };
  const auto push1 = [&](const char* field) {
    cols.push_back(e.name + "." + field);
  };
  switch (e.kind) {
    case EstimatorKind::kTwoStep:
      push3("xhat1");
      push3("xhat2_prime");
      push3("xhat2");
      push1("tilt_angle");
      push1("tilt_angle_prime");
      break;
    case EstimatorKind::kOneStep:
    case EstimatorKind::kHua:
      push3("xhat1");
      push3("xhat2");
      push1("tilt_angle");
      break;
    case EstimatorKind::kMartinTilt:
      push3("xhat1");
      push3("xhat2_prime");
      push3("xhat3_prime");
      push1("tilt_angle");
      break;
    case EstimatorKind::kAttitude:
      push9("Rhat");
      push3("xhat1");
      push3("xhat2_prime");
      push1("tilt_angle");
      push1("yaw_angle");
      push1("marker_angle");
      break;
    case EstimatorKind::kHuaAttitude:
      push9("Rhat");
      push3("xhat1");
      push3("xhat2");
      push1("tilt_angle");
      push1("yaw_angle");
      push1("marker_angle");
      break;
    case EstimatorKind::kMartinAttitude:
      push9("Rhat");
      push3("xhat1");
      push3("xhat2_prime");
      push3("xhat3_prime");
      push1("tilt_angle");
      push1("yaw_angle");
      push1("marker_angle");
      break;
  }
  push1("valid");
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void append_values(const Runner& r, const TrueState& s, const Vec3& m_unit,
                   std::vector<double>& row, double& tilt_angle,
                   double& yaw_angle, bool& valid) {
  const auto push3 = [&](const Vec3& v) {
    row.push_back(v.x());
    row.push_back(v.y());
    row.push_back(v.z());
  };
  const auto push9 = [&](const Mat3& R) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) row.push_back(R(i, j));
    }
  };
  tilt_angle = kNan;
  yaw_angle = kNan;
  valid = true;

  double marker = kNan;
  const auto attitude_metrics = [&](const Mat3& Rhat) {
    const TiltMetrics tm =
        tilt_metrics(s, Rhat.row(2).transpose(), true);
    tilt_angle = tm.angle;
    valid = valid && tm.valid;
    try {
      yaw_angle = yaw_proxy_angle(s.R, Rhat, m_unit);
      marker = marker_angle(s.R, Rhat, m_unit);
    } catch (const std::domain_error&) {
      yaw_angle = kNan;
      marker = kNan;
      valid = false;
    }
  };

  std::visit(
      overloaded{
          [&](const TwoStepRunner& x) {
            const TiltMetrics tm = tilt_metrics(s, x.st.xhat2, true);
            const TiltMetrics tp = tilt_metrics(s, x.st.xhat2_prime, false);
            tilt_angle = tm.angle;
            valid = tm.valid && tp.valid;
            push3(x.st.xhat1);
            push3(x.st.xhat2_prime);
            push3(x.st.xhat2);
            row.push_back(tm.angle);
            row.push_back(tp.angle);
          },
          [&](const OneStepState& x) {
            const TiltMetrics tm = tilt_metrics(s, x.xhat2, true);
            tilt_angle = tm.angle;
            valid = tm.valid;
            push3(x.xhat1);
            push3(x.xhat2);
            row.push_back(tm.angle);
          },
          [&](const HuaState& x) {
            const TiltMetrics tm = tilt_metrics(s, x.xhat2, true);
            tilt_angle = tm.angle;
            valid = tm.valid;
            push3(x.xhat1);
            push3(x.xhat2);
            row.push_back(tm.angle);
          },
          [&](const MartinTiltState& x) {
            const TiltMetrics tm = tilt_metrics(s, x.xhat2_prime, false);
            tilt_angle = tm.angle;
            valid = tm.valid;
            push3(x.xhat1);
            push3(x.xhat2_prime);
            push3(x.xhat3_prime);
            row.push_back(tm.angle);
          },
          [&](const AttitudeObserverState& x) {
            attitude_metrics(x.Rhat);
            push9(x.Rhat);
            push3(x.tilt.xhat1);
            push3(x.tilt.xhat2_prime);
            row.push_back(tilt_angle);
            row.push_back(yaw_angle);
            row.push_back(marker);
          },
          [&](const HuaAttitudeState& x) {
            attitude_metrics(x.Rhat);
            push9(x.Rhat);
            push3(x.xhat1);
            push3(Vec3(x.Rhat.row(2).transpose()));
            row.push_back(tilt_angle);
            row.push_back(yaw_angle);
            row.push_back(marker);
          },
          [&](const MartinAttitudeState& x) {
            valid = x.valid;
            attitude_metrics(x.Rhat);
            push9(x.Rhat);
            push3(x.tilt.xhat1);
            push3(x.tilt.xhat2_prime);
            push3(x.tilt.xhat3_prime);
            row.push_back(tilt_angle);
            row.push_back(yaw_angle);
            row.push_back(marker);
          },
      },
      r);
  row.push_back(valid ? 1.0 : 0.0);
}

double convergence_time(const std::vector<double>& t,
                        const std::vector<double>& angle,
                        const std::vector<unsigned char>& valid, double thr,
                        double hold) {
  size_t start = SIZE_MAX;
  for (size_t i = 0; i < t.size(); ++i) {
    const bool ok = valid[i] && angle[i] < thr;
    if (!ok) {
      start = SIZE_MAX;
      continue;
    }
    if (start == SIZE_MAX) start = i;
    if (t[i] - t[start] >= hold - 1e-12) return t[start];
  }
  return kNan;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("json: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");

  ScenarioConfig cfg;
  cfg.trajectory = default_trajectory();
  cfg.noise = default_noise(0);

  if (const json* t = find(j, "trajectory")) {
    if (!t->is_object()) fail("trajectory", "expected an object");
    cfg.trajectory.duration =
        opt_num(*t, "duration", "trajectory", cfg.trajectory.duration);
    cfg.trajectory.dt = opt_num(*t, "dt", "trajectory", cfg.trajectory.dt);
    cfg.trajectory.seed =
        opt_u64(*t, "seed", "trajectory", cfg.trajectory.seed);
    if (const json* w = find(*t, "omega_waves")) {
      parse_waves(*w, "trajectory.omega_waves", cfg.trajectory.omega_waves);
    }
    if (const json* w = find(*t, "vel_waves")) {
      parse_waves(*w, "trajectory.vel_waves", cfg.trajectory.vel_waves);
    }
    if (const json* r = find(*t, "R0")) {
      const Mat3 R0 = as_mat3(*r, "trajectory.R0");
      if ((R0.transpose() * R0 - Mat3::Identity()).norm() > 1e-6 ||
          R0.determinant() < 0.0) {
        fail("trajectory.R0", "not a rotation");
      }
      cfg.trajectory.R0 = project_so3(R0);
    }
  }
  if (const json* g = find(j, "g0")) {
    cfg.g0 = as_num(*g, "g0");
    if (!(cfg.g0 > 0.0)) fail("g0", "must be positive");
  }
  if (const json* m = find(j, "marker")) {
    cfg.marker = as_vec3(*m, "marker");
    if (cfg.marker.norm() < kNormEps) fail("marker", "near-zero norm");
  }
  if (const json* n = find(j, "noise")) {
    if (n->is_string() && n->get<std::string>() == "none") {
      cfg.noise_enabled = false;
    } else if (n->is_object()) {
      cfg.noise_enabled = true;
      if (const json* e = find(*n, "enabled")) {
        if (!e->is_boolean()) fail("noise.enabled", "expected a boolean");
        cfg.noise_enabled = e->get<bool>();
      }
      cfg.noise.seed = opt_u64(*n, "seed", "noise", cfg.noise.seed);
      if (const json* c = find(*n, "vel")) {
        parse_channel(*c, "noise.vel", cfg.noise.vel);
      }
      if (const json* c = find(*n, "gyro")) {
        parse_channel(*c, "noise.gyro", cfg.noise.gyro);
      }
      if (const json* c = find(*n, "accel")) {
        parse_channel(*c, "noise.accel", cfg.noise.accel);
      }
      if (const json* c = find(*n, "mag")) {
        parse_channel(*c, "noise.mag", cfg.noise.mag);
      }
    } else {
      fail("noise", "expected an object or \"none\"");
    }
  }
  if (const json* w = find(j, "window")) {
    if (!w->is_array() || w->size() != 2) fail("window", "expected [t0, t1]");
    cfg.window_t0 = as_num((*w)[0], "window[0]");
    cfg.window_t1 = as_num((*w)[1], "window[1]");
    if (!(cfg.window_t0 < cfg.window_t1)) fail("window", "need t0 < t1");
  }
  if (const json* c = find(j, "convergence")) {
    if (!c->is_object()) fail("convergence", "expected an object");
    cfg.convergence_threshold = opt_num(*c, "threshold", "convergence",
                                        cfg.convergence_threshold);
    cfg.convergence_hold =
        opt_num(*c, "hold", "convergence", cfg.convergence_hold);
    if (!(cfg.convergence_threshold > 0.0) || cfg.convergence_hold < 0.0) {
      fail("convergence", "need threshold > 0 and hold >= 0");
    }
  }
  InitPolicy default_init = InitPolicy::kTruth;
  if (const json* in = find(j, "init_policy")) {
    default_init = parse_init(*in, "init_policy");
  }
  if (const json* es = find(j, "estimators")) {
    if (!es->is_array()) fail("estimators", "expected an array");
    for (size_t i = 0; i < es->size(); ++i) {
      cfg.estimators.push_back(parse_estimator(
          (*es)[i], "estimators[" + std::to_string(i) + "]", default_init));
    }
    for (size_t a = 0; a < cfg.estimators.size(); ++a) {
      for (size_t b = a + 1; b < cfg.estimators.size(); ++b) {
        if (cfg.estimators[a].name == cfg.estimators[b].name) {
          fail("estimators[" + std::to_string(b) + "].name",
               "duplicate '" + cfg.estimators[b].name + "'");
        }
      }
    }
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  const Vec3 m_unit = normalize_s2(cfg.marker);
  ScenarioResult out;
  out.record.truth = gen_trajectory(cfg.trajectory);
  const std::vector<TrueState>& states = out.record.truth;
  out.record.samples.reserve(states.size());
  for (const TrueState& s : states) {
    out.record.samples.push_back(synth_measurements(s, m_unit, cfg.g0));
  }
  if (cfg.noise_enabled) {
    Rng rng(cfg.noise.seed);
    for (ImuSample& y : out.record.samples) y = add_noise(y, cfg.noise, rng);
  }

  std::vector<Runner> runners;
  runners.reserve(cfg.estimators.size());
  for (const EstimatorConfig& e : cfg.estimators) {
    append_columns(e, out.record.est_columns);
    runners.push_back(
        make_runner(e, states[0], out.record.samples[0], m_unit, cfg.g0));
  }

  struct Trace {
    std::vector<double> tilt, yaw;
    std::vector<unsigned char> valid;
  };
  std::vector<Trace> traces(runners.size());
  std::vector<double> tgrid;
  tgrid.reserve(states.size());
  const double dt = cfg.trajectory.dt;

  out.record.est_values.assign(states.size(), {});
  for (size_t k = 0; k < states.size(); ++k) {
    tgrid.push_back(states[k].t);
    std::vector<double>& row = out.record.est_values[k];
    row.reserve(out.record.est_columns.size());
    for (size_t i = 0; i < runners.size(); ++i) {
      double tilt = kNan, yaw = kNan;
      bool valid = true;
      append_values(runners[i], states[k], m_unit, row, tilt, yaw, valid);
      traces[i].tilt.push_back(tilt);
      traces[i].yaw.push_back(yaw);
      traces[i].valid.push_back(valid ? 1 : 0);
    }
    if (k + 1 < states.size()) {
      const ImuSample& y = out.record.samples[k];
      for (Runner& r : runners) step_runner(r, y, m_unit, cfg.g0, dt);
    }
  }

  out.report.window_t0 = cfg.window_t0;
  out.report.window_t1 = cfg.window_t1;
  for (size_t i = 0; i < runners.size(); ++i) {
    const Trace& tr = traces[i];
    ReportRow row;
    row.name = cfg.estimators[i].name;
    try {
      row.mean_tilt_angle_rad =
          mean_error_window(tgrid, tr.tilt, tr.valid, cfg.window_t0,
                            cfg.window_t1)
              .mean;
    } catch (const std::invalid_argument&) {
    }
    if (has_yaw(cfg.estimators[i].kind)) {
      try {
        row.mean_yaw_proxy_rad =
            mean_error_window(tgrid, tr.yaw, tr.valid, cfg.window_t0,
                              cfg.window_t1)
                .mean;
      } catch (const std::invalid_argument&) {
      }
    }
    row.convergence_time_s =
        convergence_time(tgrid, tr.tilt, tr.valid, cfg.convergence_threshold,
                         cfg.convergence_hold);
    for (unsigned char v : tr.valid) row.invalid_samples += v ? 0 : 1;
    out.report.rows.push_back(row);
  }
  sort_report_rows(out.report.rows);
  return out;
}

std::vector<EstimatorValidation> validate_estimators(
    const ScenarioConfig& cfg) {
  const Vec3 m_unit = normalize_s2(cfg.marker);
  TrueState s0;
  ImuSample y0 = synth_measurements(s0, m_unit, cfg.g0);
  std::vector<EstimatorValidation> out;
  for (const EstimatorConfig& e : cfg.estimators) {
    EstimatorValidation v;
    v.name = e.name;
    try {
      make_runner(e, s0, y0, m_unit, cfg.g0);
    } catch (const std::exception& ex) {
      v.error = ex.what();
    }
    out.push_back(v);
  }
  return out;
}

void sort_report_rows(std::vector<ReportRow>& rows) {
  const auto key = [](double x) {
    return std::isnan(x) ? std::numeric_limits<double>::infinity() : x;
  };
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const ReportRow& a, const ReportRow& b) {
                     const double at = key(a.mean_tilt_angle_rad);
                     const double bt = key(b.mean_tilt_angle_rad);
                     if (at != bt) return at < bt;
                     const double ay = key(a.mean_yaw_proxy_rad);
                     const double by = key(b.mean_yaw_proxy_rad);
                     if (ay != by) return ay < by;
                     return a.name < b.name;
                   });
}

static const char* kReportHeader =
    "estimator,mean_tilt_angle_rad,mean_yaw_proxy_rad,convergence_time_s,"
    "invalid_samples";

void write_report(const std::string& path, const Report& report) {
  std::vector<ReportRow> rows = report.rows;
  sort_report_rows(rows);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_report: cannot open " + path);
  out << "# window " << fmt17(report.window_t0) << " "
      << fmt17(report.window_t1) << "\n";
  out << kReportHeader << "\n";
  for (const ReportRow& r : rows) {
    out << r.name << "," << fmt17(r.mean_tilt_angle_rad) << ","
        << fmt17(r.mean_yaw_proxy_rad) << "," << fmt17(r.convergence_time_s)
        << "," << r.invalid_samples << "\n";
  }
  if (!out) throw std::runtime_error("write_report: write failed: " + path);
}

namespace {

double parse_double_field(const std::string& tok, const std::string& where) {
  const char* s = tok.c_str();
  char* end = nullptr;
  const double x = std::strtod(s, &end);
  if (end == s || *end != '\0') {
    throw std::runtime_error("read_report: bad number '" + tok + "' in " +
                             where);
  }
  return x;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Report read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_report: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# window ", 0) != 0) {
    throw std::runtime_error("read_report: missing '# window' line in " +
                             path);
  }
  Report rep;
  {
    std::istringstream ss(line.substr(9));
    if (!(ss >> rep.window_t0 >> rep.window_t1)) {
      throw std::runtime_error("read_report: bad window line in " + path);
    }
  }
  if (!std::getline(in, line) || line != kReportHeader) {
    throw std::runtime_error("read_report: bad header in " + path);
  }
  long lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> tok = split_csv(line);
    if (tok.size() != 5) {
      throw std::runtime_error("read_report: line " + std::to_string(lineno) +
                               ": expected 5 fields");
    }
    const std::string where = path + ":" + std::to_string(lineno);
    ReportRow r;
    r.name = tok[0];
    r.mean_tilt_angle_rad = parse_double_field(tok[1], where);
    r.mean_yaw_proxy_rad = parse_double_field(tok[2], where);
    r.convergence_time_s = parse_double_field(tok[3], where);
    r.invalid_samples =
        static_cast<long>(parse_double_field(tok[4], where));
    rep.rows.push_back(r);
  }
  return rep;
}

}  // namespace vahrs
