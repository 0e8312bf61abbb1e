#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vahrs/analysis.hpp"
#include "vahrs/attitude_observers.hpp"
#include "vahrs/companion.hpp"
#include "vahrs/measurement.hpp"
#include "vahrs/record.hpp"
#include "vahrs/rng.hpp"
#include "vahrs/scenario.hpp"
#include "vahrs/so3.hpp"
#include "vahrs/tilt_observers.hpp"
#include "vahrs/trajectory.hpp"

namespace py = pybind11;
using namespace vahrs;

namespace {

py::dict report_to_dict(const Report& rep) {
  py::dict out;
  out["window_t0"] = rep.window_t0;
  out["window_t1"] = rep.window_t1;
  py::list rows;
  for (const ReportRow& r : rep.rows) {
    py::dict d;
    d["name"] = r.name;
    d["mean_tilt_angle_rad"] = r.mean_tilt_angle_rad;
    d["mean_yaw_proxy_rad"] = r.mean_yaw_proxy_rad;
    d["convergence_time_s"] = r.convergence_time_s;
    d["invalid_samples"] = r.invalid_samples;
    rows.append(d);
  }
  out["rows"] = rows;
  return out;
}

py::dict record_to_dict(const RunRecord& rec) {
  static const char* kPrefix[] = {
      "t",    "R.0",   "R.1",   "R.2",    "R.3",    "R.4",    "R.5",
      "R.6",  "R.7",   "R.8",   "v.0",    "v.1",    "v.2",    "omega.0",
      "omega.1", "omega.2", "vdot.0", "vdot.1", "vdot.2", "y_v.0", "y_v.1",
      "y_v.2", "y_g.0", "y_g.1", "y_g.2", "y_a.0", "y_a.1", "y_a.2",
      "y_m.0", "y_m.1", "y_m.2"};
  constexpr size_t kPrefixCount = sizeof(kPrefix) / sizeof(kPrefix[0]);
  const size_t rows = rec.truth.size();
  const size_t cols = kPrefixCount + rec.est_columns.size();
  py::array_t<double> data({rows, cols});
  auto buf = data.mutable_unchecked<2>();
  for (size_t k = 0; k < rows; ++k) {
    const TrueState& s = rec.truth[k];
    const ImuSample& y = rec.samples[k];
    size_t c = 0;
    buf(k, c++) = s.t;
    for (int i = 0; i < 9; ++i) buf(k, c++) = s.R(i / 3, i % 3);
    for (const Vec3* v :
         {&s.v, &s.omega, &s.vdot, &y.y_v, &y.y_g, &y.y_a, &y.y_m}) {
      for (int i = 0; i < 3; ++i) buf(k, c++) = (*v)(i);
    }
    for (size_t i = 0; i < rec.est_columns.size(); ++i) {
      buf(k, c++) = rec.est_values[k][i];
    }
  }
  py::list names;
  for (size_t i = 0; i < kPrefixCount; ++i) names.append(kPrefix[i]);
  for (const std::string& c : rec.est_columns) names.append(c);
  py::dict out;
  out["columns"] = names;
  out["data"] = data;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "velocity-aided tilt and attitude observers";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  // ---- so3 ----
  m.def("skew", &skew, py::arg("v"));
  m.def("exp_so3", &exp_so3, py::arg("w"));
  m.def("project_so3", &project_so3, py::arg("A"));
  m.def("normalize_s2", &normalize_s2, py::arg("v"));
  m.def("quat_mul", &quat_mul, py::arg("a"), py::arg("b"));
  m.def("quat_conj", &quat_conj, py::arg("q"));
  m.def("quat_normalize", &quat_normalize, py::arg("q"));
  m.def("quat_to_rot", &quat_to_rot, py::arg("q"));
  m.def("rot_to_quat", &rot_to_quat, py::arg("R"));
  m.def("triad", &triad, py::arg("tilt_b"), py::arg("mag_b"),
        py::arg("tilt_w"), py::arg("mag_w"));
  m.def("geodesic_angle", &geodesic_angle, py::arg("Ra"), py::arg("Rb"));
  m.def("vector_angle", &vector_angle, py::arg("a"), py::arg("b"));

  // ---- companion / Lyapunov ----
  py::class_<CompanionSystem>(m, "CompanionSystem")
      .def_readonly("n", &CompanionSystem::n)
      .def_readonly("alphas", &CompanionSystem::alphas)
      .def_readonly("A_alpha", &CompanionSystem::A_alpha)
      .def_readonly("M_alpha", &CompanionSystem::M_alpha)
      .def_readonly("eigenvalues", &CompanionSystem::eigenvalues)
      .def_readonly("re_alpha", &CompanionSystem::re_alpha);
  m.def("companion", &companion, py::arg("alphas"));
  m.def("solve_lyapunov", &solve_lyapunov, py::arg("sys"));

  // ---- rng ----
  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_u64", &Rng::next_u64)
      .def("next_double", &Rng::next_double)
      .def("next_gaussian", &Rng::next_gaussian)
      .def("next_gaussian3", &Rng::next_gaussian3);

  // ---- trajectory / measurements ----
  py::class_<Wave>(m, "Wave")
      .def(py::init<>())
      .def(py::init([](double amp, double freq_hz, double phase) {
             return Wave{amp, freq_hz, phase};
           }),
           py::arg("amp"), py::arg("freq_hz"), py::arg("phase"))
      .def_readwrite("amp", &Wave::amp)
      .def_readwrite("freq_hz", &Wave::freq_hz)
      .def_readwrite("phase", &Wave::phase);
  py::class_<TrajectorySpec>(m, "TrajectorySpec")
      .def(py::init<>())
      .def_readwrite("duration", &TrajectorySpec::duration)
      .def_readwrite("dt", &TrajectorySpec::dt)
      .def_readwrite("omega_waves", &TrajectorySpec::omega_waves)
      .def_readwrite("vel_waves", &TrajectorySpec::vel_waves)
      .def_readwrite("R0", &TrajectorySpec::R0)
      .def_readwrite("seed", &TrajectorySpec::seed);
  py::class_<TrueState>(m, "TrueState")
      .def(py::init<>())
      .def_readwrite("t", &TrueState::t)
      .def_readwrite("R", &TrueState::R)
      .def_readwrite("v", &TrueState::v)
      .def_readwrite("omega", &TrueState::omega)
      .def_readwrite("vdot", &TrueState::vdot);
  m.def("default_trajectory", &default_trajectory);
  m.def("gen_trajectory", &gen_trajectory, py::arg("spec"));
  py::class_<ImuSample>(m, "ImuSample")
      .def(py::init<>())
      .def_readwrite("t", &ImuSample::t)
      .def_readwrite("y_v", &ImuSample::y_v)
      .def_readwrite("y_g", &ImuSample::y_g)
      .def_readwrite("y_a", &ImuSample::y_a)
      .def_readwrite("y_m", &ImuSample::y_m);
  m.def("synth_measurements", &synth_measurements, py::arg("state"),
        py::arg("m"), py::arg("g0"));
  py::class_<NoiseChannel>(m, "NoiseChannel")
      .def(py::init<>())
      .def_readwrite("stddev", &NoiseChannel::stddev)
      .def_readwrite("bias", &NoiseChannel::bias);
  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def(py::init<>())
      .def_readwrite("vel", &NoiseSpec::vel)
      .def_readwrite("gyro", &NoiseSpec::gyro)
      .def_readwrite("accel", &NoiseSpec::accel)
      .def_readwrite("mag", &NoiseSpec::mag)
      .def_readwrite("seed", &NoiseSpec::seed);
  m.def("default_noise", &default_noise, py::arg("seed"));
  m.def("add_noise", &add_noise, py::arg("clean"), py::arg("spec"),
        py::arg("rng"));

  // ---- tilt observers ----
  py::class_<TwoStepGains>(m, "TwoStepGains")
      .def_readonly("alphas", &TwoStepGains::alphas)
      .def_readonly("gamma", &TwoStepGains::gamma);
  m.def("make_two_step_gains", &make_two_step_gains, py::arg("alphas"),
        py::arg("gamma"));
  py::class_<TwoStepState>(m, "TwoStepState")
      .def_readonly("n", &TwoStepState::n)
      .def_readonly("xhat1", &TwoStepState::xhat1)
      .def_readonly("p", &TwoStepState::p)
      .def_readonly("xhat2_prime", &TwoStepState::xhat2_prime)
      .def_readonly("xhat2", &TwoStepState::xhat2);
  m.def("make_two_step_state", &make_two_step_state, py::arg("n"),
        py::arg("xhat1"), py::arg("xhat2_prime"), py::arg("xhat2"));
  m.def("two_step_step", &two_step_step, py::arg("state"), py::arg("gains"),
        py::arg("sample"), py::arg("g0"), py::arg("dt"));
  py::class_<OneStepState>(m, "OneStepState")
      .def_readonly("xhat1", &OneStepState::xhat1)
      .def_readonly("xhat2", &OneStepState::xhat2)
      .def_readonly("alpha", &OneStepState::alpha)
      .def_readonly("gamma", &OneStepState::gamma);
  m.def("make_one_step_state", &make_one_step_state, py::arg("alpha"),
        py::arg("gamma"), py::arg("g0"), py::arg("xhat1"), py::arg("xhat2"));
  m.def("one_step_step", &one_step_step, py::arg("state"), py::arg("sample"),
        py::arg("g0"), py::arg("dt"));
  py::class_<HuaState>(m, "HuaState")
      .def_readonly("xhat1", &HuaState::xhat1)
      .def_readonly("xhat2", &HuaState::xhat2)
      .def_readonly("k1v", &HuaState::k1v)
      .def_readonly("k2v", &HuaState::k2v)
      .def_readonly("k1r", &HuaState::k1r);
  m.def("make_hua_state", &make_hua_state, py::arg("k1v"), py::arg("k2v"),
        py::arg("k1r"), py::arg("g0"), py::arg("xhat1"), py::arg("xhat2"));
  m.def("hua_step", &hua_step, py::arg("state"), py::arg("sample"),
        py::arg("g0"), py::arg("dt"));
  py::class_<MartinTiltState>(m, "MartinTiltState")
      .def_readonly("xhat1", &MartinTiltState::xhat1)
      .def_readonly("xhat2_prime", &MartinTiltState::xhat2_prime)
      .def_readonly("xhat3_prime", &MartinTiltState::xhat3_prime)
      .def_readonly("L", &MartinTiltState::L)
      .def_readonly("K", &MartinTiltState::K)
      .def_readonly("M", &MartinTiltState::M);
  m.def("make_martin_tilt_state", &make_martin_tilt_state, py::arg("L"),
        py::arg("K"), py::arg("M"), py::arg("xhat1"), py::arg("xhat2_prime"),
        py::arg("xhat3_prime"));
  m.def("martin_tilt_step", &martin_tilt_step, py::arg("state"),
        py::arg("sample"), py::arg("g0"), py::arg("dt"));
  m.def("tilt_of",
        static_cast<Vec3 (*)(const TwoStepState&)>(&tilt_of),
        py::arg("state"));
  m.def("tilt_of", static_cast<Vec3 (*)(const OneStepState&)>(&tilt_of),
        py::arg("state"));
  m.def("tilt_of", static_cast<Vec3 (*)(const HuaState&)>(&tilt_of),
        py::arg("state"));
  m.def("tilt_of", static_cast<Vec3 (*)(const MartinTiltState&)>(&tilt_of),
        py::arg("state"));

  // ---- attitude observers ----
  py::class_<AttitudeObserverState>(m, "AttitudeObserverState")
      .def_readonly("Rhat", &AttitudeObserverState::Rhat)
      .def_readonly("tilt", &AttitudeObserverState::tilt)
      .def_readonly("rho1", &AttitudeObserverState::rho1)
      .def_readonly("rho2", &AttitudeObserverState::rho2)
      .def_readonly("mu", &AttitudeObserverState::mu);
  m.def("make_attitude_state", &make_attitude_state, py::arg("Rhat0"),
        py::arg("tilt"), py::arg("tilt_gains"), py::arg("rho1"),
        py::arg("rho2"), py::arg("mu"));
  m.def("attitude_step", &attitude_step, py::arg("state"), py::arg("sample"),
        py::arg("m"), py::arg("g0"), py::arg("dt"));
  py::class_<HuaAttitudeState>(m, "HuaAttitudeState")
      .def_readonly("Rhat", &HuaAttitudeState::Rhat)
      .def_readonly("xhat1", &HuaAttitudeState::xhat1)
      .def_readonly("k1v", &HuaAttitudeState::k1v)
      .def_readonly("k2v", &HuaAttitudeState::k2v)
      .def_readonly("k1r", &HuaAttitudeState::k1r)
      .def_readonly("k2r", &HuaAttitudeState::k2r);
  m.def("make_hua_attitude_state", &make_hua_attitude_state, py::arg("Rhat0"),
        py::arg("xhat1"), py::arg("k1v"), py::arg("k2v"), py::arg("k1r"),
        py::arg("k2r"), py::arg("g0"));
  m.def("hua_attitude_step", &hua_attitude_step, py::arg("state"),
        py::arg("sample"), py::arg("m"), py::arg("g0"), py::arg("dt"));
  py::class_<MartinAttitudeState>(m, "MartinAttitudeState")
      .def_readonly("tilt", &MartinAttitudeState::tilt)
      .def_readonly("Rhat", &MartinAttitudeState::Rhat)
      .def_readonly("valid", &MartinAttitudeState::valid);
  m.def("make_martin_attitude_state", &make_martin_attitude_state,
        py::arg("Rhat0"), py::arg("tilt"));
  m.def("martin_attitude_step", &martin_attitude_step, py::arg("state"),
        py::arg("sample"), py::arg("m"), py::arg("g0"), py::arg("dt"));

  // ---- analysis ----
  py::class_<TiltMetrics>(m, "TiltMetrics")
      .def_readonly("z2", &TiltMetrics::z2)
      .def_readonly("angle", &TiltMetrics::angle)
      .def_readonly("valid", &TiltMetrics::valid);
  m.def("tilt_metrics", &tilt_metrics, py::arg("state"), py::arg("est"),
        py::arg("unit_constrained"));
  m.def("yaw_proxy_angle", &yaw_proxy_angle, py::arg("R"), py::arg("Rhat"),
        py::arg("m"));
  py::class_<Wrho>(m, "Wrho")
      .def_readonly("rho1", &Wrho::rho1)
      .def_readonly("rho2", &Wrho::rho2)
      .def_readonly("m", &Wrho::m)
      .def_readonly("matrix", &Wrho::matrix)
      .def_readonly("eigenvalues", &Wrho::eigenvalues)
      .def_readonly("eigenvectors", &Wrho::eigenvectors);
  m.def("build_wrho", &build_wrho, py::arg("rho1"), py::arg("rho2"),
        py::arg("m"));
  m.def("undesired_init", &undesired_init, py::arg("m"));
  m.def("lyapunov_v1", &lyapunov_v1, py::arg("z_p1"), py::arg("z2"),
        py::arg("alpha1"), py::arg("gamma"));
  m.def("lyapunov_vn", &lyapunov_vn, py::arg("psi"), py::arg("z2"),
        py::arg("P"), py::arg("gamma"));
  m.def("lyapunov_att", &lyapunov_att, py::arg("z_p1"), py::arg("q_vec"),
        py::arg("W_rho"), py::arg("rho1"), py::arg("alpha1"));
  py::class_<LinearizationA>(m, "LinearizationA")
      .def_readonly("A", &LinearizationA::A)
      .def_readonly("eigenvalues", &LinearizationA::eigenvalues)
      .def_readonly("lambda_j", &LinearizationA::lambda)
      .def_readonly("v", &LinearizationA::v);
  m.def("linearization_A", &linearization_A, py::arg("w"), py::arg("j"),
        py::arg("mu"), py::arg("alpha1"));

  // ---- scenario ----
  m.def(
      "run_scenario",
      [](const std::string& json_text) {
        const ScenarioConfig cfg = parse_scenario(json_text);
        const ScenarioResult res = run_scenario(cfg);
        py::dict out = record_to_dict(res.record);
        out["report"] = report_to_dict(res.report);
        return out;
      },
      py::arg("json_text"),
      "Parse a scenario JSON string, run it, and return columns, the data "
      "matrix, and the report.");
  m.def(
      "validate_estimators",
      [](const std::string& json_text) {
        const ScenarioConfig cfg = parse_scenario(json_text);
        py::list out;
        for (const EstimatorValidation& v : validate_estimators(cfg)) {
          if (!v.error.empty()) out.append(py::make_tuple(v.name, v.error));
        }
        return out;
      },
      py::arg("json_text"),
      "Return (name, error) for every estimator whose gains are rejected.");
}
