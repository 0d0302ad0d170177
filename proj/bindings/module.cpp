#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bhd/errors.hpp"
#include "bhd/estimators.hpp"
#include "bhd/experiments.hpp"
#include "bhd/trace_gen.hpp"

namespace py = pybind11;
using namespace bhd;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                               const char* name) {
  if (a.ndim() != 1) {
    throw std::invalid_argument(std::string(name) + " must be a 1-D array");
  }
  return std::vector<double>(a.data(), a.data() + a.size());
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Balanced homodyne detection simulator with covariance-based, "
      "electronic-noise-free squeezing estimation";
  m.attr("__version__") = "0.1.0";
  m.attr("VACUUM_VARIANCE") = kVacuumVariance;

  py::register_exception<CovarianceOutOfRange>(m, "CovarianceOutOfRange", PyExc_ValueError);
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", PyExc_ValueError);
  py::register_exception<CalibrationError>(m, "CalibrationError", PyExc_ValueError);

  py::class_<GaussianState>(m, "GaussianState",
                            "Second moments of a single-mode Gaussian signal beam; vacuum "
                            "variance is 1/4")
      .def(py::init<double, double, double>(), py::arg("vx"), py::arg("vy"),
           py::arg("cxy") = 0.0)
      .def_static("vacuum", &GaussianState::vacuum)
      .def_readonly("vx", &GaussianState::vx)
      .def_readonly("vy", &GaussianState::vy)
      .def_readonly("cxy", &GaussianState::cxy)
      .def("det", &GaussianState::det)
      .def("__repr__", [](const GaussianState& s) {
        return "GaussianState(vx=" + fmt(s.vx) + ", vy=" + fmt(s.vy) + ", cxy=" + fmt(s.cxy) +
               ")";
      });

  py::class_<LocalOscillator>(m, "LocalOscillator")
      .def(py::init<double, double>(), py::arg("amplitude"), py::arg("vx") = kVacuumVariance)
      .def_readonly("amplitude", &LocalOscillator::amplitude)
      .def_readonly("vx", &LocalOscillator::vx)
      .def("shot_noise_limited", &LocalOscillator::shot_noise_limited)
      .def("__repr__", [](const LocalOscillator& lo) {
        return "LocalOscillator(amplitude=" + fmt(lo.amplitude) + ", vx=" + fmt(lo.vx) + ")";
      });

  py::class_<MeasurementSetting>(m, "MeasurementSetting")
      .def(py::init<double, double>(), py::arg("phase") = 0.0, py::arg("transmission") = 1.0)
      .def_readonly("phase", &MeasurementSetting::phase)
      .def_readonly("transmission", &MeasurementSetting::transmission)
      .def("__repr__", [](const MeasurementSetting& s) {
        return "MeasurementSetting(phase=" + fmt(s.phase) + ", transmission=" +
               fmt(s.transmission) + ")";
      });

  py::class_<DetectorNoiseModel>(m, "DetectorNoiseModel")
      .def(py::init<double, double, double>(), py::arg("sigma1") = 0.0, py::arg("sigma2") = 0.0,
           py::arg("rho") = 0.0)
      .def_readonly("sigma1", &DetectorNoiseModel::sigma1)
      .def_readonly("sigma2", &DetectorNoiseModel::sigma2)
      .def_readonly("rho", &DetectorNoiseModel::rho)
      .def("__repr__", [](const DetectorNoiseModel& n) {
        return "DetectorNoiseModel(sigma1=" + fmt(n.sigma1) + ", sigma2=" + fmt(n.sigma2) +
               ", rho=" + fmt(n.rho) + ")";
      });

  py::class_<SimulationConfig>(m, "SimulationConfig")
      .def(py::init([](GaussianState state, LocalOscillator lo, MeasurementSetting setting,
                       DetectorNoiseModel noise, std::int64_t n_samples, std::uint64_t seed,
                       bool ac_coupled) {
             SimulationConfig cfg{state, lo, setting, noise, n_samples, seed, ac_coupled};
             cfg.validate();
             return cfg;
           }),
           py::arg("state") = GaussianState::vacuum(), py::arg("lo") = LocalOscillator(),
           py::arg("setting") = MeasurementSetting(), py::arg("noise") = DetectorNoiseModel(),
           py::arg("n_samples") = 1'000'000, py::arg("seed") = 0, py::arg("ac_coupled") = true)
      .def_readonly("state", &SimulationConfig::state)
      .def_readonly("lo", &SimulationConfig::lo)
      .def_readonly("setting", &SimulationConfig::setting)
      .def_readonly("noise", &SimulationConfig::noise)
      .def_readonly("n_samples", &SimulationConfig::n_samples)
      .def_readonly("seed", &SimulationConfig::seed)
      .def_readonly("ac_coupled", &SimulationConfig::ac_coupled);

  py::class_<TraceMetadata>(m, "TraceMetadata")
      .def_readonly("config", &TraceMetadata::config)
      .def_readonly("lo_power", &TraceMetadata::lo_power)
      .def_readonly("source", &TraceMetadata::source);

  py::class_<TracePair>(m, "TracePair", "Two equal-length photocurrent sample sequences")
      .def_property_readonly("ch1", [](const TracePair& t) { return as_array(t.ch1); })
      .def_property_readonly("ch2", [](const TracePair& t) { return as_array(t.ch2); })
      .def_readonly("metadata", &TracePair::metadata)
      .def("__len__", &TracePair::size);

  m.def(
      "make_trace_pair",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& ch1,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& ch2,
         const std::string& source) {
        TracePair t;
        t.ch1 = from_array(ch1, "ch1");
        t.ch2 = from_array(ch2, "ch2");
        t.metadata.source = source;
        return t;
      },
      py::arg("ch1"), py::arg("ch2"), py::arg("source") = "python",
      "Build a TracePair from two 1-D sample arrays");

  py::class_<NormalSampler>(m, "NormalSampler",
                            "Seeded standard-normal stream (mt19937_64 + Box-Muller)")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next", &NormalSampler::next);

  m.def("splitmix64", &splitmix64, py::arg("x"));
  m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("stream"), py::arg("index"),
        "Deterministic per-row seed used by the experiment drivers");

  // core state algebra
  m.def("rotated_variance", &rotated_variance, py::arg("state"), py::arg("phase"));
  m.def("apply_loss", &apply_loss, py::arg("state"), py::arg("transmission"));
  m.def("lo_after_loss", &lo_after_loss, py::arg("lo"), py::arg("transmission"));
  m.def("predicted_difference_variance", &predicted_difference_variance, py::arg("state"),
        py::arg("lo"), py::arg("setting"), py::arg("noise"));
  m.def("predicted_covariance", &predicted_covariance, py::arg("state"), py::arg("lo"),
        py::arg("setting"));
  m.def("squeezing_db", &squeezing_db, py::arg("v"), py::arg("v_ref"));
  m.def("ideal_squeezing_curve", &ideal_squeezing_curve, py::arg("v_signal"),
        py::arg("transmission"));

  m.def("sample_trace_pair", &sample_trace_pair, py::arg("config"),
        py::call_guard<py::gil_scoped_release>(),
        "Generate a dual-channel photocurrent trace (deterministic per seed)");

  py::class_<EstimateWithError>(m, "EstimateWithError")
      .def_readonly("value", &EstimateWithError::value)
      .def_readonly("std_error", &EstimateWithError::std_error)
      .def_readonly("n", &EstimateWithError::n)
      .def("__repr__", [](const EstimateWithError& e) {
        return "EstimateWithError(value=" + fmt(e.value) + ", std_error=" + fmt(e.std_error) +
               ", n=" + std::to_string(e.n) + ")";
      });

  m.def("difference_variance", &difference_variance, py::arg("traces"),
        py::call_guard<py::gil_scoped_release>());
  m.def("covariance", &covariance, py::arg("traces"),
        py::call_guard<py::gil_scoped_release>());
  m.def("covariance_two_pass", &covariance_two_pass, py::arg("traces"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<SnlCalibration>(m, "SnlCalibration")
      .def_readonly("slope", &SnlCalibration::slope)
      .def_readonly("intercept", &SnlCalibration::intercept)
      .def_readonly("r_squared", &SnlCalibration::r_squared)
      .def_readonly("fit_points", &SnlCalibration::fit_points)
      .def("snl_at", &SnlCalibration::snl_at, py::arg("power"));

  m.def(
      "calibrate_snl",
      [](const std::vector<std::pair<double, double>>& ladder) { return calibrate_snl(ladder); },
      py::arg("ladder"), "OLS fit of variance against LO power; SNL(P) = slope*P");

  m.def("squeezing_from_subtraction", &squeezing_from_subtraction, py::arg("traces"),
        py::arg("snl"), py::call_guard<py::gil_scoped_release>());
  m.def("squeezing_from_covariance", &squeezing_from_covariance, py::arg("traces"),
        py::arg("snl"), py::arg("lo_variance") = kVacuumVariance,
        py::call_guard<py::gil_scoped_release>());

  py::enum_<Verdict>(m, "Verdict")
      .value("Squeezed", Verdict::Squeezed)
      .value("CoherentConsistent", Verdict::CoherentConsistent)
      .value("ExcessNoise", Verdict::ExcessNoise)
      .value("Inconclusive", Verdict::Inconclusive);

  py::class_<StateVerdict>(m, "StateVerdict")
      .def_readonly("verdict", &StateVerdict::verdict)
      .def_readonly("z_score", &StateVerdict::z_score)
      .def("__repr__", [](const StateVerdict& v) {
        return std::string("StateVerdict(") + to_string(v.verdict) + ", z=" + fmt(v.z_score) +
               ")";
      });

  m.def("classify_state", &classify_state, py::arg("cov_est"), py::arg("z_threshold") = 3.0);

  // experiments
  py::enum_<SnlMode>(m, "SnlMode")
      .value("Analytic", SnlMode::Analytic)
      .value("Calibrated", SnlMode::Calibrated);

  m.def("phase_grid", &phase_grid, py::arg("count"));
  m.def("transmission_grid", &transmission_grid, py::arg("count"), py::arg("min"),
        py::arg("max"));

  py::class_<PhaseScanRow>(m, "PhaseScanRow")
      .def_readonly("phase", &PhaseScanRow::phase)
      .def_readonly("cov_mc", &PhaseScanRow::cov_mc)
      .def_readonly("cov_analytic", &PhaseScanRow::cov_analytic)
      .def_readonly("abs_dev", &PhaseScanRow::abs_dev)
      .def_readonly("within_4se", &PhaseScanRow::within_4se)
      .def_readonly("failed", &PhaseScanRow::failed)
      .def_readonly("error", &PhaseScanRow::error);

  py::class_<PhaseScanResult>(m, "PhaseScanResult")
      .def_readonly("rows", &PhaseScanResult::rows);

  py::class_<AttenuationSweepRow>(m, "AttenuationSweepRow")
      .def_readonly("transmission", &AttenuationSweepRow::transmission)
      .def_readonly("snl", &AttenuationSweepRow::snl)
      .def_readonly("diff_var", &AttenuationSweepRow::diff_var)
      .def_readonly("cov", &AttenuationSweepRow::cov)
      .def_readonly("sq_subtraction_db", &AttenuationSweepRow::sq_subtraction_db)
      .def_readonly("sq_subtraction_se_db", &AttenuationSweepRow::sq_subtraction_se_db)
      .def_readonly("sq_subtraction_model_db", &AttenuationSweepRow::sq_subtraction_model_db)
      .def_readonly("cov_out_of_range", &AttenuationSweepRow::cov_out_of_range)
      .def_readonly("sq_covariance_db", &AttenuationSweepRow::sq_covariance_db)
      .def_readonly("sq_covariance_se_db", &AttenuationSweepRow::sq_covariance_se_db)
      .def_readonly("sq_ideal_db", &AttenuationSweepRow::sq_ideal_db)
      .def_readonly("sub_within_4se", &AttenuationSweepRow::sub_within_4se)
      .def_readonly("cov_within_4se", &AttenuationSweepRow::cov_within_4se)
      .def_readonly("failed", &AttenuationSweepRow::failed)
      .def_readonly("error", &AttenuationSweepRow::error);

  py::class_<AttenuationSweepResult>(m, "AttenuationSweepResult")
      .def_readonly("rows", &AttenuationSweepResult::rows)
      .def_readonly("calibration", &AttenuationSweepResult::calibration)
      .def_readonly("subtraction_zero_crossing",
                    &AttenuationSweepResult::subtraction_zero_crossing);

  py::class_<EnRobustnessRow>(m, "EnRobustnessRow")
      .def_readonly("en_scale", &EnRobustnessRow::en_scale)
      .def_readonly("sigma1", &EnRobustnessRow::sigma1)
      .def_readonly("sigma2", &EnRobustnessRow::sigma2)
      .def_readonly("cov", &EnRobustnessRow::cov)
      .def_readonly("cov_model", &EnRobustnessRow::cov_model)
      .def_readonly("cov_bias", &EnRobustnessRow::cov_bias)
      .def_readonly("expected_bias", &EnRobustnessRow::expected_bias)
      .def_readonly("cov_within_4se", &EnRobustnessRow::cov_within_4se)
      .def_readonly("diff_var", &EnRobustnessRow::diff_var)
      .def_readonly("diff_model", &EnRobustnessRow::diff_model)
      .def_readonly("diff_within_4se", &EnRobustnessRow::diff_within_4se)
      .def_readonly("failed", &EnRobustnessRow::failed)
      .def_readonly("error", &EnRobustnessRow::error);

  py::class_<EnRobustnessResult>(m, "EnRobustnessResult")
      .def_readonly("rows", &EnRobustnessResult::rows);

  m.def(
      "run_phase_scan",
      [](const SimulationConfig& base, const std::vector<double>& phases) {
        return run_phase_scan(base, phases);
      },
      py::arg("base"), py::arg("phases"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_attenuation_sweep",
      [](const SimulationConfig& base, const std::vector<double>& transmissions, SnlMode mode) {
        return run_attenuation_sweep(base, transmissions, mode);
      },
      py::arg("base"), py::arg("transmissions"), py::arg("snl_mode") = SnlMode::Analytic,
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_en_robustness",
      [](const SimulationConfig& base, const std::vector<double>& en_scales, double rho) {
        return run_en_robustness(base, en_scales, rho);
      },
      py::arg("base"), py::arg("en_scales"), py::arg("rho"),
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_snl_ladder",
      [](const SimulationConfig& base, const std::vector<double>& multipliers) {
        return run_snl_ladder(base, multipliers);
      },
      py::arg("base"),
      py::arg("power_multipliers") = std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0},
      py::call_guard<py::gil_scoped_release>());
}
