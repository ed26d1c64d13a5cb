#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "opo/cli.hpp"
#include "opo/core.hpp"
#include "opo/design.hpp"
#include "opo/errors.hpp"
#include "opo/estimation.hpp"
#include "opo/homodyne.hpp"
#include "opo/io.hpp"

namespace py = pybind11;
using namespace opo;

namespace {

DataSeries series_from(const std::vector<double>& x, const std::vector<double>& y,
                       const std::optional<std::vector<double>>& sigma) {
  if (x.size() != y.size() || (sigma && sigma->size() != x.size()))
    throw std::invalid_argument("x, y and sigma must have equal lengths");
  std::vector<DataPoint> pts;
  pts.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    pts.push_back({x[i], y[i], sigma ? std::optional<double>((*sigma)[i]) : std::nullopt});
  return DataSeries(std::move(pts));
}

NoiseTrace trace_from(const std::vector<double>& phase, const std::vector<double>& variance_db, TraceKind kind) {
  if (phase.size() != variance_db.size()) throw std::invalid_argument("phase and variance_db lengths differ");
  NoiseTrace t;
  t.kind = kind;
  for (std::size_t i = 0; i < phase.size(); ++i) t.points.push_back({i, phase[i], variance_db[i]});
  t.config.n_points = phase.size();
  t.config.phase_profile = phase;
  return t;
}

}  // namespace

PYBIND11_MODULE(_opo_squeeze, m) {
  m.doc() = "Squeezed-light OPO model, synthetic homodyne data, estimators and coupling design";

  auto schema = py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  auto analysis = py::register_exception<AnalysisError>(m, "AnalysisError", PyExc_RuntimeError);
  py::register_exception<PoleError>(m, "PoleError", analysis.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
  (void)schema;

  m.attr("PLANCK") = kPlanck;
  m.attr("HBAR") = kHbar;
  m.attr("SPEED_OF_LIGHT") = kSpeedOfLight;
  m.def("hz_to_angular", &hz_to_angular);
  m.def("angular_to_hz", &angular_to_hz);

  // Model types.
  py::class_<ModeParams>(m, "ModeParams")
      .def(py::init<double, double, double>(), py::arg("gamma1"), py::arg("gamma2"), py::arg("gamma_int"))
      .def_static("from_hz", &ModeParams::from_hz, py::arg("gamma1_hz"), py::arg("gamma2_hz"),
                  py::arg("gamma_int_hz"))
      .def_property_readonly("gamma1", &ModeParams::gamma1)
      .def_property_readonly("gamma2", &ModeParams::gamma2)
      .def_property_readonly("gamma_int", &ModeParams::gamma_int)
      .def_property_readonly("total", &ModeParams::total)
      .def(py::self == py::self)
      .def("__repr__", [](const ModeParams& p) {
        std::ostringstream s;
        s << "ModeParams(gamma1=" << p.gamma1() << ", gamma2=" << p.gamma2() << ", gamma_int=" << p.gamma_int()
          << ")";
        return s.str();
      });

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<ModeParams, ModeParams, double, double, double>(), py::arg("signal"), py::arg("pump"),
           py::arg("g"), py::arg("pump_angular_frequency"), py::arg("coupling_efficiency") = 1.0)
      .def_property_readonly("signal", &SystemParams::signal)
      .def_property_readonly("pump", &SystemParams::pump)
      .def_property_readonly("g", &SystemParams::g)
      .def_property_readonly("pump_angular_frequency", &SystemParams::pump_angular_frequency)
      .def_property_readonly("coupling_efficiency", &SystemParams::coupling_efficiency)
      .def("with_g", &SystemParams::with_g)
      .def("with_signal", &SystemParams::with_signal);

  py::class_<DetectionChain>(m, "DetectionChain")
      .def(py::init<double, double>(), py::arg("eta") = 1.0, py::arg("visibility") = 1.0)
      .def_property_readonly("eta", &DetectionChain::eta)
      .def_property_readonly("visibility", &DetectionChain::visibility)
      .def_property_readonly("efficiency", &DetectionChain::efficiency);

  py::class_<OperatingPoint>(m, "OperatingPoint")
      .def(py::init<double, double>(), py::arg("incident_pump_power"), py::arg("sideband_frequency"))
      .def_readonly("incident_pump_power", &OperatingPoint::incident_pump_power)
      .def_readonly("sideband_frequency", &OperatingPoint::sideband_frequency);

  py::class_<QuadratureVariances>(m, "QuadratureVariances")
      .def(py::init([](double sq, double asq, bool extrapolated) {
             return QuadratureVariances{sq, asq, extrapolated};
           }),
           py::arg("var_sq"), py::arg("var_asq"), py::arg("model_extrapolated") = false)
      .def_readwrite("var_sq", &QuadratureVariances::var_sq)
      .def_readwrite("var_asq", &QuadratureVariances::var_asq)
      .def_readwrite("model_extrapolated", &QuadratureVariances::model_extrapolated)
      .def_property_readonly("var_sq_db", &QuadratureVariances::var_sq_db)
      .def_property_readonly("var_asq_db", &QuadratureVariances::var_asq_db)
      .def_property_readonly("purity", &QuadratureVariances::purity);

  m.def("total_half_linewidth", &total_half_linewidth);
  m.def("incoupled_power", &incoupled_power);
  m.def("pump_photon_number", &pump_photon_number);
  m.def("cooperativity", &cooperativity);
  m.def("cooperativity_incoupled", &cooperativity_incoupled);
  m.def("threshold_power", &threshold_power);
  m.def("threshold_power_incident", &threshold_power_incident);
  m.def("quadrature_variances", &quadrature_variances);
  m.def("quadrature_variances_at", &quadrature_variances_at, py::arg("signal"), py::arg("detection"),
        py::arg("cooperativity"), py::arg("sideband_frequency"));
  m.def("squeezed_variance_at", &squeezed_variance_at, py::arg("signal"), py::arg("detection"),
        py::arg("cooperativity"), py::arg("sideband_frequency"));
  m.def("model_purity", &model_purity);
  m.def("optimal_cooperativity", &optimal_cooperativity, py::arg("signal"), py::arg("sideband_frequency"));
  m.def("signal_power_above_threshold", &signal_power_above_threshold);
  m.def("signal_power_above_threshold_incoupled", &signal_power_above_threshold_incoupled);
  m.def("intracavity_pump_clamped", &intracavity_pump_clamped);
  m.def("purity", &purity);
  m.def("to_db", &to_db);
  m.def("from_db", &from_db);
  m.def("attenuate_variance", &attenuate_variance, py::arg("variance"), py::arg("transmission"));

  // Synthetic homodyne data.
  py::enum_<TraceKind>(m, "TraceKind").value("calibration", TraceKind::calibration).value("signal", TraceKind::signal);

  py::class_<TraceConfig>(m, "TraceConfig")
      .def(py::init<>())
      .def_readwrite("n_points", &TraceConfig::n_points)
      .def_readwrite("samples_per_point", &TraceConfig::samples_per_point)
      .def_readwrite("phase_profile", &TraceConfig::phase_profile)
      .def_readwrite("rng_seed", &TraceConfig::rng_seed)
      .def_readwrite("squeezing_angle", &TraceConfig::squeezing_angle)
      .def_readwrite("dark_noise_variance", &TraceConfig::dark_noise_variance)
      .def("validate", &TraceConfig::validate);
  m.def("make_trace_config", &make_trace_config, py::arg("n_points"), py::arg("samples_per_point"),
        py::arg("phase_start"), py::arg("phase_stop"), py::arg("seed"), py::arg("squeezing_angle") = 0.0);

  py::class_<NoiseTrace>(m, "NoiseTrace")
      .def(py::init(&trace_from), py::arg("phase"), py::arg("variance_db"), py::arg("kind") = TraceKind::signal)
      .def_readonly("kind", &NoiseTrace::kind)
      .def_readonly("config", &NoiseTrace::config)
      .def_property_readonly("phase",
                             [](const NoiseTrace& t) {
                               std::vector<double> v;
                               for (const auto& p : t.points) v.push_back(p.phase);
                               return v;
                             })
      .def_property_readonly("variance_db",
                             [](const NoiseTrace& t) {
                               std::vector<double> v;
                               for (const auto& p : t.points) v.push_back(p.variance_db);
                               return v;
                             })
      .def("__len__", [](const NoiseTrace& t) { return t.points.size(); });

  py::class_<AttenuationPoint>(m, "AttenuationPoint")
      .def_readonly("transmission", &AttenuationPoint::transmission)
      .def_readonly("var_sq_db", &AttenuationPoint::var_sq_db)
      .def_readonly("var_asq_db", &AttenuationPoint::var_asq_db);

  m.def("variance_at_phase", &variance_at_phase);
  m.def("point_seed", &point_seed);
  m.def("simulate_trace", &simulate_trace);
  m.def("simulate_calibration", &simulate_calibration);
  m.def("simulate_attenuation_series", &simulate_attenuation_series);

  // Estimation.
  py::class_<FitResult>(m, "FitResult")
      .def_readonly("parameters", &FitResult::parameters)
      .def_readonly("standard_errors", &FitResult::standard_errors)
      .def_readonly("residual_norm", &FitResult::residual_norm)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("extrapolated_points", &FitResult::extrapolated_points);

  m.def(
      "fit_threshold_curve",
      [](const std::vector<double>& power, const std::vector<double>& signal,
         const std::optional<std::vector<double>>& sigma) {
        return fit_threshold_curve(series_from(power, signal, sigma));
      },
      py::arg("power"), py::arg("signal"), py::arg("sigma") = py::none());

  py::class_<ThresholdMeasurement>(m, "ThresholdMeasurement")
      .def(py::init([](ModeParams s, ModeParams p, double w, double pth) {
             return ThresholdMeasurement{s, p, w, pth};
           }),
           py::arg("signal"), py::arg("pump"), py::arg("pump_angular_frequency"), py::arg("threshold_power"));
  m.def("coupling_constant_from_threshold", &coupling_constant_from_threshold);
  m.def("extract_coupling_constant", &extract_coupling_constant);

  py::enum_<Quadrature>(m, "Quadrature")
      .value("squeezed", Quadrature::squeezed)
      .value("anti_squeezed", Quadrature::anti_squeezed);

  py::class_<SqueezingFitConfig>(m, "SqueezingFitConfig")
      .def(py::init<>())
      .def_readwrite("detection", &SqueezingFitConfig::detection)
      .def_readwrite("signal", &SqueezingFitConfig::signal)
      .def_readwrite("sideband_frequency", &SqueezingFitConfig::sideband_frequency)
      .def_readwrite("quadrature", &SqueezingFitConfig::quadrature)
      .def_readwrite("fit_efficiency", &SqueezingFitConfig::fit_efficiency)
      .def_readwrite("fit_coupling_ratio", &SqueezingFitConfig::fit_coupling_ratio)
      .def_readwrite("fit_linewidth", &SqueezingFitConfig::fit_linewidth);
  m.def(
      "fit_squeezing_vs_pump",
      [](const std::vector<double>& pump_ratio, const std::vector<double>& variance_db,
         const SqueezingFitConfig& config, const std::optional<std::vector<double>>& sigma) {
        return fit_squeezing_vs_pump(series_from(pump_ratio, variance_db, sigma), config);
      },
      py::arg("pump_ratio"), py::arg("variance_db"), py::arg("config"), py::arg("sigma") = py::none());

  py::class_<ExtremaResult>(m, "ExtremaResult")
      .def_readonly("var_sq_db", &ExtremaResult::var_sq_db)
      .def_readonly("var_sq_db_err", &ExtremaResult::var_sq_db_err)
      .def_readonly("var_asq_db", &ExtremaResult::var_asq_db)
      .def_readonly("var_asq_db_err", &ExtremaResult::var_asq_db_err)
      .def_readonly("n_minima", &ExtremaResult::n_minima)
      .def_readonly("n_maxima", &ExtremaResult::n_maxima)
      .def_readonly("shot_noise_level_db", &ExtremaResult::shot_noise_level_db);
  m.def(
      "extract_extrema",
      [](const NoiseTrace& trace, const NoiseTrace& calibration, std::size_t window) {
        ExtremaOptions o;
        o.window = window;
        return extract_extrema(trace, calibration, o);
      },
      py::arg("trace"), py::arg("calibration"), py::arg("window") = 5);

  py::class_<PurityEstimate>(m, "PurityEstimate")
      .def_readonly("purity", &PurityEstimate::purity)
      .def_readonly("uncertainty", &PurityEstimate::uncertainty);
  m.def("purity_with_uncertainty", &purity_with_uncertainty, py::arg("var_sq_db"), py::arg("var_sq_db_err"),
        py::arg("var_asq_db"), py::arg("var_asq_db_err"));

  // Design.
  py::class_<RateRange>(m, "RateRange")
      .def(py::init([](double lo, double hi) { return RateRange{lo, hi}; }), py::arg("min"), py::arg("max"))
      .def_readwrite("min", &RateRange::min)
      .def_readwrite("max", &RateRange::max);

  py::class_<DesignConstraints>(m, "DesignConstraints")
      .def(py::init<>())
      .def_readwrite("gamma_int", &DesignConstraints::gamma_int)
      .def_readwrite("gamma1_range", &DesignConstraints::gamma1_range)
      .def_readwrite("gamma2_range", &DesignConstraints::gamma2_range)
      .def_readwrite("max_cooperativity", &DesignConstraints::max_cooperativity)
      .def_readwrite("sideband_frequency", &DesignConstraints::sideband_frequency)
      .def_readwrite("detection", &DesignConstraints::detection)
      .def_readwrite("equal_coupling", &DesignConstraints::equal_coupling)
      .def("validate", &DesignConstraints::validate);

  py::class_<DesignPoint>(m, "DesignPoint")
      .def_readonly("gamma1", &DesignPoint::gamma1)
      .def_readonly("gamma2", &DesignPoint::gamma2)
      .def_readonly("cooperativity", &DesignPoint::cooperativity)
      .def_readonly("predicted_var_sq", &DesignPoint::predicted_var_sq)
      .def_readonly("predicted_var_sq_db", &DesignPoint::predicted_var_sq_db)
      .def_readonly("predicted_purity", &DesignPoint::predicted_purity)
      .def_readonly("at_range_edge", &DesignPoint::at_range_edge)
      .def_readonly("unbounded", &DesignPoint::unbounded);

  py::class_<FrontierPoint>(m, "FrontierPoint")
      .def_readonly("gamma2", &FrontierPoint::gamma2)
      .def_readonly("predicted_var_sq_db", &FrontierPoint::predicted_var_sq_db);

  m.def("best_squeezing_at_fixed_rates", &best_squeezing_at_fixed_rates);
  m.def(
      "optimize_outcoupling",
      [](const DesignConstraints& c, std::size_t grid_points) {
        DesignSearchOptions o;
        o.grid_points = grid_points;
        return optimize_outcoupling(c, o);
      },
      py::arg("constraints"), py::arg("grid_points") = 32);
  m.def(
      "outcoupling_frontier",
      [](const DesignConstraints& c, std::size_t grid_points) {
        DesignSearchOptions o;
        o.grid_points = grid_points;
        return outcoupling_frontier(c, o);
      },
      py::arg("constraints"), py::arg("grid_points") = 32);
  m.def("overcoupled_limit_variance", &overcoupled_limit_variance);

  // Command line, in process. Returns (exit_code, stdout, stderr).
  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::vector<std::string> full{"opo_squeeze"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : full) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
