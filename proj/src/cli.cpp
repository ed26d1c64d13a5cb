#include "opo/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <random>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "opo/config.hpp"
#include "opo/errors.hpp"
#include "opo/io.hpp"

namespace opo::cli {
namespace {

namespace fs = std::filesystem;
using config::RunConfig;

// Stream offsets for seeds derived from the global --seed.
constexpr std::size_t kCalibrationStream = 1;
constexpr std::size_t kThresholdStream = 2;
constexpr std::size_t kSqueezingStream = 3;

std::shared_ptr<spdlog::logger> logger() {
  static const auto log = [] {
    auto l = spdlog::stderr_logger_st("opo_squeeze");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("OPO_SQUEEZE_LOG")) l->set_level(spdlog::level::from_str(env));
    return l;
  }();
  return log;
}

struct Invocation {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string fit_kind;
  std::string input;
  std::string calibration;
  std::string plot_x;
  std::string plot_y;
  std::string plot_title;
  std::string plot_name;
};

RunConfig load(const Invocation& inv) {
  if (inv.config_path.empty()) throw SchemaError("--config is required");
  RunConfig cfg = config::load_config(inv.config_path);
  if (inv.seed) cfg.seed = *inv.seed;
  return cfg;
}

fs::path prepare_out(const Invocation& inv) {
  const fs::path out(inv.out_dir);
  fs::create_directories(out);
  return out;
}

void write_report(const fs::path& path, const io::Report& report, std::ostream& out) {
  io::write_text_file(path, report.str());
  out << report.str();
}

std::vector<double> frequency_grid(const config::SpectrumSection& s) {
  std::vector<double> f(s.n_points);
  for (std::size_t i = 0; i < s.n_points; ++i) {
    const double t = s.n_points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(s.n_points - 1);
    f[i] = s.log_spacing ? s.freq_start_hz * std::pow(s.freq_stop_hz / s.freq_start_hz, t)
                         : s.freq_start_hz + t * (s.freq_stop_hz - s.freq_start_hz);
  }
  return f;
}

int cmd_simulate(const Invocation& inv, std::ostream&) {
  const RunConfig cfg = load(inv);
  if (!cfg.system || !cfg.operating_point || !cfg.trace)
    throw SchemaError("simulate needs 'system', 'operating_point' and 'trace' sections");
  const fs::path out = prepare_out(inv);
  const SystemParams& sys = *cfg.system;
  const OperatingPoint& op = *cfg.operating_point;
  const double coop = cooperativity(sys, op);
  logger()->info("cooperativity {:.6g}, threshold (incident) {:.6g} W", coop,
                 sys.coupling_efficiency() > 0.0 ? threshold_power_incident(sys) : INFINITY);

  std::vector<io::SpectrumRow> spectrum;
  for (double f : frequency_grid(cfg.spectrum.value_or(config::SpectrumSection{}))) {
    const auto v = quadrature_variances_at(sys.signal(), cfg.detection, coop, f);
    spectrum.push_back({f, v.var_sq_db(), v.var_asq_db(), v.purity()});
  }
  io::write_csv_file(out / "spectrum.csv", io::spectrum_table(spectrum));

  const auto& ts = *cfg.trace;
  QuadratureVariances variances;
  if (ts.var_sq_db) {
    variances = {from_db(*ts.var_sq_db), from_db(*ts.var_asq_db), false};
  } else {
    variances = quadrature_variances(sys, cfg.detection, op);
  }
  TraceConfig tc = make_trace_config(ts.n_points, ts.samples_per_point, ts.phase_start_rad,
                                     ts.phase_stop_rad, cfg.seed, ts.squeezing_angle_rad);
  tc.dark_noise_variance = ts.dark_noise_variance;
  io::write_csv_file(out / "trace.csv", io::trace_table(simulate_trace(variances, tc)));
  TraceConfig cal = tc;
  cal.rng_seed = point_seed(cfg.seed, static_cast<std::size_t>(-1) - kCalibrationStream);
  io::write_csv_file(out / "calibration.csv", io::trace_table(simulate_calibration(cal)));

  if (cfg.attenuation) {
    io::write_csv_file(out / "attenuation.csv",
                       io::attenuation_table(
                           simulate_attenuation_series(variances, cfg.attenuation->transmissions)));
  }

  if (cfg.threshold_sweep) {
    const auto& s = *cfg.threshold_sweep;
    std::mt19937_64 rng(point_seed(cfg.seed, static_cast<std::size_t>(-1) - kThresholdStream));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<DataPoint> pts;
    for (std::size_t i = 0; i < s.n_points; ++i) {
      const double p = s.power_max_w * static_cast<double>(i) / static_cast<double>(s.n_points - 1);
      const double clean = signal_power_above_threshold_incoupled(sys, p);
      pts.push_back({p, clean * (1.0 + s.relative_noise * normal(rng)), std::nullopt});
    }
    io::write_csv_file(out / "threshold.csv", io::threshold_table(DataSeries(std::move(pts))));
  }

  if (cfg.squeezing_sweep) {
    const auto& s = *cfg.squeezing_sweep;
    std::mt19937_64 rng(point_seed(cfg.seed, static_cast<std::size_t>(-1) - kSqueezingStream));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<DataPoint> pts;
    for (std::size_t i = 0; i < s.n_points; ++i) {
      const double x = s.pump_ratio_min + (s.pump_ratio_max - s.pump_ratio_min) *
                                              static_cast<double>(i) / static_cast<double>(s.n_points - 1);
      const auto v = quadrature_variances_at(sys.signal(), cfg.detection, x, op.sideband_frequency);
      const double db = s.quadrature == Quadrature::squeezed ? v.var_sq_db() : v.var_asq_db();
      pts.push_back({x, db + s.noise_db * normal(rng), std::nullopt});
    }
    io::write_csv_file(out / "squeezing.csv", io::squeezing_table(DataSeries(std::move(pts))));
  }
  logger()->info("simulate wrote results to {}", out.string());
  return kSuccess;
}

fs::path input_path(const Invocation& inv, const std::optional<fs::path>& from_config,
                    const char* what) {
  fs::path p;
  if (!inv.input.empty() && std::string(what) == "input") p = inv.input;
  else if (!inv.calibration.empty() && std::string(what) == "calibration") p = inv.calibration;
  else if (from_config) p = *from_config;
  else throw SchemaError(std::string("fit needs an ") + what + " file (--" + what + " or fit." + what + ")");
  if (!fs::exists(p)) throw SchemaError(std::string(what) + " file not found: " + p.string());
  return p;
}

int fit_status(const FitResult& result, std::ostream& err) {
  if (result.converged) return kSuccess;
  err << "error: fit did not converge after " << result.iterations
      << " iterations; partial results are in the report\n";
  return kNonConvergence;
}

int cmd_fit(const Invocation& inv, std::ostream& out, std::ostream& err) {
  // A config is optional for threshold and trace fits when paths come from flags.
  RunConfig cfg;
  if (!inv.config_path.empty()) cfg = load(inv);
  const std::optional<config::FitSection> fit = cfg.fit;
  const fs::path in = input_path(inv, fit ? fit->input : std::nullopt, "input");
  // Resolve the calibration path before touching --out, so that a missing file
  // fails before anything is written.
  std::optional<fs::path> cal;
  if (inv.fit_kind == "trace") cal = input_path(inv, fit ? fit->calibration : std::nullopt, "calibration");
  const fs::path out_dir = prepare_out(inv);
  const fs::path report_path = out_dir / ("fit_" + inv.fit_kind + ".txt");

  auto degenerate = [&](const AnalysisError& e) {
    io::Report r("fit " + inv.fit_kind);
    r.add("status", std::string(e.what()).rfind("no extrema", 0) == 0 ? std::string("no extrema")
                                                                       : std::string("degenerate"));
    r.add("message", std::string(e.what()));
    write_report(report_path, r, out);
  };

  try {
    if (inv.fit_kind == "threshold") {
      const auto data = io::threshold_series(io::read_csv_file(in, io::kThresholdColumns));
      ThresholdFitOptions to;
      if (fit && fit->max_iterations) to.solver.max_iterations = static_cast<int>(*fit->max_iterations);
      const auto result = fit_threshold_curve(data, to);
      write_report(report_path, io::fit_report("fit threshold", result), out);
      return fit_status(result, err);
    }
    if (inv.fit_kind == "squeezing") {
      if (!cfg.system) throw SchemaError("fit squeezing needs a 'system' section for the signal mode");
      SqueezingFitConfig sc;
      sc.detection = cfg.detection;
      sc.signal = cfg.system->signal();
      if (fit && fit->sideband_frequency_hz) sc.sideband_frequency = *fit->sideband_frequency_hz;
      else if (cfg.operating_point) sc.sideband_frequency = cfg.operating_point->sideband_frequency;
      else throw SchemaError("fit squeezing needs fit.sideband_frequency_hz or an operating_point");
      if (fit) {
        sc.fit_efficiency = fit->fit_efficiency;
        sc.fit_coupling_ratio = fit->fit_coupling_ratio;
        sc.fit_linewidth = fit->fit_linewidth;
        sc.quadrature = fit->quadrature;
        if (fit->max_iterations) sc.solver.max_iterations = static_cast<int>(*fit->max_iterations);
      }
      const auto data = io::squeezing_series(io::read_csv_file(in, io::kSqueezingColumns));
      const auto result = fit_squeezing_vs_pump(data, sc);
      write_report(report_path, io::fit_report("fit squeezing", result), out);
      return fit_status(result, err);
    }
    // trace
    const auto trace = io::trace_from_table(io::read_csv_file(in, io::kTraceColumns), TraceKind::signal);
    const auto calibration =
        io::trace_from_table(io::read_csv_file(*cal, io::kTraceColumns), TraceKind::calibration);
    ExtremaOptions eo;
    if (fit) eo.window = fit->window;
    const auto extrema = extract_extrema(trace, calibration, eo);
    const auto purity = purity_with_uncertainty(extrema.var_sq_db, extrema.var_sq_db_err,
                                                extrema.var_asq_db, extrema.var_asq_db_err);
    write_report(report_path, io::extrema_report(extrema, purity), out);
    return kSuccess;
  } catch (const AnalysisError& e) {
    degenerate(e);
    throw;
  }
}

int cmd_optimize(const Invocation& inv, std::ostream& out) {
  const RunConfig cfg = load(inv);
  if (!cfg.design) throw SchemaError("optimize needs a 'constraints' section");
  DesignSearchOptions opts;
  opts.grid_points = cfg.design->grid_points;
  const auto& c = cfg.design->constraints;
  const DesignPoint best = optimize_outcoupling(c, opts);
  const fs::path out_dir = prepare_out(inv);
  write_report(out_dir / "design.txt", io::design_report(best, c), out);
  io::write_csv_file(out_dir / "frontier.csv", io::frontier_table(outcoupling_frontier(c, opts)));
  return kSuccess;
}

int cmd_plot(const Invocation& inv, std::ostream&) {
  if (inv.input.empty()) throw SchemaError("plot needs --input");
  if (!fs::exists(inv.input)) throw SchemaError("input file not found: " + inv.input);
  const auto table = io::read_csv_file(inv.input, {});
  auto column = [&](const std::string& name, std::size_t fallback) {
    if (name.empty()) {
      if (fallback >= table.header.size()) throw SchemaError("plot input needs at least two columns");
      return fallback;
    }
    for (std::size_t i = 0; i < table.header.size(); ++i)
      if (table.header[i] == name) return i;
    throw SchemaError("plot input has no column '" + name + "'");
  };
  const std::size_t xc = column(inv.plot_x, 0);
  const std::size_t yc = column(inv.plot_y, 1);

  io::PlotSeries series;
  series.title = inv.plot_title.empty() ? fs::path(inv.input).stem().string() : inv.plot_title;
  series.x_label = table.header[xc];
  series.y_label = table.header[yc];
  for (const auto& row : table.rows) series.points.emplace_back(row[xc], row[yc]);
  const auto plot = io::emit_plot_data(series);

  const fs::path out_dir = prepare_out(inv);
  const std::string stem = inv.plot_name.empty() ? fs::path(inv.input).stem().string() + "_plot" : inv.plot_name;
  io::write_text_file(out_dir / (stem + ".svg"), plot.svg);
  io::write_csv_file(out_dir / (stem + ".csv"), plot.csv);
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-port degenerate OPO squeezing toolkit"};
  app.require_subcommand(1);
  Invocation inv;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", inv.config_path, "Run configuration (JSON)");
    sub->add_option("--seed", inv.seed, "Seed for all randomness (overrides config)");
    sub->add_option("--out", inv.out_dir, "Output directory")->capture_default_str();
  };

  auto* simulate = app.add_subcommand("simulate", "Spectrum, noise trace and calibration trace");
  add_common(simulate);
  auto* fit = app.add_subcommand("fit", "Fit threshold curve, squeezing-vs-pump curve, or trace extrema");
  add_common(fit);
  fit->add_option("kind", inv.fit_kind, "threshold | squeezing | trace")
      ->required()
      ->check(CLI::IsMember({"threshold", "squeezing", "trace"}));
  fit->add_option("--input", inv.input, "Input CSV (overrides fit.input)");
  fit->add_option("--calibration", inv.calibration, "Calibration trace CSV (trace fits)");
  auto* optimize = app.add_subcommand("optimize", "Coupling-rate design for best squeezing");
  add_common(optimize);
  auto* plot = app.add_subcommand("plot", "SVG + CSV plot of two CSV columns");
  add_common(plot);
  plot->add_option("--input", inv.input, "Input CSV")->required();
  plot->add_option("--x", inv.plot_x, "x column (default: first)");
  plot->add_option("--y", inv.plot_y, "y column (default: second)");
  plot->add_option("--title", inv.plot_title, "Plot title");
  plot->add_option("--name", inv.plot_name, "Output file stem");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kSuccess : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(inv, out);
    if (*fit) return cmd_fit(inv, out, err);
    if (*optimize) return cmd_optimize(inv, out);
    return cmd_plot(inv, out);
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kInputSchema;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInputSchema;
  } catch (const AnalysisError& e) {
    err << "error: " << e.what() << '\n';
    return kAnalysisDegenerate;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace opo::cli
