// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each check compares against an independent oracle or a published
// value at the stated tolerance.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "opo/cli.hpp"
#include "opo/core.hpp"
#include "opo/design.hpp"
#include "opo/estimation.hpp"
#include "opo/homodyne.hpp"
#include "opo/io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace opo;

namespace {

const fs::path kScenarios = OPO_SCENARIO_DIR;

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;  // <= 0: none
  std::function<Outcome()> check;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// 1. Lossless, ideal detection: var_sq * var_asq = 1.
Outcome minimum_uncertainty() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const DetectionChain ideal(1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double gamma = std::pow(10.0, 4.0 + 5.0 * u(rng));
    const double f = i % 10 == 0 ? 0.0 : angular_to_hz(gamma) * 5.0 * u(rng);
    double coop = 10.0 * u(rng);
    if (f == 0.0 && coop == 1.0) coop = 0.5;
    const ModeParams mode(0.0, gamma, 0.0);
    const auto v = quadrature_variances_at(mode, ideal, coop, f);
    worst = std::max(worst, std::abs(v.var_sq * v.var_asq - 1.0));
  }
  return {worst <= 1e-12, fmt("max |Vsq*Vasq - 1| = %.2e over 1000 tuples", worst)};
}

// 2. Equal coupling, lossless, at threshold: exactly half the shot noise.
Outcome three_db_limit() {
  // The anti-squeezed quadrature diverges here; only var_sq is finite.
  const ModeParams mode(1e6, 1e6, 0.0);
  const double v = squeezed_variance_at(mode, DetectionChain(1.0, 1.0), 1.0, 0.0);
  const bool ok = v == 0.5 && std::abs(to_db(v) + 3.0103) < 5e-5;
  return {ok, fmt("var_sq = %.15f (%.6f dB)", v, to_db(v))};
}

// 3. Optimal cooperativity against a brute-force argmin.
Outcome optimal_cooperativity_check() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double g1 = 1e5 + 1e7 * u(rng), g2 = 1e5 + 1e7 * u(rng), gi = 1e7 * u(rng);
    const ModeParams mode(g1, g2, gi);
    const double f = angular_to_hz(mode.total()) * 3.0 * u(rng);
    const double predicted = optimal_cooperativity(mode, f);
    const double found = static_cast<double>(oracle::argmin_cooperativity(
        0.7L, g1, g2, gi, f, 0.0L, 2.0L * predicted + 1.0L));
    worst = std::max(worst, std::abs(found / predicted - 1.0));
  }
  const auto sig = fixtures::undercoupled_signal();
  const double anchor = optimal_cooperativity(sig, 2e6);
  const double anchor_found = static_cast<double>(
      oracle::argmin_cooperativity(1.0L, sig.gamma1(), sig.gamma2(), sig.gamma_int(), 2e6L, 0.0L, 10.0L));
  const bool ok = worst <= 1e-3 && std::abs(anchor - 4.37) <= 0.01 && std::abs(anchor_found / anchor - 1.0) <= 1e-3;
  return {ok, fmt("max rel. deviation %.2e; 2Gamma = 2pi x 2.18 MHz, f = 2 MHz -> %.4f", worst, anchor)};
}

// 4. Cooperativity at the threshold power.
Outcome threshold_consistency() {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto sys = fixtures::random_system(rng);
    worst = std::max(worst, std::abs(cooperativity_incoupled(sys, threshold_power(sys)) - 1.0));
    const OperatingPoint op(threshold_power_incident(sys), 0.0);
    worst = std::max(worst, std::abs(cooperativity(sys, op) - 1.0));
  }
  return {worst <= 1e-12, fmt("max |G(P_th) - 1| = %.2e over 1000 systems", worst)};
}

// 5. Threshold fit with 2% multiplicative noise.
Outcome threshold_fit() {
  const double pth = 1.35e-6;
  int within = 0;
  double worst = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    const auto data = fixtures::threshold_sweep(pth, 0.4e-6, 4.0 * pth, 30, 0.02, 5000 + seed);
    const auto fit = fit_threshold_curve(data);
    const double err = std::abs(fit.parameters.at("P_th") / pth - 1.0);
    worst = std::max(worst, err);
    within += fit.converged && err <= 0.05;
  }
  return {within >= 95, fmt("%.0f / 100 replicates within 5%% (worst %.2f%%)", within, 100.0 * worst)};
}

// 6. Coupling constant round trip.
Outcome coupling_round_trip() {
  const auto base = fixtures::threshold_system();
  std::vector<ThresholdMeasurement> ms;
  std::vector<SystemParams> systems;
  // Thresholds from several signal/pump geometries, all at the same g.
  for (double scale : {0.8, 0.9, 1.0, 1.1, 1.25}) {
    const ModeParams sig(base.signal().gamma1() * scale, base.signal().gamma2(), base.signal().gamma_int());
    const auto sys = base.with_signal(sig);
    systems.push_back(sys);
    ms.push_back({sys.signal(), sys.pump(), sys.pump_angular_frequency(), threshold_power(sys)});
  }
  const auto fit = extract_coupling_constant(ms);
  const double g = fit.parameters.at("g");
  const double mean_err = std::abs(g / base.g() - 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < ms.size(); ++i)
    worst = std::max(worst, std::abs(threshold_power(systems[i].with_g(g)) / ms[i].threshold_power - 1.0));
  return {mean_err <= 0.01 && worst <= 1e-10,
          fmt("g = 2pi x %.6f kHz (rel. err %.1e)", angular_to_hz(g) / 1e3, mean_err) +
              fmt(", P_th reproduced to %.1e", worst)};
}

// 7. Swept trace -> extrema, through the library and through the CLI.
Outcome trace_pipeline() {
  const QuadratureVariances v{from_db(-1.4), from_db(2.1), false};
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto cfg = make_trace_config(400, 10000, 0.0, 4.0 * kPi, 700 + seed, 0.3 + 0.2 * seed);
    auto cal = cfg;
    cal.rng_seed = 900 + seed;
    const auto r = extract_extrema(simulate_trace(v, cfg), simulate_calibration(cal));
    worst = std::max({worst, std::abs(r.var_sq_db + 1.4), std::abs(r.var_asq_db - 2.1)});
  }

  const fs::path tmp = fs::temp_directory_path() / "opo_acceptance_trace";
  fs::remove_all(tmp);
  std::ostringstream out, err;
  const std::string cfg = (kScenarios / "swept_trace.json").string();
  const std::string sim_dir = (tmp / "sim").string();
  const char* sim[] = {"opo_squeeze", "simulate", "--config", cfg.c_str(), "--out", sim_dir.c_str()};
  bool cli_ok = cli::run(6, sim, out, err) == 0;
  const std::string trace = (tmp / "sim" / "trace.csv").string();
  const std::string calib = (tmp / "sim" / "calibration.csv").string();
  const std::string fit_dir = (tmp / "fit").string();
  const char* fit[] = {"opo_squeeze", "fit", "trace", "--input", trace.c_str(), "--calibration", calib.c_str(),
                       "--out", fit_dir.c_str()};
  std::ostringstream report;
  cli_ok = cli_ok && cli::run(9, fit, report, err) == 0;
  double cli_sq = NAN, cli_asq = NAN;
  if (cli_ok) {
    std::istringstream in(report.str());
    for (const auto& [k, val] : io::parse_report(in)) {
      if (k == "var_sq_db") cli_sq = std::stod(val);
      if (k == "var_asq_db") cli_asq = std::stod(val);
    }
    worst = std::max({worst, std::abs(cli_sq + 1.4), std::abs(cli_asq - 2.1)});
  }
  fs::remove_all(tmp);
  return {cli_ok && worst <= 0.1,
          fmt("max |error| %.3f dB over 9 traces; CLI: %.3f dB", worst, cli_sq) + fmt(" / %+.3f dB", cli_asq)};
}

// 8. Purity.
Outcome purity_check() {
  const double p = purity({from_db(-1.4), from_db(2.1), false});
  const bool symmetric = purity({from_db(-2.5), from_db(2.5), false}) == 1.0 && purity({1.0, 1.0, false}) == 1.0;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double gamma = std::pow(10.0, 4.0 + 5.0 * u(rng));
    const double f = i % 10 == 0 ? 0.0 : angular_to_hz(gamma) * 5.0 * u(rng);
    double coop = 10.0 * u(rng);
    if (f == 0.0 && coop == 1.0) coop = 0.5;
    const auto v = quadrature_variances_at(ModeParams(0.0, gamma, 0.0), DetectionChain(1.0, 1.0), coop, f);
    worst = std::max(worst, std::abs(v.purity() - 1.0));
  }
  return {std::abs(p - 0.923) <= 0.001 && symmetric && worst <= 1e-12,
          fmt("(-1.4, +2.1) dB -> %.4f; ideal-model max |mu - 1| = %.1e", p, worst)};
}

// 9. Intracavity pump clamped above threshold.
Outcome clamping() {
  const auto sys = fixtures::threshold_system();
  const double pth = threshold_power_incident(sys);
  const double ref = intracavity_pump_clamped(sys, OperatingPoint(pth, 0.0));
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double p = pth * (1.0 + 9.0 * i / 1000.0);
    worst = std::max(worst, std::abs(intracavity_pump_clamped(sys, OperatingPoint(p, 0.0)) / ref - 1.0));
  }
  const double below = intracavity_pump_clamped(sys, OperatingPoint(0.5 * pth, 0.0)) / ref;
  return {worst <= 4.0 * std::numeric_limits<double>::epsilon() && std::abs(below - 0.5) < 1e-12,
          fmt("max rel. variation on [P_th, 10 P_th] %.1e; at P_th/2 ratio %.6f", worst, below)};
}

// 10. Attenuation: (V - 1) scales linearly in T; dB series monotone.
Outcome attenuation() {
  double worst = 0.0;
  const QuadratureVariances v{from_db(-1.4), from_db(2.1), false};
  std::vector<double> ts;
  for (int i = 0; i <= 100; ++i) ts.push_back(1.0 - i / 100.0);
  for (double base : {v.var_sq, v.var_asq, 0.1, 7.0}) {
    for (double t : ts) {
      const double lhs = attenuate_variance(base, t) - 1.0;
      const double rhs = t * (base - 1.0);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(base - 1.0), 1e-300));
    }
  }
  const auto series = simulate_attenuation_series(v, ts);
  bool monotone = true;
  for (std::size_t i = 1; i < series.size(); ++i) {
    monotone = monotone && series[i].var_sq_db > series[i - 1].var_sq_db;
    monotone = monotone && series[i].var_asq_db < series[i - 1].var_asq_db;
  }
  monotone = monotone && series.back().var_sq_db == 0.0 && series.back().var_asq_db == 0.0;
  return {worst <= 1e-15 && monotone,
          fmt("max rel. deviation from T(V-1) %.1e; T = 0.5 -> %+.4f dB", worst, series[50].var_sq_db) +
              fmt(" / %+.4f dB", series[50].var_asq_db)};
}

// 11. Design optimizer against an exhaustive 512 x 512 grid.
Outcome optimizer_oracle() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto rate = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
  int ok = 0;
  double worst_gain = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    DesignConstraints c;
    c.gamma_int = trial % 4 == 0 ? 0.0 : rate(1e5, 1e7);
    const double g1 = rate(1e4, 1e7), g2 = rate(1e4, 1e7);
    c.gamma1_range = {g1, g1 * rate(1.5, 30.0)};
    c.gamma2_range = {g2, g2 * rate(1.5, 30.0)};
    c.sideband_frequency = trial % 3 == 0 ? 0.0 : rate(1e4, 5e6);
    c.max_cooperativity = trial % 2 == 0 ? rate(0.2, 5.0) : std::numeric_limits<double>::infinity();
    c.detection = DetectionChain(0.5 + 0.5 * u(rng), 0.7 + 0.3 * u(rng));
    const auto best = optimize_outcoupling(c);
    const auto grid = oracle::exhaustive_design_grid(c.detection.efficiency(), c.gamma1_range.min,
                                                     c.gamma1_range.max, c.gamma2_range.min, c.gamma2_range.max,
                                                     c.gamma_int, c.sideband_frequency, c.max_cooperativity, 512);
    const double gv = static_cast<double>(grid.variance);
    const bool not_worse = best.predicted_var_sq <= gv + 1e-12;
    const bool not_better = best.predicted_var_sq >= gv - static_cast<double>(grid.tolerance) - 1e-12;
    worst_gain = std::max(worst_gain, gv - best.predicted_var_sq);
    ok += not_worse && not_better;
  }
  return {ok == 10, fmt("%.0f / 10 constraint sets agree; max improvement over grid %.1e", ok, worst_gain)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  return files;
}

// 12. Every seeded command, twice, byte for byte.
Outcome determinism() {
  const fs::path tmp = fs::temp_directory_path() / "opo_acceptance_determinism";
  fs::remove_all(tmp);
  int failures = 0;
  auto run_all = [&](const fs::path& root) {
    std::vector<std::vector<std::string>> cmds;
    for (const char* s : {"swept_trace", "threshold_sweep", "squeezing_vs_pump", "vacuum"})
      cmds.push_back({"simulate", "--config", (kScenarios / (std::string(s) + ".json")).string(), "--out",
                      (root / s).string()});
    cmds.push_back({"fit", "trace", "--input", (root / "swept_trace/trace.csv").string(), "--calibration",
                    (root / "swept_trace/calibration.csv").string(), "--out", (root / "fit").string()});
    cmds.push_back({"fit", "threshold", "--input", (root / "threshold_sweep/threshold.csv").string(), "--out",
                    (root / "fit").string()});
    cmds.push_back({"fit", "squeezing", "--config", (kScenarios / "squeezing_vs_pump.json").string(), "--input",
                    (root / "squeezing_vs_pump/squeezing.csv").string(), "--out", (root / "fit").string()});
    for (const char* s : {"max_coupling_design", "equal_coupling_design"})
      cmds.push_back({"optimize", "--config", (kScenarios / (std::string(s) + ".json")).string(), "--out",
                      (root / s).string()});
    cmds.push_back({"plot", "--input", (root / "swept_trace/trace.csv").string(), "--out", (root / "plots").string()});
    for (auto& args : cmds) {
      args.insert(args.begin(), "opo_squeeze");
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream out, err;
      failures += cli::run(static_cast<int>(argv.size()), argv.data(), out, err) != 0;
    }
  };
  run_all(tmp / "a");
  run_all(tmp / "b");
  const auto a = snapshot(tmp / "a");
  const auto b = snapshot(tmp / "b");
  std::size_t differing = 0;
  for (const auto& [name, content] : a) {
    auto it = b.find(name);
    differing += it == b.end() || it->second != content;
  }
  fs::remove_all(tmp);
  const bool ok = failures == 0 && a.size() == b.size() && differing == 0 && a.size() >= 15;
  return {ok, fmt("%.0f files compared, %.0f differ", static_cast<double>(a.size()), static_cast<double>(differing)) +
                  fmt(", %.0f command failures", failures)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "minimum-uncertainty identity", 1.0, minimum_uncertainty},
      {2, "3 dB equal-coupling limit", 0.0, three_db_limit},
      {3, "optimal cooperativity", 0.0, optimal_cooperativity_check},
      {4, "threshold consistency", 0.0, threshold_consistency},
      {5, "threshold fit reproduction", 10.0, threshold_fit},
      {6, "coupling constant round trip", 0.0, coupling_round_trip},
      {7, "swept-trace extrema round trip", 0.0, trace_pipeline},
      {8, "purity", 0.0, purity_check},
      {9, "pump clamping", 0.0, clamping},
      {10, "attenuation linearity", 0.0, attenuation},
      {11, "design optimizer vs exhaustive grid", 30.0, optimizer_oracle},
      {12, "determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0.0 && secs >= c.time_limit_s) {
      o.pass = false;
      o.detail += fmt(" [over time limit %.0f s]", c.time_limit_s);
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), secs);
  }
  std::printf("%zu / %zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
