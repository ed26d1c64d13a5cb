#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "opo/errors.hpp"
#include "opo/estimation.hpp"
#include "oracles.hpp"

using namespace opo;
using doctest::Approx;

namespace {

constexpr double kPth = 1.35e-6;
constexpr double kAmplitude = 0.4e-6;

std::string what_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

DataSeries squeezing_curve(double eff, const ModeParams& signal, double f, Quadrature q,
                           const std::vector<double>& ratios) {
  std::vector<DataPoint> pts;
  for (double x : ratios) {
    const auto v = oracle::quadrature(eff, signal.gamma1(), signal.gamma2(), signal.gamma_int(), x, f);
    const long double lin = q == Quadrature::squeezed ? v.sq : v.asq;
    pts.push_back({x, static_cast<double>(10.0L * std::log10(lin)), std::nullopt});
  }
  return DataSeries(std::move(pts));
}

}  // namespace

TEST_CASE("data series validation") {
  CHECK_THROWS_AS(DataSeries({{1.0, 1.0, std::nullopt}, {1.0, 2.0, std::nullopt}}), SchemaError);
  CHECK_THROWS_AS(DataSeries({{NAN, 1.0, std::nullopt}}), SchemaError);
  CHECK_THROWS_AS(DataSeries({{1.0, INFINITY, std::nullopt}}), SchemaError);
  CHECK_THROWS_AS(DataSeries({{1.0, 1.0, 0.0}}), SchemaError);
  const DataSeries s({{3.0, 1.0, 0.1}, {1.0, 2.0, 0.1}});
  CHECK(s.points().front().x == 1.0);
  CHECK(s.weighted());
  CHECK_FALSE(DataSeries({{3.0, 1.0, 0.1}, {1.0, 2.0, std::nullopt}}).weighted());
}

TEST_CASE("threshold fit: noiseless round trip") {
  for (std::size_t n : {8u, 30u, 101u}) {
    for (double span : {2.0, 4.0, 10.0}) {
      const auto data = fixtures::threshold_sweep(kPth, kAmplitude, span * kPth, n, 0.0, 1);
      const auto fit = fit_threshold_curve(data);
      CAPTURE(n);
      CAPTURE(span);
      REQUIRE(fit.converged);
      CHECK(fit.parameters.at("P_th") == Approx(kPth).epsilon(1e-8));
      CHECK(fit.parameters.at("A") == Approx(kAmplitude).epsilon(1e-8));
      CHECK(fit.residual_norm < 1e-8 * kAmplitude);
    }
  }
}

TEST_CASE("threshold fit: kink between samples") {
  // Threshold falls strictly between the two samples that bracket it.
  std::vector<DataPoint> pts;
  for (int i = 0; i < 12; ++i) {
    const double p = 0.37e-6 * i;
    pts.push_back({p, oracle::above_threshold_signal(p, kPth, kAmplitude), std::nullopt});
  }
  const auto fit = fit_threshold_curve(DataSeries(std::move(pts)));
  CHECK(fit.parameters.at("P_th") == Approx(kPth).epsilon(1e-8));
}

TEST_CASE("threshold fit: 2% multiplicative noise, 100 seeds") {
  int within = 0;
  int covered = 0;
  const int replicates = 100;
  for (int seed = 0; seed < replicates; ++seed) {
    const auto data = fixtures::threshold_sweep(kPth, kAmplitude, 4.0 * kPth, 30, 0.02, 1000 + seed);
    const auto fit = fit_threshold_curve(data);
    REQUIRE(fit.converged);
    const double p = fit.parameters.at("P_th");
    within += std::abs(p / kPth - 1.0) <= 0.05;
    covered += std::abs(p - kPth) <= fit.standard_errors.at("P_th");
  }
  CHECK(within >= 95);
  MESSAGE("1-sigma coverage: " << covered << " / " << replicates);
  CHECK(covered >= 55);
  CHECK(covered <= 80);
}

TEST_CASE("threshold fit: standard-error coverage over more replicates") {
  int covered = 0;
  const int replicates = 400;
  for (int seed = 0; seed < replicates; ++seed) {
    const auto data = fixtures::threshold_sweep(kPth, kAmplitude, 6.0 * kPth, 40, 0.02, 77000 + seed);
    const auto fit = fit_threshold_curve(data);
    REQUIRE(fit.converged);
    covered += std::abs(fit.parameters.at("P_th") - kPth) <= fit.standard_errors.at("P_th");
  }
  MESSAGE("1-sigma coverage: " << covered << " / " << replicates);
  CHECK(covered >= 0.55 * replicates);
  CHECK(covered <= 0.80 * replicates);
}

TEST_CASE("threshold fit: coverage under additive noise") {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> normal(0.0, 1.0);
  int covered = 0;
  const int replicates = 400;
  for (int rep = 0; rep < replicates; ++rep) {
    std::vector<DataPoint> pts;
    for (int i = 0; i < 40; ++i) {
      const double p = 6.0 * kPth * i / 39.0;
      pts.push_back({p, oracle::above_threshold_signal(p, kPth, kAmplitude) + 0.01 * kAmplitude * normal(rng),
                     std::nullopt});
    }
    const auto fit = fit_threshold_curve(DataSeries(std::move(pts)));
    REQUIRE(fit.converged);
    covered += std::abs(fit.parameters.at("P_th") - kPth) <= fit.standard_errors.at("P_th");
  }
  MESSAGE("1-sigma coverage: " << covered << " / " << replicates);
  CHECK(covered >= 0.55 * replicates);
  CHECK(covered <= 0.80 * replicates);
}

TEST_CASE("threshold fit: scale equivariance") {
  const auto base = fixtures::threshold_sweep(kPth, kAmplitude, 4.0 * kPth, 25, 0.02, 42);
  const auto ref = fit_threshold_curve(base);
  for (auto [sx, sy] : {std::pair{1e6, 1.0}, std::pair{1.0, 1e-3}, std::pair{3.7, 250.0}}) {
    std::vector<DataPoint> pts;
    for (const auto& p : base.points()) pts.push_back({p.x * sx, p.y * sy, std::nullopt});
    const auto fit = fit_threshold_curve(DataSeries(std::move(pts)));
    CHECK(fit.parameters.at("P_th") == Approx(ref.parameters.at("P_th") * sx).epsilon(1e-7));
    CHECK(fit.parameters.at("A") == Approx(ref.parameters.at("A") * sy).epsilon(1e-7));
  }
}

TEST_CASE("threshold fit: degenerate input") {
  std::vector<DataPoint> zeros;
  for (int i = 0; i < 10; ++i) zeros.push_back({1e-7 * i, 0.0, std::nullopt});
  const auto msg = what_of([&] { fit_threshold_curve(DataSeries(zeros)); });
  CHECK(msg.find("threshold not bracketed") != std::string::npos);
  CHECK_THROWS_AS(fit_threshold_curve(DataSeries(zeros)), AnalysisError);
  // Single point above threshold cannot fix both parameters.
  zeros.back().y = 1e-7;
  CHECK_THROWS_AS(fit_threshold_curve(DataSeries(zeros)), AnalysisError);
  CHECK_THROWS_AS(fit_threshold_curve(DataSeries({{1.0, 1.0, std::nullopt}, {2.0, 2.0, std::nullopt}})),
                  AnalysisError);
}

TEST_CASE("threshold fit: weighted data") {
  auto data = fixtures::threshold_sweep(kPth, kAmplitude, 4.0 * kPth, 30, 0.0, 1);
  std::vector<DataPoint> pts;
  for (auto p : data.points()) {
    p.uncertainty = 0.01 * kAmplitude;
    pts.push_back(p);
  }
  const auto fit = fit_threshold_curve(DataSeries(std::move(pts)));
  CHECK(fit.parameters.at("P_th") == Approx(kPth).epsilon(1e-8));
}

TEST_CASE("coupling constant extraction") {
  const auto sys = fixtures::threshold_system();
  const ThresholdMeasurement m{sys.signal(), sys.pump(), sys.pump_angular_frequency(), threshold_power(sys)};
  CHECK(m.threshold_power == Approx(1.35e-6).epsilon(1e-10));
  CHECK(coupling_constant_from_threshold(m) == Approx(sys.g()).epsilon(1e-12));

  const auto one = extract_coupling_constant({m});
  CHECK(one.parameters.at("g") == Approx(sys.g()).epsilon(1e-12));
  CHECK(one.standard_errors.at("g") == 0.0);
  CHECK(threshold_power(sys.with_g(one.parameters.at("g"))) == Approx(m.threshold_power).epsilon(1e-10));

  // Ensemble of thresholds scattered by 5%: mean g stays within 2.1 +/- 0.2 kHz.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> scatter(0.0, 0.05);
  std::vector<ThresholdMeasurement> ms;
  for (int i = 0; i < 20; ++i) {
    auto mi = m;
    mi.threshold_power *= 1.0 + scatter(rng);
    ms.push_back(mi);
  }
  const auto ens = extract_coupling_constant(ms);
  CHECK(angular_to_hz(ens.parameters.at("g")) == Approx(2.1e3).epsilon(0.2 / 2.1));
  CHECK(ens.standard_errors.at("g") > 0.0);

  CHECK_THROWS(extract_coupling_constant({}));
}

TEST_CASE("coupling constant: random systems round trip") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto sys = fixtures::random_system(rng);
    const ThresholdMeasurement m{sys.signal(), sys.pump(), sys.pump_angular_frequency(), threshold_power(sys)};
    const double g = coupling_constant_from_threshold(m);
    CHECK(g == Approx(sys.g()).epsilon(1e-11));
    CHECK(threshold_power(sys.with_g(g)) == Approx(m.threshold_power).epsilon(1e-10));
  }
}

TEST_CASE("squeezing fit: round trips") {
  const auto signal = fixtures::undercoupled_signal();
  const double eff = 0.86 * 0.88 * 0.88;
  const std::vector<double> ratios{0.1, 0.3, 0.6, 1.0, 1.5, 2.2, 3.0, 4.0, 5.5, 7.0, 9.0};

  SqueezingFitConfig cfg;
  cfg.signal = signal;
  cfg.sideband_frequency = 2e6;
  cfg.detection = DetectionChain(0.5, 1.0);

  SUBCASE("efficiency free") {
    const auto fit = fit_squeezing_vs_pump(squeezing_curve(eff, signal, 2e6, Quadrature::squeezed, ratios), cfg);
    REQUIRE(fit.converged);
    CHECK(fit.parameters.at("efficiency") == Approx(eff).epsilon(1e-8));
    CHECK(fit.parameters.at("optimal_pump_ratio") == Approx(4.36671997306624).epsilon(1e-12));
  }
  SUBCASE("efficiency and linewidth free") {
    cfg.fit_linewidth = true;
    cfg.signal = ModeParams(signal.gamma1() * 1.3, signal.gamma2() * 1.3, signal.gamma_int() * 1.3);
    const auto fit = fit_squeezing_vs_pump(squeezing_curve(eff, signal, 2e6, Quadrature::squeezed, ratios), cfg);
    REQUIRE(fit.converged);
    CHECK(fit.parameters.at("efficiency") == Approx(eff).epsilon(1e-8));
    CHECK(fit.parameters.at("Gamma") == Approx(signal.total()).epsilon(1e-8));
    CHECK(fit.parameters.at("optimal_pump_ratio") == Approx(4.37).epsilon(0.01 / 4.37));
  }
  SUBCASE("coupling ratio free, anti-squeezed quadrature") {
    cfg.fit_efficiency = false;
    cfg.fit_coupling_ratio = true;
    cfg.detection = DetectionChain(0.86, 0.88);
    cfg.quadrature = Quadrature::anti_squeezed;
    const std::vector<double> below{0.1, 0.2, 0.35, 0.5, 0.65, 0.8};
    const auto fit = fit_squeezing_vs_pump(squeezing_curve(eff, signal, 2e6, Quadrature::anti_squeezed, below), cfg);
    REQUIRE(fit.converged);
    CHECK(fit.parameters.at("coupling_ratio") == Approx(signal.gamma2() / signal.total()).epsilon(1e-8));
  }
}

TEST_CASE("squeezing fit: noisy ensembles centre on the optimum near 4.4") {
  // The minimum of the squeezing curve is shallow, so a single noisy fit pins
  // G_opt only loosely; the ensemble median is the stable quantity.
  const auto signal = fixtures::undercoupled_signal();
  const double eff = 0.86 * 0.88 * 0.88;
  for (bool efficiency_free : {false, true}) {
    const double sigma = efficiency_free ? 0.01 : 0.05;
    std::vector<double> optima;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> noise(0.0, sigma);
      std::vector<DataPoint> pts;
      for (int i = 1; i <= 20; ++i) {
        const double x = 0.5 * i;
        const auto v = oracle::quadrature(eff, signal.gamma1(), signal.gamma2(), signal.gamma_int(), x, 2e6);
        pts.push_back({x, static_cast<double>(10.0L * std::log10(v.sq)) + noise(rng), sigma});
      }
      SqueezingFitConfig cfg;
      cfg.signal = ModeParams(signal.gamma1() * 0.8, signal.gamma2() * 0.8, signal.gamma_int() * 0.8);
      cfg.detection = DetectionChain(0.86, 0.88);
      cfg.sideband_frequency = 2e6;
      cfg.fit_efficiency = efficiency_free;
      cfg.fit_linewidth = true;
      const auto fit = fit_squeezing_vs_pump(DataSeries(std::move(pts)), cfg);
      REQUIRE(fit.converged);
      CHECK(fit.standard_errors.count("Gamma") == 1);
      optima.push_back(fit.parameters.at("optimal_pump_ratio"));
    }
    std::sort(optima.begin(), optima.end());
    CAPTURE(efficiency_free);
    CHECK(optima[50] == Approx(4.37).epsilon(0.05));
    CHECK(optima[5] > 2.5);
    CHECK(optima[94] < 7.0);
  }
}

TEST_CASE("squeezing fit: unidentifiable configurations") {
  SqueezingFitConfig cfg;
  cfg.signal = fixtures::undercoupled_signal();
  cfg.sideband_frequency = 2e6;
  const DataSeries one({{2.0, -1.0, std::nullopt}});
  CHECK(what_of([&] { fit_squeezing_vs_pump(one, cfg); }).find("unidentifiable") != std::string::npos);
  CHECK_THROWS_AS(fit_squeezing_vs_pump(one, cfg), AnalysisError);

  const DataSeries many({{1.0, -1.0, std::nullopt}, {2.0, -1.2, std::nullopt}, {3.0, -1.3, std::nullopt}});
  auto none = cfg;
  none.fit_efficiency = false;
  CHECK_THROWS_AS(fit_squeezing_vs_pump(many, none), AnalysisError);
  auto both = cfg;
  both.fit_coupling_ratio = true;
  CHECK_THROWS_AS(fit_squeezing_vs_pump(many, both), AnalysisError);
  auto three = cfg;
  three.fit_linewidth = true;
  CHECK_NOTHROW(fit_squeezing_vs_pump(many, three));
}

TEST_CASE("extrema: swept-trace round trip within 0.1 dB") {
  const QuadratureVariances v{from_db(-1.4), from_db(2.1), false};
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto cfg = make_trace_config(400, 10000, 0.0, 4 * kPi, seed, 0.3);
    auto cal_cfg = cfg;
    cal_cfg.rng_seed = seed + 1000;
    const auto r = extract_extrema(simulate_trace(v, cfg), simulate_calibration(cal_cfg));
    CAPTURE(seed);
    CHECK(std::abs(r.var_sq_db + 1.4) <= 0.1);
    CHECK(std::abs(r.var_asq_db - 2.1) <= 0.1);
    CHECK(r.n_minima >= 3);
    CHECK(r.n_maxima >= 3);
    CHECK(r.var_sq_db_err > 0.0);
    CHECK(r.var_sq_db_err < 0.1);
    CHECK(std::abs(r.shot_noise_level_db) < 0.01);
  }
}

TEST_CASE("extrema: vacuum input has no extrema") {
  const QuadratureVariances vac{1.0, 1.0, false};
  const auto cfg = make_trace_config(400, 10000, 0.0, 4 * kPi, 8);
  auto cal_cfg = cfg;
  cal_cfg.rng_seed = 9;
  const auto msg = what_of([&] { extract_extrema(simulate_trace(vac, cfg), simulate_calibration(cal_cfg)); });
  CHECK(msg.find("no extrema") != std::string::npos);
  CHECK_THROWS_AS(extract_extrema(simulate_trace(vac, cfg), simulate_calibration(cal_cfg)), AnalysisError);
}

TEST_CASE("extrema: invariant under a common dB offset") {
  const QuadratureVariances v{from_db(-1.4), from_db(2.1), false};
  const auto cfg = make_trace_config(400, 10000, 0.0, 4 * kPi, 21, 0.3);
  auto cal_cfg = cfg;
  cal_cfg.rng_seed = 22;
  auto trace = simulate_trace(v, cfg);
  auto cal = simulate_calibration(cal_cfg);
  const auto ref = extract_extrema(trace, cal);
  for (auto& p : trace.points) p.variance_db += 0.3;
  for (auto& p : cal.points) p.variance_db += 0.3;
  const auto shifted = extract_extrema(trace, cal);
  CHECK(shifted.var_sq_db == Approx(ref.var_sq_db).epsilon(1e-12));
  CHECK(shifted.var_asq_db == Approx(ref.var_asq_db).epsilon(1e-12));
  CHECK(shifted.shot_noise_level_db == Approx(ref.shot_noise_level_db + 0.3).epsilon(1e-12));
}

TEST_CASE("extrema: mismatched lengths are rejected") {
  const QuadratureVariances v{from_db(-1.4), from_db(2.1), false};
  const auto trace = simulate_trace(v, make_trace_config(400, 100, 0.0, 4 * kPi, 1));
  const auto cal = simulate_calibration(make_trace_config(300, 100, 0.0, 4 * kPi, 2));
  CHECK_THROWS_AS(extract_extrema(trace, cal), std::invalid_argument);
}

TEST_CASE("purity with uncertainty") {
  const auto p = purity_with_uncertainty(-1.4, 0.1, 2.1, 0.1);
  CHECK(p.purity == Approx(0.922571427154763).epsilon(1e-12));
  CHECK(p.uncertainty == Approx(0.0150210638).epsilon(1e-8));
  const auto sym = purity_with_uncertainty(-2.0, 0.0, 2.0, 0.0);
  CHECK(sym.purity == 1.0);
  CHECK(sym.uncertainty == 0.0);
}
