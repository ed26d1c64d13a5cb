#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "opo/core.hpp"
#include "opo/estimation.hpp"
#include "oracles.hpp"

namespace fixtures {

inline constexpr double kPumpWavelength = 532e-9;
inline const double kPumpOmega = 2.0 * opo::kPi * opo::kSpeedOfLight / kPumpWavelength;

/// Signal mode with 2 Gamma = 2 pi x 2.18 MHz (slightly undercoupled).
inline opo::ModeParams undercoupled_signal() {
  return opo::ModeParams::from_hz(0.45e6, 0.09e6, 0.55e6);
}

/// Critically coupled pump whose linewidth puts P_th at 1.35 uW for
/// g = 2 pi x 2.1 kHz and the signal mode above.
inline opo::ModeParams threshold_pump() {
  return opo::ModeParams::from_hz(4271735.848071511, 0.0, 4271735.848071511);
}

inline opo::SystemParams threshold_system() {
  return {undercoupled_signal(), threshold_pump(), opo::hz_to_angular(2.1e3), kPumpOmega, 0.75};
}

/// Random valid system with rates spanning several decades.
inline opo::SystemParams random_system(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lograte(std::log(1e4), std::log(1e8));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto rate = [&] { return std::exp(lograte(rng)); };
  const opo::ModeParams signal(rate(), rate(), unit(rng) < 0.2 ? 0.0 : rate());
  const opo::ModeParams pump(rate(), rate(), rate());
  std::uniform_real_distribution<double> logg(std::log(1e2), std::log(1e6));
  return {signal, pump, std::exp(logg(rng)), kPumpOmega * (0.5 + unit(rng)), 0.1 + 0.9 * unit(rng)};
}

/// Uniform pump sweep over [0, p_max] with multiplicative Gaussian noise.
inline opo::DataSeries threshold_sweep(double p_th, double amplitude, double p_max, std::size_t n,
                                       double relative_noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<opo::DataPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = p_max * static_cast<double>(i) / static_cast<double>(n - 1);
    const double y = oracle::above_threshold_signal(p, p_th, amplitude);
    pts.push_back({p, y * (1.0 + relative_noise * normal(rng)), std::nullopt});
  }
  return opo::DataSeries(std::move(pts));
}

}  // namespace fixtures
