#include "opo/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "opo/errors.hpp"

namespace opo {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

struct Terms {
  double s;     // sqrt(G)
  double w2;    // (2 pi f / Gamma)^2
  double c;     // eta V^2 gamma2 / Gamma
  double a;     // (1 + s)^2 + w^2
  double b;     // (1 - s)^2 + w^2
};

Terms model_terms(const ModeParams& signal, const DetectionChain& det, double cooperativity,
                  double sideband_frequency) {
  require(finite_nonneg(cooperativity), "cooperativity must be finite and >= 0");
  require(finite_nonneg(sideband_frequency), "sideband frequency must be finite and >= 0");
  const double gamma = signal.total();
  const double s = std::sqrt(cooperativity);
  const double w = 2.0 * kPi * sideband_frequency / gamma;
  Terms t{};
  t.s = s;
  t.w2 = w * w;
  t.c = det.efficiency() * signal.gamma2() / gamma;
  t.a = (1.0 + s) * (1.0 + s) + t.w2;
  t.b = (1.0 - s) * (1.0 - s) + t.w2;
  return t;
}

// (1+s)^2 - 4cs rewritten as (1-s)^2 + 4s(1-c) so the ideal case c == 1 has no
// cancellation near threshold.
double squeezed_from_terms(const Terms& t) {
  return ((1.0 - t.s) * (1.0 - t.s) + t.w2 + 4.0 * t.s * (1.0 - t.c)) / t.a;
}

}  // namespace

ModeParams::ModeParams(double gamma1, double gamma2, double gamma_int)
    : gamma1_(gamma1), gamma2_(gamma2), gamma_int_(gamma_int) {
  require(finite_nonneg(gamma1) && finite_nonneg(gamma2) && finite_nonneg(gamma_int),
          "mode rates must be finite and >= 0");
  require(total() > 0.0, "total mode loss rate must be > 0");
}

ModeParams ModeParams::from_hz(double gamma1_hz, double gamma2_hz, double gamma_int_hz) {
  return {hz_to_angular(gamma1_hz), hz_to_angular(gamma2_hz), hz_to_angular(gamma_int_hz)};
}

SystemParams::SystemParams(ModeParams signal, ModeParams pump, double g,
                           double pump_angular_frequency, double coupling_efficiency)
    : signal_(signal),
      pump_(pump),
      g_(g),
      pump_angular_frequency_(pump_angular_frequency),
      coupling_efficiency_(coupling_efficiency) {
  require(std::isfinite(g) && g > 0.0, "g must be finite and > 0");
  require(std::isfinite(pump_angular_frequency) && pump_angular_frequency > 0.0,
          "pump angular frequency must be finite and > 0");
  require(coupling_efficiency >= 0.0 && coupling_efficiency <= 1.0,
          "coupling efficiency must lie in [0, 1]");
}

SystemParams SystemParams::with_g(double g) const {
  return {signal_, pump_, g, pump_angular_frequency_, coupling_efficiency_};
}

SystemParams SystemParams::with_signal(const ModeParams& signal) const {
  return {signal, pump_, g_, pump_angular_frequency_, coupling_efficiency_};
}

DetectionChain::DetectionChain(double eta, double visibility) : eta_(eta), visibility_(visibility) {
  require(eta >= 0.0 && eta <= 1.0, "detection efficiency must lie in [0, 1]");
  require(visibility >= 0.0 && visibility <= 1.0, "visibility must lie in [0, 1]");
}

OperatingPoint::OperatingPoint(double incident_pump_power_w, double sideband_frequency_hz)
    : incident_pump_power(incident_pump_power_w), sideband_frequency(sideband_frequency_hz) {
  require(finite_nonneg(incident_pump_power_w), "pump power must be finite and >= 0");
  require(finite_nonneg(sideband_frequency_hz), "sideband frequency must be finite and >= 0");
}

double QuadratureVariances::var_sq_db() const { return to_db(var_sq); }
double QuadratureVariances::var_asq_db() const { return to_db(var_asq); }
double QuadratureVariances::purity() const { return opo::purity(*this); }

double total_half_linewidth(const ModeParams& mode) { return mode.total(); }

double incoupled_power(const SystemParams& system, const OperatingPoint& op) {
  return system.coupling_efficiency() * op.incident_pump_power;
}

double pump_photon_number_incoupled(const SystemParams& system, double incoupled_power_w) {
  require(finite_nonneg(incoupled_power_w), "pump power must be finite and >= 0");
  const double gamma_p = system.pump().total();
  return 2.0 * system.pump().gamma1() * incoupled_power_w /
         (kHbar * system.pump_angular_frequency() * gamma_p * gamma_p);
}

double pump_photon_number(const SystemParams& system, const OperatingPoint& op) {
  return pump_photon_number_incoupled(system, incoupled_power(system, op));
}

double cooperativity_incoupled(const SystemParams& system, double incoupled_power_w) {
  const double gamma = system.signal().total();
  const double g = system.g();
  return 4.0 * g * g * pump_photon_number_incoupled(system, incoupled_power_w) / (gamma * gamma);
}

double cooperativity(const SystemParams& system, const OperatingPoint& op) {
  return cooperativity_incoupled(system, incoupled_power(system, op));
}

double threshold_power(const SystemParams& system) {
  const double gamma1p = system.pump().gamma1();
  require(gamma1p > 0.0, "pump port 1 coupling is zero: the pump cannot be injected");
  const double gamma = system.signal().total();
  const double gamma_p = system.pump().total();
  const double g = system.g();
  return kHbar * system.pump_angular_frequency() * gamma * gamma * gamma_p * gamma_p /
         (8.0 * g * g * gamma1p);
}

double threshold_power_incident(const SystemParams& system) {
  require(system.coupling_efficiency() > 0.0,
          "coupling efficiency is zero: no incident power reaches threshold");
  return threshold_power(system) / system.coupling_efficiency();
}

QuadratureVariances quadrature_variances_at(const ModeParams& signal, const DetectionChain& det,
                                            double cooperativity, double sideband_frequency) {
  const Terms t = model_terms(signal, det, cooperativity, sideband_frequency);
  if (t.b == 0.0) {
    throw PoleError("anti-squeezed variance diverges at cooperativity 1 and zero sideband frequency");
  }
  QuadratureVariances v;
  v.var_sq = squeezed_from_terms(t);
  v.var_asq = (t.b + 4.0 * t.c * t.s) / t.b;
  v.model_extrapolated = cooperativity > 1.0;
  return v;
}

double squeezed_variance_at(const ModeParams& signal, const DetectionChain& det,
                            double cooperativity, double sideband_frequency) {
  return squeezed_from_terms(model_terms(signal, det, cooperativity, sideband_frequency));
}

QuadratureVariances quadrature_variances(const SystemParams& system, const DetectionChain& det,
                                         const OperatingPoint& op) {
  return quadrature_variances_at(system.signal(), det, cooperativity(system, op),
                                 op.sideband_frequency);
}

double model_purity(const ModeParams& signal, const DetectionChain& det, double cooperativity,
                    double sideband_frequency) {
  const Terms t = model_terms(signal, det, cooperativity, sideband_frequency);
  const double excess = 16.0 * t.c * (1.0 - t.c) * cooperativity;
  if (t.b == 0.0) return excess == 0.0 ? 1.0 : 0.0;
  return 1.0 / std::sqrt(1.0 + excess / (t.a * t.b));
}

double optimal_cooperativity(const ModeParams& signal, double sideband_frequency) {
  require(finite_nonneg(sideband_frequency), "sideband frequency must be finite and >= 0");
  const double w = 2.0 * kPi * sideband_frequency / signal.total();
  return 1.0 + w * w;
}

double signal_power_above_threshold_incoupled(const SystemParams& system,
                                              double incoupled_power_w) {
  require(finite_nonneg(incoupled_power_w), "pump power must be finite and >= 0");
  const double p_th = threshold_power(system);
  if (incoupled_power_w <= p_th) return 0.0;
  const auto& s = system.signal();
  const auto& p = system.pump();
  return 4.0 * p_th * (s.gamma1() / s.total()) * (p.gamma1() / p.total()) *
         (std::sqrt(incoupled_power_w / p_th) - 1.0);
}

double signal_power_above_threshold(const SystemParams& system, const OperatingPoint& op) {
  return signal_power_above_threshold_incoupled(system, incoupled_power(system, op));
}

double intracavity_pump_clamped(const SystemParams& system, const OperatingPoint& op) {
  const double p = incoupled_power(system, op);
  return pump_photon_number_incoupled(system, std::min(p, threshold_power(system)));
}

double purity(const QuadratureVariances& v) {
  require(v.var_sq > 0.0 && v.var_asq > 0.0, "purity needs strictly positive variances");
  return 1.0 / std::sqrt(v.var_sq * v.var_asq);
}

double to_db(double linear) {
  require(linear > 0.0, "dB conversion needs a strictly positive value");
  return 10.0 * std::log10(linear);
}

double from_db(double db) { return std::pow(10.0, db / 10.0); }

double db_convert(double value, DbDirection direction) {
  return direction == DbDirection::to_db ? to_db(value) : from_db(value);
}

double attenuate_variance(double variance, double transmission) {
  require(transmission >= 0.0 && transmission <= 1.0, "transmission must lie in [0, 1]");
  return 1.0 + transmission * (variance - 1.0);
}

}  // namespace opo
