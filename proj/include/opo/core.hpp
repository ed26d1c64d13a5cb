#pragma once

// Closed-form model of a degenerate, doubly resonant OPO with two coupling
// ports. The pump enters through port 1; the squeezed field is detected
// after port 2.
//
// Rate convention: every gamma / Gamma / g is an angular half-rate in rad/s,
// Gamma = Gamma_FWHM / 2. Frequencies called `*_frequency` without "angular"
// are ordinary frequencies in Hz. Powers are in watts.

#include <numbers>

namespace opo {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kPlanck = 6.62607015e-34;  // J s, exact
inline constexpr double kHbar = kPlanck / (2.0 * kPi);
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact

constexpr double hz_to_angular(double hz) { return 2.0 * kPi * hz; }
constexpr double angular_to_hz(double rad_per_s) { return rad_per_s / (2.0 * kPi); }

/// Loss and coupling half-rates of one resonance. gamma1 and gamma2 are the
/// two prism ports, gamma_int the intrinsic loss. All finite, >= 0, with a
/// strictly positive sum.
class ModeParams {
public:
  ModeParams(double gamma1, double gamma2, double gamma_int);

  /// Same as the constructor but with rates given as rate / 2pi in Hz.
  static ModeParams from_hz(double gamma1_hz, double gamma2_hz, double gamma_int_hz);

  double gamma1() const { return gamma1_; }
  double gamma2() const { return gamma2_; }
  double gamma_int() const { return gamma_int_; }
  double total() const { return gamma1_ + gamma2_ + gamma_int_; }

  friend bool operator==(const ModeParams&, const ModeParams&) = default;

private:
  double gamma1_;
  double gamma2_;
  double gamma_int_;
};

class SystemParams {
public:
  /// g > 0 and pump_angular_frequency > 0; coupling_efficiency in [0, 1] is
  /// the fraction of incident pump power that is coupled into the pump mode.
  SystemParams(ModeParams signal, ModeParams pump, double g, double pump_angular_frequency,
               double coupling_efficiency = 1.0);

  const ModeParams& signal() const { return signal_; }
  const ModeParams& pump() const { return pump_; }
  double g() const { return g_; }
  double pump_angular_frequency() const { return pump_angular_frequency_; }
  double coupling_efficiency() const { return coupling_efficiency_; }

  SystemParams with_g(double g) const;
  SystemParams with_signal(const ModeParams& signal) const;

private:
  ModeParams signal_;
  ModeParams pump_;
  double g_;
  double pump_angular_frequency_;
  double coupling_efficiency_;
};

/// Detection efficiency eta and homodyne visibility V. The model only sees
/// the product eta * V^2.
class DetectionChain {
public:
  DetectionChain(double eta = 1.0, double visibility = 1.0);

  double eta() const { return eta_; }
  double visibility() const { return visibility_; }
  double efficiency() const { return eta_ * visibility_ * visibility_; }

private:
  double eta_;
  double visibility_;
};

struct OperatingPoint {
  OperatingPoint(double incident_pump_power, double sideband_frequency);

  double incident_pump_power;  // W, before coupling_efficiency
  double sideband_frequency;   // Hz
};

/// Quadrature variances normalized to shot noise = 1.
struct QuadratureVariances {
  double var_sq = 1.0;
  double var_asq = 1.0;
  // Set when the cooperativity exceeds 1: the undepleted-pump model is being
  // used past the oscillation threshold.
  bool model_extrapolated = false;

  double var_sq_db() const;
  double var_asq_db() const;
  double purity() const;
};

double total_half_linewidth(const ModeParams& mode);

/// Incident pump power times coupling_efficiency. This is the only place the
/// incident/incoupled conversion happens.
double incoupled_power(const SystemParams& system, const OperatingPoint& op);

/// Resonant, undepleted intracavity pump photon number
/// n_p = 2 gamma1p P / (hbar omega_p Gamma_p^2) for incoupled power P.
double pump_photon_number(const SystemParams& system, const OperatingPoint& op);
double pump_photon_number_incoupled(const SystemParams& system, double incoupled_power_w);

/// G = 4 g^2 n_p / Gamma^2 with Gamma the signal half-linewidth.
double cooperativity(const SystemParams& system, const OperatingPoint& op);
double cooperativity_incoupled(const SystemParams& system, double incoupled_power_w);

/// Oscillation threshold as incoupled power. Throws std::invalid_argument when
/// the pump mode has gamma1 == 0.
double threshold_power(const SystemParams& system);
/// Threshold expressed as incident power (threshold_power / coupling_efficiency).
double threshold_power_incident(const SystemParams& system);

/// Squeezed and anti-squeezed variances at the operating point.
/// Throws PoleError at G == 1, f == 0.
QuadratureVariances quadrature_variances(const SystemParams& system, const DetectionChain& det,
                                         const OperatingPoint& op);

/// Same model parameterized directly by cooperativity.
QuadratureVariances quadrature_variances_at(const ModeParams& signal, const DetectionChain& det,
                                            double cooperativity, double sideband_frequency);

/// Squeezed variance only; finite for every G >= 0.
double squeezed_variance_at(const ModeParams& signal, const DetectionChain& det,
                            double cooperativity, double sideband_frequency);

/// Purity of the model state, evaluated as
/// (1 + 16 c (1 - c) G / (A B))^(-1/2) with c = eta V^2 gamma2 / Gamma,
/// A = (1 + sqrt G)^2 + w^2, B = (1 - sqrt G)^2 + w^2, w = 2 pi f / Gamma.
/// Well defined at the pole: 1 when c == 1, otherwise 0.
double model_purity(const ModeParams& signal, const DetectionChain& det, double cooperativity,
                    double sideband_frequency);

/// Cooperativity minimizing the squeezed variance: 1 + (2 pi f / Gamma)^2.
double optimal_cooperativity(const ModeParams& signal, double sideband_frequency);

/// Bright signal power above threshold for zero pump and phase-matching
/// detuning; exactly 0 at and below threshold.
double signal_power_above_threshold(const SystemParams& system, const OperatingPoint& op);
double signal_power_above_threshold_incoupled(const SystemParams& system,
                                              double incoupled_power_w);

/// Intracavity pump photon number with clamping at the threshold value.
double intracavity_pump_clamped(const SystemParams& system, const OperatingPoint& op);

/// (var_sq * var_asq)^(-1/2). Throws std::invalid_argument on non-positive input.
double purity(const QuadratureVariances& v);

enum class DbDirection { to_db, from_db };

double db_convert(double value, DbDirection direction);
double to_db(double linear);
double from_db(double db);

/// Beam-splitter mixing with vacuum at power transmission T: 1 + T (v - 1).
double attenuate_variance(double variance, double transmission);

}  // namespace opo
