#pragma once

namespace bhd {

// Quadrature convention: X = (a^dag + a)/2, Y = i(a^dag - a)/2, so the vacuum
// quadrature variance is 1/4. All quantities are dimensionless; the squared LO
// amplitude plays the role of a mean photon number per sample slot.
inline constexpr double kVacuumVariance = 0.25;

/// Second moments of a single-mode Gaussian signal beam.
///
/// Physicality requires vx*vy - cxy^2 >= 1/16 (Heisenberg bound); the
/// constructor enforces it with a small relative slack for rounding.
struct GaussianState {
  double vx;   ///< variance of the amplitude quadrature X
  double vy;   ///< variance of the phase quadrature Y
  double cxy;  ///< symmetrized X-Y cross-moment

  GaussianState() : GaussianState(kVacuumVariance, kVacuumVariance, 0.0) {}
  GaussianState(double vx, double vy, double cxy = 0.0);

  static GaussianState vacuum() { return GaussianState(); }

  /// Determinant of the 2x2 covariance matrix [[vx, cxy], [cxy, vy]].
  double det() const { return vx * vy - cxy * cxy; }
};

/// Local oscillator: mean field amplitude plus amplitude-quadrature variance.
struct LocalOscillator {
  double amplitude;  ///< mean field amplitude per sample slot, >= 0
  double vx;         ///< amplitude-quadrature variance, > 0

  LocalOscillator() : LocalOscillator(1.0) {}
  explicit LocalOscillator(double amplitude, double vx = kVacuumVariance);

  bool shot_noise_limited() const { return vx == kVacuumVariance; }
};

/// LO phase and neutral-density-filter transmission for one measurement.
struct MeasurementSetting {
  double phase;         ///< LO phase, wrapped into [0, 2*pi)
  double transmission;  ///< t = 1 - eta, in (0, 1]

  MeasurementSetting() : MeasurementSetting(0.0, 1.0) {}
  MeasurementSetting(double phase, double transmission);
};

/// Per-detector electronic-noise standard deviations and their correlation.
/// rho = 0 models statistically independent detector electronics.
struct DetectorNoiseModel {
  double sigma1;
  double sigma2;
  double rho;

  DetectorNoiseModel() : DetectorNoiseModel(0.0, 0.0, 0.0) {}
  DetectorNoiseModel(double sigma1, double sigma2, double rho = 0.0);
};

/// Variance of the tilted quadrature X_phi = cos(phi) X + sin(phi) Y:
/// cos^2 vx + sin^2 vy + 2 sin cos cxy.
double rotated_variance(const GaussianState& state, double phase);

/// Beam-splitter loss model: admix vacuum with weight (1 - transmission).
/// Each variance maps to t*v + (1-t)/4, the cross-moment to t*cxy.
GaussianState apply_loss(const GaussianState& state, double transmission);

/// Attenuate the LO: amplitude scales by sqrt(t), variance as apply_loss.
LocalOscillator lo_after_loss(const LocalOscillator& lo, double transmission);

/// Closed-form variance of the difference photocurrent i1 - i2 for a
/// post-attenuation state and LO: 4 a^2 V_phi + sigma1^2 + sigma2^2.
/// Assumes uncorrelated detector noise; transmission in `setting` is ignored
/// (inputs are already attenuated).
double predicted_difference_variance(const GaussianState& state,
                                     const LocalOscillator& lo,
                                     const MeasurementSetting& setting,
                                     const DetectorNoiseModel& noise);

/// Closed-form covariance of the two photocurrents for a post-attenuation
/// state and LO: a^2 (V_LO - V_phi). Independent of the detector noise model
/// by construction. Positive iff V_phi < V_LO.
double predicted_covariance(const GaussianState& state,
                            const LocalOscillator& lo,
                            const MeasurementSetting& setting);

/// 10*log10(v / v_ref). Negative values indicate squeezing below v_ref.
double squeezing_db(double v, double v_ref);

/// Squeezing in dB an ideal noise-free detector would report for a signal of
/// variance v_signal after transmission t: 10*log10(t*v_signal/0.25 + 1 - t).
double ideal_squeezing_curve(double v_signal, double transmission);

}  // namespace bhd
