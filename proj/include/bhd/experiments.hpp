#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bhd/estimators.hpp"
#include "bhd/trace_gen.hpp"

namespace bhd {

/// Stream identifiers for per-row seed derivation; part of the stable
/// seed-to-trace mapping.
enum class ExperimentStream : std::uint64_t {
  PhaseScan = 1,
  AttenuationSweep = 2,
  EnRobustness = 3,
  SnlLadder = 4,
};

enum class SnlMode { Analytic, Calibrated };

/// One phase-scan row: Monte Carlo covariance next to the closed-form value.
/// within_4se compares the estimate against the full model expectation
/// (analytic covariance plus the rho*sigma1*sigma2 electronic-noise term).
struct PhaseScanRow {
  double phase = 0.0;
  EstimateWithError cov_mc;
  double cov_analytic = 0.0;
  double abs_dev = 0.0;
  bool within_4se = false;
  bool failed = false;
  std::string error;
};

struct PhaseScanResult {
  std::vector<PhaseScanRow> rows;
};

/// One attenuation-sweep row: squeezing in dB by both methods against the
/// electronic-noise-free shot-noise level, plus the ideal detector curve.
/// When the inferred variance from the covariance method is nonpositive the
/// dB value is unavailable (cov_out_of_range) and the 4*SE check is done on
/// the normalized-variance scale instead.
struct AttenuationSweepRow {
  double transmission = 0.0;
  double snl = 0.0;
  EstimateWithError diff_var;
  EstimateWithError cov;
  double sq_subtraction_db = 0.0;
  double sq_subtraction_se_db = 0.0;
  double sq_subtraction_model_db = 0.0;
  bool cov_out_of_range = false;
  double sq_covariance_db = 0.0;
  double sq_covariance_se_db = 0.0;
  double sq_ideal_db = 0.0;
  bool sub_within_4se = false;
  bool cov_within_4se = false;
  bool failed = false;
  std::string error;
};

struct AttenuationSweepResult {
  std::vector<AttenuationSweepRow> rows;
  std::optional<SnlCalibration> calibration;      ///< set in Calibrated mode
  std::optional<double> subtraction_zero_crossing;  ///< t where the subtraction
                                                    ///< curve crosses 0 dB
};

/// One electronic-noise-robustness row at a fixed optical configuration.
struct EnRobustnessRow {
  double en_scale = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  EstimateWithError cov;
  double cov_model = 0.0;      ///< analytic covariance + rho*sigma1*sigma2
  double cov_bias = 0.0;       ///< measured covariance - analytic covariance
  double expected_bias = 0.0;  ///< rho*sigma1*sigma2
  bool cov_within_4se = false;
  EstimateWithError diff_var;
  double diff_model = 0.0;  ///< 4 a^2 V_phi + s1^2 + s2^2 - 2 rho s1 s2
  bool diff_within_4se = false;
  bool failed = false;
  std::string error;
};

struct EnRobustnessResult {
  std::vector<EnRobustnessRow> rows;
};

/// Ladder powers used for Calibrated mode, as multiples of the nominal
/// (pre-attenuation) LO power.
inline constexpr double kDefaultLadderMultipliers[] = {0.25, 0.5, 1.0, 2.0, 4.0};

/// Evenly spaced phase grid over [0, 2*pi), count >= 1.
std::vector<double> phase_grid(std::size_t count);

/// Log-spaced transmission grid over [min, max], strictly increasing.
std::vector<double> transmission_grid(std::size_t count, double min, double max);

/// Scan the LO phase at fixed optical power. Each row generates a fresh trace
/// with a seed derived from (base.seed, PhaseScan, row index), estimates the
/// covariance and compares it against the closed-form value. Row-level
/// failures are captured in the row, not thrown.
PhaseScanResult run_phase_scan(const SimulationConfig& base, std::span<const double> phases);

/// Sweep the NDF transmission at fixed LO phase, reporting squeezing by the
/// subtraction and covariance methods against the EN-free shot-noise level
/// (analytic, or extrapolated from a Monte Carlo calibration ladder).
AttenuationSweepResult run_attenuation_sweep(const SimulationConfig& base,
                                             std::span<const double> transmissions,
                                             SnlMode snl_mode);

/// Scale the electronic-noise sigmas at a fixed optical configuration and
/// report how each estimator responds. rho overrides base.noise.rho.
EnRobustnessResult run_en_robustness(const SimulationConfig& base,
                                     std::span<const double> en_scales, double rho);

/// Generate a vacuum-signal calibration ladder at the given multiples of the
/// nominal LO power and fit the shot-noise line.
SnlCalibration run_snl_ladder(const SimulationConfig& base,
                              std::span<const double> power_multipliers);

}  // namespace bhd
