#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bhd/trace_gen.hpp"

namespace bhd {

/// Point estimate plus standard error and sample count; the universal output
/// of all estimators. Standard errors assume jointly Gaussian samples (exact
/// for simulated traces, approximate for ingested recordings).
struct EstimateWithError {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n = 0;
};

/// Single-pass bivariate moment accumulator (Welford-style co-moment update).
/// merge() combines two accumulators so that chunked parallel reduction gives
/// the same moments as sequential processing to ~1e-12 relative.
class BivariateMoments {
 public:
  void add(double x, double y);
  void merge(const BivariateMoments& other);

  std::int64_t count() const { return n_; }
  double mean_x() const { return shift_x_ + mean_x_; }
  double mean_y() const { return shift_y_ + mean_y_; }
  double variance_x() const;  ///< unbiased (n-1); requires n >= 2
  double variance_y() const;
  double covariance() const;  ///< unbiased (n-1); requires n >= 2

 private:
  std::int64_t n_ = 0;
  double shift_x_ = 0.0;  // first sample, subtracted from all inputs
  double shift_y_ = 0.0;
  double mean_x_ = 0.0;   // running mean relative to the shift
  double mean_y_ = 0.0;
  double m2x_ = 0.0;
  double m2y_ = 0.0;
  double cxy_ = 0.0;
};

/// Unbiased sample variance of the per-sample difference ch1 - ch2
/// (the subtraction method). std_error = value * sqrt(2/(n-1)).
EstimateWithError difference_variance(const TracePair& traces);

/// Unbiased sample covariance of the two channels via a single-pass stable
/// co-moment update. std_error = sqrt((v1*v2 + c^2)/(n-1)).
EstimateWithError covariance(const TracePair& traces);

/// Reference covariance: explicit mean subtraction, then compensated product
/// accumulation. Used to cross-validate the one-pass path.
EstimateWithError covariance_two_pass(const TracePair& traces);

/// Shot-noise calibration: ordinary least squares of variance against LO
/// power. The shot-noise level at power P is slope*P; the intercept is the
/// electronic-noise floor and is deliberately excluded (extrapolation step).
struct SnlCalibration {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> fit_points;

  double snl_at(double power) const { return slope * power; }
};

/// Fit a calibration line to >= 3 (power, variance) ladder points.
/// Throws CalibrationError for fewer points, nonpositive powers or variances,
/// all-equal powers, or a nonpositive fitted slope.
SnlCalibration calibrate_snl(std::span<const std::pair<double, double>> ladder);

/// Squeezing in dB from the subtraction method: difference variance against
/// the (electronic-noise-free) shot-noise level.
double squeezing_from_subtraction(const TracePair& traces, double snl);

/// Squeezing in dB from the covariance method. Inverts the covariance
/// relation: normalized variance = (lo_variance/0.25) * (1 - 4*cov/snl),
/// which reduces to 1 - 4*cov/snl for a shot-noise-limited LO. Throws
/// CovarianceOutOfRange when the inferred variance is nonpositive.
double squeezing_from_covariance(const TracePair& traces, double snl,
                                 double lo_variance = kVacuumVariance);

enum class Verdict { Squeezed, CoherentConsistent, ExcessNoise, Inconclusive };

const char* to_string(Verdict v);

struct StateVerdict {
  Verdict verdict = Verdict::Inconclusive;
  double z_score = 0.0;
};

/// Sign-based classification of the input state from a covariance estimate,
/// assuming a shot-noise-limited LO: z = value/std_error, with z > threshold
/// squeezed, z < -threshold excess noise, and |z| <= threshold consistent
/// with a coherent state.
StateVerdict classify_state(const EstimateWithError& cov_est, double z_threshold = 3.0);

}  // namespace bhd
