#include "bhd/estimators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bhd/errors.hpp"

namespace bhd {

namespace {

void check_trace(const TracePair& traces) {
  if (traces.ch1.size() != traces.ch2.size()) {
    throw std::invalid_argument("trace channels must have equal length (got " +
                                std::to_string(traces.ch1.size()) + " and " +
                                std::to_string(traces.ch2.size()) + ")");
  }
  if (traces.ch1.size() < 2) {
    throw InsufficientDataError("estimator requires at least 2 samples (got " +
                                std::to_string(traces.ch1.size()) + ")");
  }
}

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double covariance_std_error(double v1, double v2, double c, std::int64_t n) {
  return std::sqrt((v1 * v2 + c * c) / static_cast<double>(n - 1));
}

}  // namespace

void BivariateMoments::add(double x, double y) {
  if (n_ == 0) {
    // Shift by the first sample so large common baselines drop out before the
    // running means see them; second moments are shift-invariant.
    shift_x_ = x;
    shift_y_ = y;
  }
  x -= shift_x_;
  y -= shift_y_;
  n_ += 1;
  const double inv_n = 1.0 / static_cast<double>(n_);
  const double dx = x - mean_x_;
  const double dy = y - mean_y_;
  mean_x_ += dx * inv_n;
  mean_y_ += dy * inv_n;
  m2x_ += dx * (x - mean_x_);
  m2y_ += dy * (y - mean_y_);
  cxy_ += dx * (y - mean_y_);
}

void BivariateMoments::merge(const BivariateMoments& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double nab = na + nb;
  // other's means expressed relative to this accumulator's shift
  const double om_x = (other.shift_x_ - shift_x_) + other.mean_x_;
  const double om_y = (other.shift_y_ - shift_y_) + other.mean_y_;
  const double dx = om_x - mean_x_;
  const double dy = om_y - mean_y_;
  m2x_ += other.m2x_ + dx * dx * na * nb / nab;
  m2y_ += other.m2y_ + dy * dy * na * nb / nab;
  cxy_ += other.cxy_ + dx * dy * na * nb / nab;
  mean_x_ += dx * nb / nab;
  mean_y_ += dy * nb / nab;
  n_ += other.n_;
}

double BivariateMoments::variance_x() const {
  if (n_ < 2) throw InsufficientDataError("variance requires at least 2 samples");
  return m2x_ / static_cast<double>(n_ - 1);
}

double BivariateMoments::variance_y() const {
  if (n_ < 2) throw InsufficientDataError("variance requires at least 2 samples");
  return m2y_ / static_cast<double>(n_ - 1);
}

double BivariateMoments::covariance() const {
  if (n_ < 2) throw InsufficientDataError("covariance requires at least 2 samples");
  return cxy_ / static_cast<double>(n_ - 1);
}

EstimateWithError difference_variance(const TracePair& traces) {
  check_trace(traces);
  const std::size_t n = traces.ch1.size();
  // Welford on the per-sample difference, shifted by its first value so a
  // large baseline in the difference cannot degrade the running mean.
  const double shift = traces.ch1[0] - traces.ch2[0];
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = (traces.ch1[k] - traces.ch2[k]) - shift;
    count += 1;
    const double delta = d - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (d - mean);
  }
  const double value = m2 / static_cast<double>(count - 1);
  const double se = value * std::sqrt(2.0 / static_cast<double>(count - 1));
  return {value, se, count};
}

EstimateWithError covariance(const TracePair& traces) {
  check_trace(traces);
  BivariateMoments acc;
  for (std::size_t k = 0; k < traces.ch1.size(); ++k) {
    acc.add(traces.ch1[k], traces.ch2[k]);
  }
  const double c = acc.covariance();
  const double se = covariance_std_error(acc.variance_x(), acc.variance_y(), c, acc.count());
  return {c, se, acc.count()};
}

EstimateWithError covariance_two_pass(const TracePair& traces) {
  check_trace(traces);
  const std::size_t n = traces.ch1.size();
  CompensatedSum sx;
  CompensatedSum sy;
  for (std::size_t k = 0; k < n; ++k) {
    sx.add(traces.ch1[k]);
    sy.add(traces.ch2[k]);
  }
  const double mx = sx.value() / static_cast<double>(n);
  const double my = sy.value() / static_cast<double>(n);
  CompensatedSum sc;
  CompensatedSum svx;
  CompensatedSum svy;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = traces.ch1[k] - mx;
    const double dy = traces.ch2[k] - my;
    sc.add(dx * dy);
    svx.add(dx * dx);
    svy.add(dy * dy);
  }
  const auto count = static_cast<std::int64_t>(n);
  const double c = sc.value() / static_cast<double>(count - 1);
  const double v1 = svx.value() / static_cast<double>(count - 1);
  const double v2 = svy.value() / static_cast<double>(count - 1);
  return {c, covariance_std_error(v1, v2, c, count), count};
}

SnlCalibration calibrate_snl(std::span<const std::pair<double, double>> ladder) {
  if (ladder.size() < 3) {
    throw CalibrationError("calibration requires at least 3 ladder points (got " +
                           std::to_string(ladder.size()) + ")");
  }
  for (const auto& [power, variance] : ladder) {
    if (!(power > 0.0) || !std::isfinite(power)) {
      throw CalibrationError("calibration ladder powers must be positive");
    }
    if (!(variance > 0.0) || !std::isfinite(variance)) {
      throw CalibrationError("calibration ladder variances must be positive");
    }
  }

  const double n = static_cast<double>(ladder.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : ladder) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : ladder) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx <= 0.0) {
    throw CalibrationError("calibration ladder needs at least two distinct powers");
  }

  SnlCalibration cal;
  cal.slope = sxy / sxx;
  cal.intercept = my - cal.slope * mx;
  cal.fit_points.assign(ladder.begin(), ladder.end());
  if (!(cal.slope > 0.0)) {
    throw CalibrationError("calibration fit produced a nonpositive slope (" +
                           std::to_string(cal.slope) + ")");
  }

  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& [x, y] : ladder) {
    const double r = y - (cal.slope * x + cal.intercept);
    ss_res += r * r;
    ss_tot += (y - my) * (y - my);
  }
  cal.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  if (cal.r_squared < 0.0) cal.r_squared = 0.0;
  if (cal.r_squared > 1.0) cal.r_squared = 1.0;
  return cal;
}

double squeezing_from_subtraction(const TracePair& traces, double snl) {
  if (!(snl > 0.0)) {
    throw std::domain_error("squeezing_from_subtraction: snl must be positive");
  }
  return squeezing_db(difference_variance(traces).value, snl);
}

double squeezing_from_covariance(const TracePair& traces, double snl, double lo_variance) {
  if (!(snl > 0.0)) {
    throw std::domain_error("squeezing_from_covariance: snl must be positive");
  }
  if (!(lo_variance > 0.0)) {
    throw std::domain_error("squeezing_from_covariance: lo_variance must be positive");
  }
  const double cov = covariance(traces).value;
  const double v_norm = (lo_variance / kVacuumVariance) * (1.0 - 4.0 * cov / snl);
  if (!(v_norm > 0.0)) {
    throw CovarianceOutOfRange(
        cov, "covariance estimate " + std::to_string(cov) +
                 " implies a nonpositive quadrature variance at snl " + std::to_string(snl));
  }
  return 10.0 * std::log10(v_norm);
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Squeezed:
      return "Squeezed";
    case Verdict::CoherentConsistent:
      return "CoherentConsistent";
    case Verdict::ExcessNoise:
      return "ExcessNoise";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

StateVerdict classify_state(const EstimateWithError& cov_est, double z_threshold) {
  if (!(z_threshold > 0.0)) {
    throw std::domain_error("classify_state: z_threshold must be positive");
  }
  if (cov_est.n < 2) {
    return {Verdict::Inconclusive, 0.0};
  }
  double z;
  if (cov_est.std_error == 0.0) {
    if (cov_est.value == 0.0) return {Verdict::CoherentConsistent, 0.0};
    z = cov_est.value > 0.0 ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
  } else {
    z = cov_est.value / cov_est.std_error;
  }
  if (z > z_threshold) return {Verdict::Squeezed, z};
  if (z < -z_threshold) return {Verdict::ExcessNoise, z};
  return {Verdict::CoherentConsistent, z};
}

}  // namespace bhd
