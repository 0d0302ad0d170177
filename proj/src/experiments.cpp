#include "bhd/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "bhd/errors.hpp"

namespace bhd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDbPerLog = 10.0 / std::numbers::ln10;  // d(dB)/d(ln ratio)

// Run fn(i) for i in [0, n) on a bounded pool. Rows write to disjoint slots,
// so results land in row order regardless of completion order. fn must not
// throw (row-level errors are captured inside the row).
template <typename Fn>
void for_each_row(std::size_t n, Fn&& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t n_threads = std::min<std::size_t>(n, hw == 0 ? 1 : hw);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

void check_phases(std::span<const double> phases) {
  if (phases.empty()) {
    throw std::invalid_argument("phase scan requires at least one phase");
  }
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (!(phases[i] >= 0.0) || !(phases[i] < kTwoPi)) {
      throw std::invalid_argument("phases must lie in [0, 2*pi)");
    }
    if (i > 0 && !(phases[i] > phases[i - 1])) {
      throw std::invalid_argument("phases must be strictly increasing");
    }
  }
}

void check_transmissions(std::span<const double> transmissions) {
  if (transmissions.empty()) {
    throw std::invalid_argument("attenuation sweep requires at least one transmission");
  }
  for (std::size_t i = 0; i < transmissions.size(); ++i) {
    if (!(transmissions[i] > 0.0) || !(transmissions[i] <= 1.0)) {
      throw std::invalid_argument("transmissions must lie in (0, 1]");
    }
    if (i > 0 && !(transmissions[i] > transmissions[i - 1])) {
      throw std::invalid_argument("transmissions must be strictly increasing");
    }
  }
}

}  // namespace

std::vector<double> phase_grid(std::size_t count) {
  if (count == 0) throw std::invalid_argument("phase grid needs count >= 1");
  std::vector<double> phases(count);
  for (std::size_t i = 0; i < count; ++i) {
    phases[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(count);
  }
  return phases;
}

std::vector<double> transmission_grid(std::size_t count, double min, double max) {
  if (count < 2) throw std::invalid_argument("transmission grid needs count >= 2");
  if (!(min > 0.0) || !(max <= 1.0) || !(min < max)) {
    throw std::invalid_argument("transmission grid needs 0 < min < max <= 1");
  }
  std::vector<double> ts(count);
  const double lmin = std::log(min);
  const double lmax = std::log(max);
  for (std::size_t i = 0; i < count; ++i) {
    ts[i] = std::exp(lmin + (lmax - lmin) * static_cast<double>(i) /
                                static_cast<double>(count - 1));
  }
  ts.front() = min;
  ts.back() = max;  // avoid log/exp rounding at the endpoints
  return ts;
}

PhaseScanResult run_phase_scan(const SimulationConfig& base, std::span<const double> phases) {
  base.validate();
  check_phases(phases);

  const GaussianState state_att = apply_loss(base.state, base.setting.transmission);
  const LocalOscillator lo_att = lo_after_loss(base.lo, base.setting.transmission);
  const double en_term = base.noise.rho * base.noise.sigma1 * base.noise.sigma2;

  PhaseScanResult result;
  result.rows.resize(phases.size());
  for_each_row(phases.size(), [&](std::size_t i) {
    PhaseScanRow& row = result.rows[i];
    row.phase = phases[i];
    try {
      SimulationConfig cfg = base;
      cfg.setting = MeasurementSetting(phases[i], base.setting.transmission);
      cfg.seed = derive_seed(base.seed, static_cast<std::uint64_t>(ExperimentStream::PhaseScan), i);
      const TracePair trace = sample_trace_pair(cfg);
      row.cov_mc = covariance(trace);
      row.cov_analytic = predicted_covariance(state_att, lo_att, cfg.setting);
      row.abs_dev = std::abs(row.cov_mc.value - row.cov_analytic);
      row.within_4se =
          std::abs(row.cov_mc.value - (row.cov_analytic + en_term)) <= 4.0 * row.cov_mc.std_error;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });
  return result;
}

AttenuationSweepResult run_attenuation_sweep(const SimulationConfig& base,
                                             std::span<const double> transmissions,
                                             SnlMode snl_mode) {
  base.validate();
  check_transmissions(transmissions);

  AttenuationSweepResult result;
  if (snl_mode == SnlMode::Calibrated) {
    result.calibration = run_snl_ladder(base, kDefaultLadderMultipliers);
  }

  const double nominal_power = base.lo.amplitude * base.lo.amplitude;
  const double en_term = base.noise.rho * base.noise.sigma1 * base.noise.sigma2;
  const double v_lo_norm_factor = 1.0 / kVacuumVariance;

  result.rows.resize(transmissions.size());
  for_each_row(transmissions.size(), [&](std::size_t i) {
    AttenuationSweepRow& row = result.rows[i];
    const double t = transmissions[i];
    row.transmission = t;
    try {
      SimulationConfig cfg = base;
      cfg.setting = MeasurementSetting(base.setting.phase, t);
      cfg.seed = derive_seed(base.seed,
                             static_cast<std::uint64_t>(ExperimentStream::AttenuationSweep), i);
      const TracePair trace = sample_trace_pair(cfg);

      const GaussianState s_att = apply_loss(base.state, t);
      const LocalOscillator l_att = lo_after_loss(base.lo, t);
      const double power = t * nominal_power;
      const double snl = result.calibration ? result.calibration->snl_at(power) : power;
      row.snl = snl;

      // Subtraction method.
      row.diff_var = difference_variance(trace);
      row.sq_subtraction_db = squeezing_db(row.diff_var.value, snl);
      row.sq_subtraction_se_db = kDbPerLog * row.diff_var.std_error / row.diff_var.value;
      const double diff_model =
          predicted_difference_variance(s_att, l_att, cfg.setting, base.noise) - 2.0 * en_term;
      row.sq_subtraction_model_db = squeezing_db(diff_model, snl);
      row.sub_within_4se = std::abs(row.sq_subtraction_db - row.sq_subtraction_model_db) <=
                           4.0 * row.sq_subtraction_se_db;

      // Covariance method, on the normalized-variance scale first so the
      // 4*SE check survives out-of-range dB values.
      row.cov = covariance(trace);
      const double lo_factor = l_att.vx * v_lo_norm_factor;
      const double v_norm_est = lo_factor * (1.0 - 4.0 * row.cov.value / snl);
      const double v_norm_se = lo_factor * 4.0 * row.cov.std_error / snl;
      const double cov_model = predicted_covariance(s_att, l_att, cfg.setting) + en_term;
      const double v_norm_model = lo_factor * (1.0 - 4.0 * cov_model / snl);
      row.cov_within_4se = std::abs(v_norm_est - v_norm_model) <= 4.0 * v_norm_se;
      if (v_norm_est > 0.0) {
        row.sq_covariance_db = 10.0 * std::log10(v_norm_est);
        row.sq_covariance_se_db = kDbPerLog * v_norm_se / v_norm_est;
      } else {
        row.cov_out_of_range = true;
      }

      row.sq_ideal_db =
          ideal_squeezing_curve(rotated_variance(base.state, base.setting.phase), t);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });

  // Locate the 0 dB crossing of the subtraction curve (squeezing at high
  // transmission turning into apparent excess noise under attenuation).
  for (std::size_t i = 0; i + 1 < result.rows.size(); ++i) {
    const AttenuationSweepRow& a = result.rows[i];
    const AttenuationSweepRow& b = result.rows[i + 1];
    if (a.failed || b.failed) continue;
    const double ya = a.sq_subtraction_db;
    const double yb = b.sq_subtraction_db;
    if (ya == 0.0) {
      result.subtraction_zero_crossing = a.transmission;
      break;
    }
    if ((ya > 0.0) != (yb > 0.0)) {
      const double frac = ya / (ya - yb);
      result.subtraction_zero_crossing =
          a.transmission + frac * (b.transmission - a.transmission);
      break;
    }
  }
  return result;
}

EnRobustnessResult run_en_robustness(const SimulationConfig& base,
                                     std::span<const double> en_scales, double rho) {
  base.validate();
  if (en_scales.empty()) {
    throw std::invalid_argument("en-robustness sweep requires at least one scale");
  }
  for (const double s : en_scales) {
    if (!(s >= 0.0)) throw std::invalid_argument("en_scales must be nonnegative");
  }
  if (!(std::abs(rho) <= 1.0)) {
    throw std::invalid_argument("rho must be in [-1, 1]");
  }

  const GaussianState s_att = apply_loss(base.state, base.setting.transmission);
  const LocalOscillator l_att = lo_after_loss(base.lo, base.setting.transmission);
  const double cov_analytic = predicted_covariance(s_att, l_att, base.setting);

  EnRobustnessResult result;
  result.rows.resize(en_scales.size());
  for_each_row(en_scales.size(), [&](std::size_t i) {
    EnRobustnessRow& row = result.rows[i];
    row.en_scale = en_scales[i];
    try {
      SimulationConfig cfg = base;
      cfg.noise = DetectorNoiseModel(base.noise.sigma1 * en_scales[i],
                                     base.noise.sigma2 * en_scales[i], rho);
      cfg.seed = derive_seed(base.seed,
                             static_cast<std::uint64_t>(ExperimentStream::EnRobustness), i);
      row.sigma1 = cfg.noise.sigma1;
      row.sigma2 = cfg.noise.sigma2;
      const TracePair trace = sample_trace_pair(cfg);

      const double en_term = rho * cfg.noise.sigma1 * cfg.noise.sigma2;
      row.cov = covariance(trace);
      row.expected_bias = en_term;
      row.cov_model = cov_analytic + en_term;
      row.cov_bias = row.cov.value - cov_analytic;
      row.cov_within_4se = std::abs(row.cov.value - row.cov_model) <= 4.0 * row.cov.std_error;

      row.diff_var = difference_variance(trace);
      row.diff_model =
          predicted_difference_variance(s_att, l_att, cfg.setting, cfg.noise) - 2.0 * en_term;
      row.diff_within_4se =
          std::abs(row.diff_var.value - row.diff_model) <= 4.0 * row.diff_var.std_error;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });
  return result;
}

SnlCalibration run_snl_ladder(const SimulationConfig& base,
                              std::span<const double> power_multipliers) {
  base.validate();
  const double nominal_power = base.lo.amplitude * base.lo.amplitude;
  if (!(nominal_power > 0.0)) {
    throw CalibrationError("calibration ladder requires a nonzero LO amplitude");
  }

  std::vector<std::pair<double, double>> points(power_multipliers.size());
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;
  for_each_row(power_multipliers.size(), [&](std::size_t i) {
    try {
      const double m = power_multipliers[i];
      if (!(m > 0.0)) throw CalibrationError("ladder power multipliers must be positive");
      SimulationConfig cfg = base;
      cfg.state = GaussianState::vacuum();
      cfg.lo = LocalOscillator(base.lo.amplitude * std::sqrt(m), base.lo.vx);
      cfg.setting = MeasurementSetting(base.setting.phase, 1.0);
      cfg.seed = derive_seed(base.seed, static_cast<std::uint64_t>(ExperimentStream::SnlLadder), i);
      const TracePair trace = sample_trace_pair(cfg);
      points[i] = {m * nominal_power, difference_variance(trace).value};
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!failed.exchange(true)) first_error = e.what();
    }
  });
  if (failed.load()) {
    throw CalibrationError("calibration ladder failed: " + first_error);
  }
  return calibrate_snl(points);
}

}  // namespace bhd
