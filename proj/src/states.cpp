#include "bhd/states.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bhd {

namespace {

constexpr double kHeisenbergBound = kVacuumVariance * kVacuumVariance;  // 1/16

[[noreturn]] void fail_domain(const std::string& msg) {
  throw std::domain_error(msg);
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

GaussianState::GaussianState(double vx_, double vy_, double cxy_)
    : vx(vx_), vy(vy_), cxy(cxy_) {
  if (!(vx > 0.0) || !(vy > 0.0)) {
    fail_domain("GaussianState: vx and vy must be positive (got vx=" + num(vx) +
                ", vy=" + num(vy) + ")");
  }
  if (!std::isfinite(vx) || !std::isfinite(vy) || !std::isfinite(cxy)) {
    fail_domain("GaussianState: moments must be finite");
  }
  // Relative slack absorbs rounding for states sitting exactly on the bound.
  if (det() < kHeisenbergBound * (1.0 - 1e-9)) {
    fail_domain("GaussianState: vx*vy - cxy^2 = " + num(det()) +
                " violates the Heisenberg bound 1/16");
  }
}

LocalOscillator::LocalOscillator(double amplitude_, double vx_)
    : amplitude(amplitude_), vx(vx_) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    fail_domain("LocalOscillator: amplitude must be nonnegative (got " +
                num(amplitude) + ")");
  }
  if (!(vx > 0.0) || !std::isfinite(vx)) {
    fail_domain("LocalOscillator: vx must be positive (got " + num(vx) + ")");
  }
}

MeasurementSetting::MeasurementSetting(double phase_, double transmission_)
    : phase(phase_), transmission(transmission_) {
  if (!std::isfinite(phase)) fail_domain("MeasurementSetting: phase must be finite");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  phase = std::fmod(phase, two_pi);
  if (phase < 0.0) phase += two_pi;
  if (phase >= two_pi) phase = 0.0;
  if (!(transmission > 0.0) || !(transmission <= 1.0)) {
    fail_domain("MeasurementSetting: transmission must be in (0, 1] (got " +
                num(transmission) + ")");
  }
}

DetectorNoiseModel::DetectorNoiseModel(double sigma1_, double sigma2_, double rho_)
    : sigma1(sigma1_), sigma2(sigma2_), rho(rho_) {
  if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0) || !std::isfinite(sigma1) ||
      !std::isfinite(sigma2)) {
    fail_domain("DetectorNoiseModel: sigma1 and sigma2 must be nonnegative");
  }
  if (!(std::abs(rho) <= 1.0)) {
    fail_domain("DetectorNoiseModel: rho must be in [-1, 1] (got " + num(rho) + ")");
  }
}

double rotated_variance(const GaussianState& state, double phase) {
  const double c = std::cos(phase);
  const double s = std::sin(phase);
  return c * c * state.vx + s * s * state.vy + 2.0 * s * c * state.cxy;
}

GaussianState apply_loss(const GaussianState& state, double transmission) {
  if (!(transmission >= 0.0) || !(transmission <= 1.0)) {
    fail_domain("apply_loss: transmission must be in [0, 1] (got " +
                num(transmission) + ")");
  }
  const double t = transmission;
  const double v0 = (1.0 - t) * kVacuumVariance;
  return GaussianState(t * state.vx + v0, t * state.vy + v0, t * state.cxy);
}

LocalOscillator lo_after_loss(const LocalOscillator& lo, double transmission) {
  if (!(transmission >= 0.0) || !(transmission <= 1.0)) {
    fail_domain("lo_after_loss: transmission must be in [0, 1] (got " +
                num(transmission) + ")");
  }
  const double t = transmission;
  return LocalOscillator(std::sqrt(t) * lo.amplitude,
                         t * lo.vx + (1.0 - t) * kVacuumVariance);
}

double predicted_difference_variance(const GaussianState& state,
                                     const LocalOscillator& lo,
                                     const MeasurementSetting& setting,
                                     const DetectorNoiseModel& noise) {
  const double v_phi = rotated_variance(state, setting.phase);
  const double a2 = lo.amplitude * lo.amplitude;
  return 4.0 * a2 * v_phi + noise.sigma1 * noise.sigma1 + noise.sigma2 * noise.sigma2;
}

double predicted_covariance(const GaussianState& state, const LocalOscillator& lo,
                            const MeasurementSetting& setting) {
  const double v_phi = rotated_variance(state, setting.phase);
  const double a2 = lo.amplitude * lo.amplitude;
  return a2 * (lo.vx - v_phi);
}

double squeezing_db(double v, double v_ref) {
  if (!(v > 0.0)) fail_domain("squeezing_db: variance must be positive (got " + num(v) + ")");
  if (!(v_ref > 0.0)) {
    fail_domain("squeezing_db: reference variance must be positive (got " + num(v_ref) + ")");
  }
  return 10.0 * std::log10(v / v_ref);
}

double ideal_squeezing_curve(double v_signal, double transmission) {
  if (!(v_signal > 0.0)) {
    fail_domain("ideal_squeezing_curve: v_signal must be positive (got " +
                num(v_signal) + ")");
  }
  if (!(transmission > 0.0) || !(transmission <= 1.0)) {
    fail_domain("ideal_squeezing_curve: transmission must be in (0, 1] (got " +
                num(transmission) + ")");
  }
  const double t = transmission;
  return 10.0 * std::log10(t * (v_signal / kVacuumVariance) + (1.0 - t));
}

}  // namespace bhd
