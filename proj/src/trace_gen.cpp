#include "bhd/trace_gen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bhd {

namespace {

// 53-bit uniforms from one engine output each.
inline double uniform_open_closed(std::mt19937_64& eng) {
  return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
}

inline double uniform_half_open(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;  // [0, 1)
}

}  // namespace

double NormalSampler::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform_open_closed(engine_);
  const double u2 = uniform_half_open(engine_);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ index);
  return h;
}

void SimulationConfig::validate() const {
  if (n_samples < 2) {
    throw std::domain_error("SimulationConfig: n_samples must be >= 2 (got " +
                            std::to_string(n_samples) + ")");
  }
}

std::pair<double, double> correlated_noise_pair(double sigma1, double sigma2,
                                                double rho, NormalSampler& rng) {
  const double z1 = rng.next();
  const double z2 = rng.next();
  const double e1 = sigma1 * z1;
  const double e2 = sigma2 * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2);
  return {e1, e2};
}

TracePair sample_trace_pair(const SimulationConfig& config) {
  config.validate();

  const GaussianState state = apply_loss(config.state, config.setting.transmission);
  const LocalOscillator lo = lo_after_loss(config.lo, config.setting.transmission);

  const double a = lo.amplitude;
  const double sd_lo = std::sqrt(lo.vx);
  const double sd_phi = std::sqrt(rotated_variance(state, config.setting.phase));
  const double dc = config.ac_coupled ? 0.0 : 0.5 * a * a;
  const DetectorNoiseModel& noise = config.noise;

  TracePair trace;
  const auto n = static_cast<std::size_t>(config.n_samples);
  trace.ch1.resize(n);
  trace.ch2.resize(n);
  trace.metadata.config = config;
  trace.metadata.lo_power = a * a;
  trace.metadata.source = "simulate";

  NormalSampler rng(config.seed);
  for (std::size_t k = 0; k < n; ++k) {
    const double x_lo = sd_lo * rng.next();
    const double x_phi = sd_phi * rng.next();
    const auto [e1, e2] = correlated_noise_pair(noise.sigma1, noise.sigma2, noise.rho, rng);
    trace.ch1[k] = dc + a * (x_lo + x_phi) + e1;
    trace.ch2[k] = dc + a * (x_lo - x_phi) + e2;
  }
  return trace;
}

}  // namespace bhd
