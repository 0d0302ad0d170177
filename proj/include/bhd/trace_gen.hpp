#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bhd/states.hpp"

namespace bhd {

/// Standard-normal generator with a fixed, documented seed-to-sample mapping:
/// an mt19937_64 engine drives a Box-Muller transform, consuming exactly two
/// engine outputs per pair of normals. The mapping is stable within a release.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  double next();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic per-row seed: three chained splitmix64 rounds over
/// (base, stream, index). Rows of an experiment get independent, reproducible
/// generators without sharing state.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

/// Full description of one simulated measurement run. State and LO are the
/// pre-attenuation values; sample_trace_pair applies the transmission itself.
struct SimulationConfig {
  GaussianState state;
  LocalOscillator lo;
  MeasurementSetting setting;
  DetectorNoiseModel noise;
  std::int64_t n_samples = 1'000'000;
  std::uint64_t seed = 0;
  bool ac_coupled = true;

  void validate() const;  // throws std::domain_error if n_samples < 2
};

struct TraceMetadata {
  std::optional<SimulationConfig> config;
  std::optional<double> lo_power;  ///< post-attenuation LO power (amplitude^2)
  std::string source;              ///< "simulate" or an ingestion descriptor
};

/// Two equal-length photocurrent sample sequences, channels i1 and i2.
struct TracePair {
  std::vector<double> ch1;
  std::vector<double> ch2;
  TraceMetadata metadata;

  std::size_t size() const { return ch1.size(); }
};

/// Draw one electronic-noise pair with marginals N(0, sigma1^2), N(0, sigma2^2)
/// and correlation rho (Cholesky construction: e2 = sigma2*(rho z1 +
/// sqrt(1-rho^2) z2)). Always consumes exactly two normals.
std::pair<double, double> correlated_noise_pair(double sigma1, double sigma2,
                                                double rho, NormalSampler& rng);

/// Generate a dual-channel photocurrent trace.
///
/// The signal and LO are attenuated by setting.transmission, then per sample
/// the generator draws dX_LO ~ N(0, V_LO), dX_phi ~ N(0, V_phi) and a
/// correlated electronic-noise pair, and forms
///   i_{1,2} = a^2/2 + a (dX_LO +/- dX_phi) + e_{1,2}.
/// With ac_coupled the constant a^2/2 is dropped from both channels.
///
/// Four normals are consumed per sample in the fixed order (LO, signal, e1,
/// e2) regardless of parameter values, so traces with the same seed share the
/// same underlying noise stream. Identical configs give bit-identical traces.
TracePair sample_trace_pair(const SimulationConfig& config);

}  // namespace bhd
