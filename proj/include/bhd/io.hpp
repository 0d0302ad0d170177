#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bhd/experiments.hpp"
#include "bhd/trace_gen.hpp"

namespace bhd {

/// One run description, loaded from a JSON config file. Mirrors
/// SimulationConfig plus experiment selection, grids, SNL mode and the output
/// path. Every field has a documented default; unknown keys are rejected.
struct RunConfig {
  SimulationConfig sim;
  std::string experiment;  ///< "", "simulate", "phase-scan", "atten-sweep", "en-robustness"
  std::vector<double> phases;
  std::vector<double> transmissions;
  std::vector<double> en_scales;
  double en_rho = 0.0;
  SnlMode snl_mode = SnlMode::Analytic;
  std::string out;  ///< empty = command default
};

/// Parse and schema-validate a config document. Throws ConfigError with a
/// message naming the offending field.
RunConfig parse_run_config_json(const std::string& text);

/// Load a config file; IoError if unreadable, ConfigError on schema errors.
RunConfig load_run_config(const std::filesystem::path& path);

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

/// Write a trace as CSV: '#' metadata lines, an "i1,i2" header, then one
/// sample pair per line with full round-trip precision.
void write_trace_csv(const std::filesystem::path& path, const TracePair& traces);

/// Read a trace CSV. Comment lines carry key=value metadata; a complete set
/// reconstructs the generating SimulationConfig. Malformed rows raise
/// ConfigError naming the physical line number.
TracePair read_trace_csv(const std::filesystem::path& path);

/// Read a (power, variance) calibration ladder CSV with header
/// "power,variance".
std::vector<std::pair<double, double>> read_ladder_csv(const std::filesystem::path& path);

std::string to_csv(const PhaseScanResult& result);
std::string to_csv(const AttenuationSweepResult& result);
std::string to_csv(const EnRobustnessResult& result);

/// Marker written in place of a dB value when the covariance method infers a
/// nonpositive variance.
inline constexpr const char* kOutOfRangeMarker = "out_of_range";

void write_text_file(const std::filesystem::path& path, const std::string& content);

void write_calibration_json(const std::filesystem::path& path, const SnlCalibration& cal);
SnlCalibration read_calibration_json(const std::filesystem::path& path);

}  // namespace bhd
