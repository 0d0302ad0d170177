#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace bhd {

// Stable exit-code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 2;
inline constexpr int kExitIoError = 3;

/// Options shared by the config-driven subcommands. Flag values override the
/// corresponding config fields.
struct RunOptions {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
};

struct AnalyzeOptions {
  std::string trace_path;
  std::optional<double> snl;
  std::optional<std::string> calibration_path;
  std::optional<double> lo_power;
  double z_threshold = 3.0;
};

struct CalibrateOptions {
  std::string ladder_path;  ///< CSV of (power, variance) pairs, or a directory of trace CSVs
  std::optional<std::string> out;
};

int cmd_simulate(const RunOptions& options);
int cmd_phase_scan(const RunOptions& options);
int cmd_atten_sweep(const RunOptions& options);
int cmd_en_robustness(const RunOptions& options);
int cmd_analyze(const AnalyzeOptions& options);
int cmd_calibrate_snl(const CalibrateOptions& options);

}  // namespace bhd
