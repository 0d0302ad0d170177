#include "bhd/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <vector>

#include "bhd/errors.hpp"
#include "bhd/estimators.hpp"
#include "bhd/experiments.hpp"
#include "bhd/io.hpp"

namespace bhd {

namespace fs = std::filesystem;

namespace {

template <typename Fn>
int run_guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const CalibrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
}

RunConfig load_with_overrides(const RunOptions& options, const char* command) {
  RunConfig cfg = load_run_config(options.config_path);
  if (!cfg.experiment.empty() && cfg.experiment != command) {
    throw ConfigError("config: experiment \"" + cfg.experiment +
                      "\" does not match command \"" + command + "\"");
  }
  if (options.seed) cfg.sim.seed = *options.seed;
  if (options.samples) {
    if (*options.samples < 2) {
      throw ConfigError("--samples must be >= 2 (got " + std::to_string(*options.samples) + ")");
    }
    cfg.sim.n_samples = *options.samples;
  }
  if (options.out) cfg.out = *options.out;
  return cfg;
}

std::string resolve_out(const RunConfig& cfg, const char* fallback) {
  return cfg.out.empty() ? fallback : cfg.out;
}

}  // namespace

int cmd_simulate(const RunOptions& options) {
  return run_guarded([&] {
    const RunConfig cfg = load_with_overrides(options, "simulate");
    const TracePair trace = sample_trace_pair(cfg.sim);
    const std::string out = resolve_out(cfg, "trace.csv");
    write_trace_csv(out, trace);
    std::cerr << "wrote " << trace.size() << " sample pairs to " << out << "\n";
    return kExitOk;
  });
}

int cmd_phase_scan(const RunOptions& options) {
  return run_guarded([&] {
    const RunConfig cfg = load_with_overrides(options, "phase-scan");
    const PhaseScanResult result = run_phase_scan(cfg.sim, cfg.phases);
    const std::string out = resolve_out(cfg, "phase_scan.csv");
    write_text_file(out, to_csv(result));

    std::size_t passed = 0;
    std::size_t errored = 0;
    for (const auto& row : result.rows) {
      if (row.failed) {
        ++errored;
        std::cerr << "row phase=" << format_double(row.phase) << " failed: " << row.error << "\n";
      } else if (row.within_4se) {
        ++passed;
      }
    }
    std::cerr << "phase-scan: " << result.rows.size() << " rows; 4*SE checks: " << passed
              << " passed, " << (result.rows.size() - errored - passed) << " failed; rows errored: "
              << errored << "\n";
    std::cerr << "wrote " << out << "\n";
    return kExitOk;
  });
}

int cmd_atten_sweep(const RunOptions& options) {
  return run_guarded([&] {
    const RunConfig cfg = load_with_overrides(options, "atten-sweep");
    const AttenuationSweepResult result =
        run_attenuation_sweep(cfg.sim, cfg.transmissions, cfg.snl_mode);
    const std::string out = resolve_out(cfg, "atten_sweep.csv");
    write_text_file(out, to_csv(result));

    std::size_t sub_passed = 0;
    std::size_t cov_passed = 0;
    std::size_t errored = 0;
    for (const auto& row : result.rows) {
      if (row.failed) {
        ++errored;
        std::cerr << "row t=" << format_double(row.transmission) << " failed: " << row.error
                  << "\n";
        continue;
      }
      if (row.sub_within_4se) ++sub_passed;
      if (row.cov_within_4se) ++cov_passed;
    }
    const std::size_t checked = result.rows.size() - errored;
    if (result.calibration) {
      std::cerr << "SNL calibration: slope=" << format_double(result.calibration->slope)
                << " intercept=" << format_double(result.calibration->intercept)
                << " r_squared=" << format_double(result.calibration->r_squared) << "\n";
    }
    std::cerr << "atten-sweep: " << result.rows.size() << " rows; subtraction 4*SE checks: "
              << sub_passed << "/" << checked << " passed; covariance 4*SE checks: " << cov_passed
              << "/" << checked << " passed; rows errored: " << errored << "\n";
    if (result.subtraction_zero_crossing) {
      std::cerr << "subtraction method crosses 0 dB at t ~ "
                << format_double(*result.subtraction_zero_crossing) << "\n";
    } else {
      std::cerr << "subtraction method does not cross 0 dB on this grid\n";
    }
    std::cerr << "wrote " << out << "\n";
    return kExitOk;
  });
}

int cmd_en_robustness(const RunOptions& options) {
  return run_guarded([&] {
    const RunConfig cfg = load_with_overrides(options, "en-robustness");
    const EnRobustnessResult result = run_en_robustness(cfg.sim, cfg.en_scales, cfg.en_rho);
    const std::string out = resolve_out(cfg, "en_robustness.csv");
    write_text_file(out, to_csv(result));

    std::size_t cov_passed = 0;
    std::size_t diff_passed = 0;
    std::size_t errored = 0;
    for (const auto& row : result.rows) {
      if (row.failed) {
        ++errored;
        std::cerr << "row scale=" << format_double(row.en_scale) << " failed: " << row.error
                  << "\n";
        continue;
      }
      if (row.cov_within_4se) ++cov_passed;
      if (row.diff_within_4se) ++diff_passed;
    }
    const std::size_t checked = result.rows.size() - errored;
    std::cerr << "en-robustness: " << result.rows.size() << " rows; covariance 4*SE checks: "
              << cov_passed << "/" << checked << " passed; difference-variance 4*SE checks: "
              << diff_passed << "/" << checked << " passed; rows errored: " << errored << "\n";
    std::cerr << "wrote " << out << "\n";
    return kExitOk;
  });
}

int cmd_analyze(const AnalyzeOptions& options) {
  return run_guarded([&] {
    if (options.snl && options.calibration_path) {
      throw ConfigError("pass either --snl or --calibration, not both");
    }
    const TracePair trace = read_trace_csv(options.trace_path);

    double snl = 0.0;
    if (options.snl) {
      snl = *options.snl;
      if (!(snl > 0.0)) throw ConfigError("--snl must be positive");
    } else if (options.calibration_path) {
      const SnlCalibration cal = read_calibration_json(*options.calibration_path);
      double power = 0.0;
      if (options.lo_power) {
        power = *options.lo_power;
      } else if (trace.metadata.lo_power) {
        power = *trace.metadata.lo_power;
      } else {
        throw ConfigError("trace carries no lo_power metadata; pass --lo-power");
      }
      if (!(power > 0.0)) throw ConfigError("LO power must be positive");
      snl = cal.snl_at(power);
    } else {
      throw ConfigError("analyze needs an SNL source: --snl VALUE or --calibration PATH");
    }

    const EstimateWithError cov = covariance(trace);
    const EstimateWithError diff = difference_variance(trace);
    const StateVerdict verdict = classify_state(cov, options.z_threshold);

    std::cout << "samples: " << trace.size() << "\n";
    std::cout << "snl: " << format_double(snl) << "\n";
    std::cout << "covariance: " << format_double(cov.value) << " +/- "
              << format_double(cov.std_error) << "\n";
    std::cout << "difference_variance: " << format_double(diff.value) << " +/- "
              << format_double(diff.std_error) << "\n";
    if (diff.value > 0.0) {
      std::cout << "squeezing_subtraction_db: "
                << format_double(squeezing_from_subtraction(trace, snl)) << "\n";
    } else {
      std::cout << "squeezing_subtraction_db: undefined (zero difference variance)\n";
    }
    try {
      std::cout << "squeezing_covariance_db: "
                << format_double(squeezing_from_covariance(trace, snl)) << "\n";
    } catch (const CovarianceOutOfRange& e) {
      std::cout << "squeezing_covariance_db: " << kOutOfRangeMarker
                << " (raw covariance " << format_double(e.covariance) << ")\n";
    }
    std::cout << "verdict: " << to_string(verdict.verdict)
              << " (z = " << format_double(verdict.z_score) << ")\n";
    return kExitOk;
  });
}

namespace {

std::vector<std::pair<double, double>> ladder_from_trace_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw ConfigError("no .csv trace files found in " + dir.string());
  }
  std::vector<std::pair<double, double>> points;
  points.reserve(files.size());
  for (const auto& file : files) {
    const TracePair trace = read_trace_csv(file);
    if (!trace.metadata.lo_power) {
      throw ConfigError(file.string() + ": trace carries no lo_power metadata");
    }
    points.emplace_back(*trace.metadata.lo_power, difference_variance(trace).value);
  }
  return points;
}

}  // namespace

int cmd_calibrate_snl(const CalibrateOptions& options) {
  return run_guarded([&] {
    const fs::path in(options.ladder_path);
    std::vector<std::pair<double, double>> points;
    if (fs::is_directory(in)) {
      points = ladder_from_trace_dir(in);
    } else {
      points = read_ladder_csv(in);
    }

    const SnlCalibration cal = calibrate_snl(points);
    const std::string out = options.out.value_or("snl_calibration.json");
    write_calibration_json(out, cal);
    std::cerr << "calibration: " << points.size() << " points; slope="
              << format_double(cal.slope) << " intercept=" << format_double(cal.intercept)
              << " r_squared=" << format_double(cal.r_squared) << "\n";
    std::cerr << "wrote " << out << "\n";
    return kExitOk;
  });
}

}  // namespace bhd
