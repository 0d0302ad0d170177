#include <CLI11.hpp>

#include "bhd/cli.hpp"

namespace {

void add_run_options(CLI::App* cmd, bhd::RunOptions& options) {
  cmd->add_option("--config", options.config_path, "JSON run configuration")->required();
  cmd->add_option("--out", options.out, "output path (overrides config)");
  cmd->add_option("--seed", options.seed, "RNG seed (overrides config)");
  cmd->add_option("--samples", options.samples, "samples per trace (overrides config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Balanced homodyne detection simulator with covariance-based, "
      "electronic-noise-free squeezing estimation"};
  app.require_subcommand(1);

  bhd::RunOptions sim_opts;
  auto* simulate = app.add_subcommand("simulate", "Generate a two-channel photocurrent trace");
  add_run_options(simulate, sim_opts);

  bhd::RunOptions phase_opts;
  auto* phase_scan =
      app.add_subcommand("phase-scan", "Covariance versus LO phase, Monte Carlo and analytic");
  add_run_options(phase_scan, phase_opts);

  bhd::RunOptions atten_opts;
  auto* atten_sweep = app.add_subcommand(
      "atten-sweep", "Squeezing versus transmission by the subtraction and covariance methods");
  add_run_options(atten_sweep, atten_opts);

  bhd::RunOptions en_opts;
  auto* en_robustness = app.add_subcommand(
      "en-robustness", "Estimator response to scaled, optionally correlated electronic noise");
  add_run_options(en_robustness, en_opts);

  bhd::AnalyzeOptions analyze_opts;
  auto* analyze = app.add_subcommand("analyze", "Estimate squeezing from a recorded trace CSV");
  analyze->add_option("--trace", analyze_opts.trace_path, "two-channel trace CSV")->required();
  analyze->add_option("--snl", analyze_opts.snl, "electronic-noise-free shot-noise variance");
  analyze->add_option("--calibration", analyze_opts.calibration_path,
                      "SNL calibration JSON from calibrate-snl");
  analyze->add_option("--lo-power", analyze_opts.lo_power,
                      "LO power for the calibration line (defaults to trace metadata)");
  analyze->add_option("--z-threshold", analyze_opts.z_threshold,
                      "significance threshold for the verdict");

  bhd::CalibrateOptions cal_opts;
  auto* calibrate = app.add_subcommand(
      "calibrate-snl", "Fit the shot-noise line from a (power, variance) ladder");
  calibrate->add_option("--ladder", cal_opts.ladder_path,
                        "ladder CSV or a directory of trace CSVs")
      ->required();
  calibrate->add_option("--out", cal_opts.out, "calibration output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return bhd::kExitUserError;
  }

  if (*simulate) return bhd::cmd_simulate(sim_opts);
  if (*phase_scan) return bhd::cmd_phase_scan(phase_opts);
  if (*atten_sweep) return bhd::cmd_atten_sweep(atten_opts);
  if (*en_robustness) return bhd::cmd_en_robustness(en_opts);
  if (*analyze) return bhd::cmd_analyze(analyze_opts);
  if (*calibrate) return bhd::cmd_calibrate_snl(cal_opts);
  return bhd::kExitUserError;
}
