"""Smoke tests for the bhdsim python module and the CLI."""

import json
import math
import os
import subprocess

import numpy as np
import pytest

import bhdsim as bhd


def test_state_algebra():
    vac = bhd.GaussianState.vacuum()
    assert vac.vx == 0.25 and vac.vy == 0.25

    state = bhd.GaussianState(0.171, 0.79)
    assert bhd.rotated_variance(state, 0.0) == pytest.approx(0.171)
    assert bhd.rotated_variance(state, math.pi / 2) == pytest.approx(0.79)

    lossy = bhd.apply_loss(state, 0.5)
    assert lossy.vx == pytest.approx(0.5 * 0.171 + 0.125)

    lo = bhd.LocalOscillator(1.0)
    setting = bhd.MeasurementSetting()
    assert bhd.predicted_covariance(state, lo, setting) == pytest.approx(0.079)
    assert bhd.squeezing_db(0.171, 0.25) == pytest.approx(-1.65, abs=0.01)

    with pytest.raises(ValueError):
        bhd.GaussianState(0.1, 0.1)  # unphysical


def test_trace_generation_is_deterministic():
    cfg = bhd.SimulationConfig(
        state=bhd.GaussianState(0.171, 0.79),
        noise=bhd.DetectorNoiseModel(0.5, 0.5, 0.0),
        n_samples=20_000,
        seed=12,
    )
    a = bhd.sample_trace_pair(cfg)
    b = bhd.sample_trace_pair(cfg)
    assert len(a) == 20_000
    np.testing.assert_array_equal(a.ch1, b.ch1)
    np.testing.assert_array_equal(a.ch2, b.ch2)
    assert a.metadata.lo_power == pytest.approx(1.0)


def test_estimators_match_predictions():
    state = bhd.GaussianState(0.171, 0.79)
    cfg = bhd.SimulationConfig(state=state, n_samples=200_000, seed=3)
    trace = bhd.sample_trace_pair(cfg)

    cov = bhd.covariance(trace)
    assert cov.value == pytest.approx(0.079, abs=4 * cov.std_error)

    diff = bhd.difference_variance(trace)
    assert diff.value == pytest.approx(0.684, abs=4 * diff.std_error)

    verdict = bhd.classify_state(cov)
    assert verdict.verdict == bhd.Verdict.Squeezed

    sq = bhd.squeezing_from_covariance(trace, 1.0)
    assert sq == pytest.approx(-1.65, abs=0.15)


def test_numpy_trace_ingestion():
    ch1 = np.array([0.5, -0.5])
    ch2 = np.array([0.079, -0.079])
    trace = bhd.make_trace_pair(ch1, ch2)
    assert bhd.squeezing_from_covariance(trace, 1.0) == pytest.approx(-1.65, abs=0.01)

    too_big = bhd.make_trace_pair(np.array([0.5, -0.5]), np.array([0.5, -0.5]))
    with pytest.raises(bhd.CovarianceOutOfRange):
        bhd.squeezing_from_covariance(too_big, 1.0)


def test_phase_scan_rows():
    cfg = bhd.SimulationConfig(
        state=bhd.GaussianState(0.171, 0.79), n_samples=50_000, seed=9
    )
    result = bhd.run_phase_scan(cfg, bhd.phase_grid(8))
    assert len(result.rows) == 8
    assert result.rows[0].cov_analytic == pytest.approx(0.079)
    assert all(row.within_4se for row in result.rows)


def test_snl_calibration():
    cal = bhd.calibrate_snl([(1.0, 2.5), (2.0, 4.5), (4.0, 8.5)])
    assert cal.slope == pytest.approx(2.0)
    assert cal.intercept == pytest.approx(0.5)
    assert cal.snl_at(0.1) == pytest.approx(0.2)
    with pytest.raises(bhd.CalibrationError):
        bhd.calibrate_snl([(1.0, 2.0)])


@pytest.fixture(scope="module")
def cli():
    path = os.environ.get("BHD_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("BHD_CLI not set; CLI smoke tests need the built binary")
    return path


def test_cli_simulate_analyze_roundtrip(cli, tmp_path):
    config = {
        "state": {"vx": 0.171, "vy": 0.79},
        "noise": {"sigma1": 0.1, "sigma2": 0.1},
        "n_samples": 100_000,
        "seed": 2024,
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    trace_path = tmp_path / "trace.csv"

    run = subprocess.run(
        [cli, "simulate", "--config", str(config_path), "--out", str(trace_path)],
        capture_output=True,
        text=True,
    )
    assert run.returncode == 0, run.stderr

    analyze = subprocess.run(
        [cli, "analyze", "--trace", str(trace_path), "--snl", "1.0"],
        capture_output=True,
        text=True,
    )
    assert analyze.returncode == 0, analyze.stderr
    assert "verdict: Squeezed" in analyze.stdout
    assert "squeezing_covariance_db: -1." in analyze.stdout


def test_cli_rejects_bad_config(cli, tmp_path):
    config_path = tmp_path / "bad.json"
    config_path.write_text(json.dumps({"setting": {"transmission": 1.5}}))
    run = subprocess.run(
        [cli, "simulate", "--config", str(config_path)],
        capture_output=True,
        text=True,
        cwd=tmp_path,
    )
    assert run.returncode == 2
    assert "setting.transmission" in run.stderr


def test_cli_phase_scan_deterministic(cli, tmp_path):
    config = {
        "n_samples": 5_000,
        "seed": 5,
        "phases": {"count": 6},
        "state": {"vx": 0.171, "vy": 0.79},
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    for out in (out_a, out_b):
        run = subprocess.run(
            [cli, "phase-scan", "--config", str(config_path), "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert run.returncode == 0, run.stderr
    assert out_a.read_bytes() == out_b.read_bytes()
    header = out_a.read_text().splitlines()[0]
    assert header == "phase,cov_mc,cov_mc_se,cov_analytic,abs_dev,within_4se,failed"
