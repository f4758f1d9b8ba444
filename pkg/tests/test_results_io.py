import json
import os

import numpy as np
import pytest

from sparsespan.experiments import (
    BaselineCurveConfig,
    PhaseDiagramConfig,
    ScalingLawConfig,
    StabilitySweepConfig,
    baseline_curve,
    phase_diagram,
    scaling_fit,
    stability_sweep,
)
from sparsespan.recovery import SelectorSpec
from sparsespan.results import (
    RunManifest,
    config_from_manifest,
    make_manifest,
    read_results,
    write_pgm,
    write_results,
)


@pytest.fixture(scope="module")
def phase_result():
    cfg = PhaseDiagramConfig(
        n=16, k_grid=(2, 4), s_grid=(1, 3), trials=3, delta=0.01,
        selectors=(SelectorSpec("oracle"), SelectorSpec("thresholded_l0")),
        master_seed=8, audit=True,
    )
    return phase_diagram(cfg)


def test_phase_round_trip(phase_result, tmp_path):
    out = tmp_path / "run"
    write_results(phase_result, make_manifest(phase_result), out, pgm=True)
    back, manifest = read_results(out)
    assert back.config == phase_result.config
    assert np.array_equal(back.successes, phase_result.successes)
    assert np.array_equal(back.failures_numerical, phase_result.failures_numerical)
    assert back.audit_checked == phase_result.audit_checked
    assert back.audit_violations == phase_result.audit_violations
    assert manifest.kind == "phase"
    assert (out / "phase_oracle.pgm").exists()
    assert (out / "phase_thresholded_l0.pgm").exists()


def test_baseline_round_trip(tmp_path):
    res = baseline_curve(BaselineCurveConfig(n=10, k_grid=(2, 5, 10), trials=4, master_seed=3))
    write_results(res, make_manifest(res), tmp_path / "run")
    back, _ = read_results(tmp_path / "run")
    assert back.config == res.config
    assert back.median_value == res.median_value
    assert back.median_score == res.median_score
    assert back.failures_numerical == res.failures_numerical


def test_scaling_round_trip(tmp_path):
    res = scaling_fit(
        ScalingLawConfig(n_fixed=48, k_grid=(1, 2, 3), k_fixed=1,
                         n_grid=(16, 32, 48), trials=2, master_seed=5)
    )
    write_results(res, make_manifest(res), tmp_path / "run")
    back, _ = read_results(tmp_path / "run")
    assert back.config == res.config
    assert back.k_medians == res.k_medians
    assert back.n_medians == res.n_medians
    assert back.slope_k == res.slope_k
    assert back.slope_n == res.slope_n


def test_stability_round_trip(tmp_path):
    res = stability_sweep(
        StabilitySweepConfig(n=16, k=2, s=2, delta_grid=(0.0, 1e-2), trials=3, master_seed=7)
    )
    write_results(res, make_manifest(res), tmp_path / "run")
    back, _ = read_results(tmp_path / "run")
    assert back.config == res.config
    assert back.median_error == res.median_error
    assert back.error_over_delta == res.error_over_delta


def test_csv_float_formatting_is_lossless(tmp_path, phase_result):
    out = tmp_path / "run"
    write_results(phase_result, make_manifest(phase_result), out)
    text = (out / "phase.csv").read_text().splitlines()
    assert text[0] == "selector,k,s,trials,successes,probability,failures_numerical"
    probs = [float(line.split(",")[5]) for line in text[1:]]
    assert probs == [s / 3 for s in phase_result.successes.ravel()]


def test_malformed_header_names_column(tmp_path, phase_result):
    out = tmp_path / "run"
    write_results(phase_result, make_manifest(phase_result), out)
    csv = out / "phase.csv"
    lines = csv.read_text().splitlines()
    lines[0] = lines[0].replace("successes", "wins")
    csv.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="wins"):
        read_results(out)


def test_write_refuses_existing_path(tmp_path, phase_result):
    out = tmp_path / "run"
    out.mkdir()
    with pytest.raises(FileExistsError):
        write_results(phase_result, make_manifest(phase_result), out)


def test_failed_write_leaves_no_output(tmp_path, phase_result):
    with pytest.raises(TypeError):
        write_results(object(), make_manifest(phase_result), tmp_path / "run")
    assert sorted(os.listdir(tmp_path)) == []


def test_manifest_replay_key_ignores_timestamp(phase_result):
    m1 = make_manifest(phase_result)
    m2 = RunManifest(
        kind=m1.kind, params=m1.params, master_seed=m1.master_seed,
        code_version=m1.code_version, timestamp="2000-01-01T00:00:00+00:00",
    )
    assert m1.replay_key() == m2.replay_key()
    assert m1.to_json() != m2.to_json()


def test_config_from_manifest_round_trip(phase_result):
    manifest = make_manifest(phase_result)
    rebuilt = config_from_manifest(manifest)
    assert rebuilt == phase_result.config
    # JSON round trip preserves the replay key too.
    reparsed = RunManifest.from_json(manifest.to_json())
    assert config_from_manifest(reparsed) == phase_result.config
    assert reparsed.replay_key() == manifest.replay_key()


def test_pgm_contents(tmp_path):
    path = tmp_path / "map.pgm"
    prob = np.array([[1.0, 0.5], [0.0, 0.25]])  # shape (k, s)
    write_pgm(path, prob, k_grid=(2, 4), s_grid=(1, 2))
    lines = path.read_text().splitlines()
    assert lines[0] == "P2"
    assert lines[2] == "2 2"
    assert lines[3] == "255"
    # top row is the larger s: probabilities (k=2,s=2)=0.5 -> 128, (k=4,s=2)=0.25 -> 191
    assert lines[4].split() == ["128", "191"]
    assert lines[5].split() == ["0", "255"]


def test_summary_json_is_sorted_and_versioned(tmp_path, phase_result):
    out = tmp_path / "run"
    write_results(phase_result, make_manifest(phase_result), out)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["schema_version"] == 1
    assert manifest["kind"] == "phase"
    assert manifest["params"]["n"] == 16
