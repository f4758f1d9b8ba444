"""Persistence of experiment results: CSV tables, JSON manifests, PGM maps.

A run directory holds ``manifest.json`` (everything needed to replay the
run bit-exactly, timestamp aside), one CSV per result table with numbers
at 17 significant digits (lossless for float64), a ``summary.json`` for
scalar extras, and optional P2 graymaps for phase diagrams.  Writes are
staged into a temporary sibling directory and renamed into place, so a
failed run never leaves a partial output directory.
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .experiments import (
    BaselineCurveConfig,
    BaselineCurveResult,
    PhaseDiagramConfig,
    PhaseDiagramResult,
    ScalingLawConfig,
    ScalingLawResult,
    StabilitySweepConfig,
    StabilitySweepResult,
)
from .recovery import SelectorSpec

SCHEMA_VERSION = 1

PHASE_HEADER = ["selector", "k", "s", "trials", "successes", "probability", "failures_numerical"]
CURVE_HEADER = ["k", "trials", "median_value"]
STABILITY_HEADER = ["delta", "trials", "median_error", "error_over_delta"]


@dataclass(frozen=True)
class RunManifest:
    kind: str
    params: dict
    master_seed: int
    code_version: str
    timestamp: str
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"

    def replay_key(self) -> str:
        """Canonical serialization with the timestamp removed."""
        payload = dataclasses.asdict(self)
        payload.pop("timestamp")
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))


_CONFIG_TYPES = {
    "phase": PhaseDiagramConfig,
    "baseline": BaselineCurveConfig,
    "scaling": ScalingLawConfig,
    "stability": StabilitySweepConfig,
}

_RESULT_KINDS = {
    PhaseDiagramResult: "phase",
    BaselineCurveResult: "baseline",
    ScalingLawResult: "scaling",
    StabilitySweepResult: "stability",
}


def make_manifest(result) -> RunManifest:
    """Build the replay manifest for an experiment result."""
    kind = _RESULT_KINDS[type(result)]
    params = dataclasses.asdict(result.config)
    return RunManifest(
        kind=kind,
        params=params,
        master_seed=result.config.master_seed,
        code_version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )


def config_from_manifest(manifest: RunManifest):
    """Rebuild the typed experiment config recorded in a manifest."""
    if manifest.kind not in _CONFIG_TYPES:
        raise ValueError(f"unknown experiment kind {manifest.kind!r}")
    params = dict(manifest.params)
    if manifest.kind == "phase":
        params["selectors"] = tuple(SelectorSpec(**sel) for sel in params["selectors"])
    for key, value in params.items():
        if isinstance(value, list):
            params[key] = tuple(value)
    return _CONFIG_TYPES[manifest.kind](**params)


# ---------------------------------------------------------------------------
# CSV plumbing


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _read_csv(path, expected_header) -> list[dict]:
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    header = lines[0].split(",")
    for pos, (got, want) in enumerate(zip(header, expected_header)):
        if got != want:
            raise ValueError(f"{path}: unexpected column {got!r} at position {pos}, expected {want!r}")
    if len(header) != len(expected_header):
        raise ValueError(
            f"{path}: expected {len(expected_header)} columns, found {len(header)}"
        )
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} cells, found {len(cells)}")
        rows.append(dict(zip(header, cells)))
    return rows


# ---------------------------------------------------------------------------
# Writers / readers per experiment kind


def _phase_rows(result: PhaseDiagramResult):
    cfg = result.config
    for j, sel in enumerate(cfg.selectors):
        for ki, k in enumerate(cfg.k_grid):
            for si, s in enumerate(cfg.s_grid):
                succ = int(result.successes[j, ki, si])
                yield [
                    sel.kind,
                    str(k),
                    str(s),
                    str(cfg.trials),
                    str(succ),
                    _fmt(succ / cfg.trials),
                    str(int(result.failures_numerical[ki, si])),
                ]


def _write_phase(result: PhaseDiagramResult, directory: str, pgm: bool) -> None:
    _write_csv(os.path.join(directory, "phase.csv"), PHASE_HEADER, _phase_rows(result))
    _write_summary(
        directory,
        {"audit_checked": result.audit_checked, "audit_violations": result.audit_violations},
    )
    if pgm:
        for j, sel in enumerate(result.config.selectors):
            write_pgm(
                os.path.join(directory, f"phase_{sel.kind}.pgm"),
                result.probability[j],
                result.config.k_grid,
                result.config.s_grid,
            )


def _read_phase(directory: str, config: PhaseDiagramConfig) -> PhaseDiagramResult:
    rows = _read_csv(os.path.join(directory, "phase.csv"), PHASE_HEADER)
    sel_pos = {sel.kind: j for j, sel in enumerate(config.selectors)}
    k_pos = {k: ki for ki, k in enumerate(config.k_grid)}
    s_pos = {s: si for si, s in enumerate(config.s_grid)}
    successes = np.zeros((len(sel_pos), len(k_pos), len(s_pos)), dtype=np.int64)
    failures = np.zeros((len(k_pos), len(s_pos)), dtype=np.int64)
    for row in rows:
        j = sel_pos[row["selector"]]
        ki = k_pos[int(row["k"])]
        si = s_pos[int(row["s"])]
        successes[j, ki, si] = int(row["successes"])
        failures[ki, si] = int(row["failures_numerical"])
    summary = _read_summary(directory)
    return PhaseDiagramResult(
        config, successes, failures, summary["audit_checked"], summary["audit_violations"]
    )


def _write_baseline(result: BaselineCurveResult, directory: str) -> None:
    cfg = result.config
    rows = (
        [str(k), str(cfg.trials), _fmt(result.median_value[ki])]
        for ki, k in enumerate(cfg.k_grid)
    )
    _write_csv(os.path.join(directory, "baseline.csv"), CURVE_HEADER, rows)
    _write_summary(
        directory,
        {
            "median_score": [float(x) for x in result.median_score],
            "failures_numerical": list(result.failures_numerical),
        },
    )


def _read_baseline(directory: str, config: BaselineCurveConfig) -> BaselineCurveResult:
    rows = _read_csv(os.path.join(directory, "baseline.csv"), CURVE_HEADER)
    medians = {int(r["k"]): float(r["median_value"]) for r in rows}
    summary = _read_summary(directory)
    return BaselineCurveResult(
        config,
        tuple(medians[k] for k in config.k_grid),
        tuple(summary["median_score"]),
        tuple(summary["failures_numerical"]),
    )


def _write_scaling(result: ScalingLawResult, directory: str) -> None:
    cfg = result.config
    _write_csv(
        os.path.join(directory, "scaling_k.csv"),
        CURVE_HEADER,
        ([str(k), str(cfg.trials), _fmt(m)] for k, m in zip(cfg.k_grid, result.k_medians)),
    )
    _write_csv(
        os.path.join(directory, "scaling_n.csv"),
        ["n", "trials", "median_value"],
        ([str(n), str(cfg.trials), _fmt(m)] for n, m in zip(cfg.n_grid, result.n_medians)),
    )
    _write_summary(directory, {"slope_k": result.slope_k, "slope_n": result.slope_n})


def _read_scaling(directory: str, config: ScalingLawConfig) -> ScalingLawResult:
    k_rows = _read_csv(os.path.join(directory, "scaling_k.csv"), CURVE_HEADER)
    n_rows = _read_csv(os.path.join(directory, "scaling_n.csv"), ["n", "trials", "median_value"])
    k_map = {int(r["k"]): float(r["median_value"]) for r in k_rows}
    n_map = {int(r["n"]): float(r["median_value"]) for r in n_rows}
    summary = _read_summary(directory)
    return ScalingLawResult(
        config,
        tuple(k_map[k] for k in config.k_grid),
        tuple(n_map[n] for n in config.n_grid),
        summary["slope_k"],
        summary["slope_n"],
    )


def _write_stability(result: StabilitySweepResult, directory: str) -> None:
    cfg = result.config
    rows = (
        [
            _fmt(delta),
            str(cfg.trials),
            _fmt(result.median_error[di]),
            "" if result.error_over_delta[di] is None else _fmt(result.error_over_delta[di]),
        ]
        for di, delta in enumerate(cfg.delta_grid)
    )
    _write_csv(os.path.join(directory, "stability.csv"), STABILITY_HEADER, rows)
    _write_summary(directory, {"failures_numerical": list(result.failures_numerical)})


def _read_stability(directory: str, config: StabilitySweepConfig) -> StabilitySweepResult:
    rows = _read_csv(os.path.join(directory, "stability.csv"), STABILITY_HEADER)
    med, ratio = {}, {}
    for r in rows:
        delta = float(r["delta"])
        med[delta] = float(r["median_error"])
        ratio[delta] = float(r["error_over_delta"]) if r["error_over_delta"] else None
    summary = _read_summary(directory)
    return StabilitySweepResult(
        config,
        tuple(med[d] for d in config.delta_grid),
        tuple(ratio[d] for d in config.delta_grid),
        tuple(summary["failures_numerical"]),
    )


def _write_summary(directory: str, payload: dict) -> None:
    with open(os.path.join(directory, "summary.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_summary(directory: str) -> dict:
    with open(os.path.join(directory, "summary.json")) as fh:
        return json.load(fh)


def write_pgm(path, probability, k_grid, s_grid) -> None:
    """Plain (P2) graymap of a probability table.

    Columns run over k left to right; rows over s, largest at the top.
    Gray level is ``round(255 * (1 - p))``: black marks certain recovery,
    white certain failure.
    """
    prob = np.asarray(probability, dtype=np.float64)
    if prob.shape != (len(k_grid), len(s_grid)):
        raise ValueError(f"probability table shape {prob.shape} does not match grids")
    gray = np.rint(255 * (1.0 - prob)).astype(int)
    with open(path, "w") as fh:
        fh.write("P2\n")
        fh.write("# gray = round(255*(1-probability)); rows s descending, cols k ascending\n")
        fh.write(f"{len(k_grid)} {len(s_grid)}\n255\n")
        for si in range(len(s_grid) - 1, -1, -1):
            fh.write(" ".join(str(gray[ki, si]) for ki in range(len(k_grid))) + "\n")


# ---------------------------------------------------------------------------
# Run directories


def write_results(result, manifest: RunManifest, path, *, pgm: bool = False) -> None:
    """Write a run directory atomically; ``path`` must not already exist."""
    path = os.fspath(path)
    if os.path.exists(path):
        raise FileExistsError(f"output path already exists: {path}")
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    staging = tempfile.mkdtemp(prefix=os.path.basename(path) + ".tmp-", dir=parent)
    try:
        with open(os.path.join(staging, "manifest.json"), "w") as fh:
            fh.write(manifest.to_json())
        if isinstance(result, PhaseDiagramResult):
            _write_phase(result, staging, pgm)
        elif isinstance(result, BaselineCurveResult):
            _write_baseline(result, staging)
        elif isinstance(result, ScalingLawResult):
            _write_scaling(result, staging)
        elif isinstance(result, StabilitySweepResult):
            _write_stability(result, staging)
        else:
            raise TypeError(f"cannot persist result of type {type(result).__name__}")
        os.rename(staging, path)
    except BaseException:
        import shutil

        shutil.rmtree(staging, ignore_errors=True)
        raise


def read_results(path):
    """Load a run directory; returns ``(result, manifest)``."""
    path = os.fspath(path)
    with open(os.path.join(path, "manifest.json")) as fh:
        manifest = RunManifest.from_json(fh.read())
    config = config_from_manifest(manifest)
    readers = {
        "phase": _read_phase,
        "baseline": _read_baseline,
        "scaling": _read_scaling,
        "stability": _read_stability,
    }
    return readers[manifest.kind](path, config), manifest
