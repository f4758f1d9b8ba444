"""Seeded Monte-Carlo drivers: phase diagrams, baselines, scaling, stability.

Every trial draws from a substream keyed by
``(experiment, n, k, s, trial)`` plus a role label, so results are
bit-identical regardless of execution order or worker count, and a master
seed plus the run parameters replays any run exactly.

Two cross-experiment conventions matter:

* baseline trials key their substream by ``(n, k, trial)`` only, so the
  fixed-index and min-ratio modes see the same random bases and the
  min-ratio curve dominates the fixed-index curve trial by trial;
* stability trials leave the noise scale out of the key, so the same
  signal and subspace draws are reused across the noise grid and error
  ratios compare like for like.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import SelectionError
from .lp import SolveStatus, solve_l1_program
from .recovery import (
    SelectorSpec,
    evaluate_success,
    evaluate_trial,
    necessary_condition_value,
    recover_all,
    sparsity_score,
)
from .rng import RngStream
from .subspaces import TestVectorSpec, make_test_vector, planted_random, pure_random_basis

#: Oracle-selected error at or below this level counts as exact recovery
#: for the necessary-condition audit.
EXACT_RECOVERY_TOL = 1e-6

#: Slack allowed when auditing the necessary condition against LP output.
AUDIT_SLACK = 1e-6

_L1LINF = SelectorSpec("l1linf")
_ORACLE = SelectorSpec("oracle")

BASELINE_MODES = ("fixed_index", "min_ratio")


# ---------------------------------------------------------------------------
# Configurations and results


@dataclass(frozen=True)
class PhaseDiagramConfig:
    n: int
    k_grid: tuple[int, ...]
    s_grid: tuple[int, ...]
    trials: int
    delta: float = 0.01
    selectors: tuple[SelectorSpec, ...] = (
        SelectorSpec("oracle"),
        SelectorSpec("l1linf"),
        SelectorSpec("l1l2"),
        SelectorSpec("thresholded_l0"),
    )
    tau: float = 0.01
    master_seed: int = 0
    audit: bool = False
    workers: int = 1

    def __post_init__(self):
        _check_positive(self.trials, "trials")
        _check_positive(self.workers, "workers")
        if self.delta < 0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.k_grid or not self.s_grid:
            raise ValueError("k_grid and s_grid must be nonempty")
        for k in self.k_grid:
            if not 1 <= k <= self.n - 1:
                raise ValueError(f"k_grid entries must lie in [1, n - 1], got k={k}")
        for s in self.s_grid:
            if not 1 <= s <= self.n:
                raise ValueError(f"s_grid entries must lie in [1, n], got s={s}")
        if not self.selectors:
            raise ValueError("at least one selector is required")
        kinds = [sel.kind for sel in self.selectors]
        if len(set(kinds)) != len(kinds):
            raise ValueError("selector kinds must be distinct within one run")


@dataclass(frozen=True, eq=False)
class PhaseDiagramResult:
    """Success counts on the (selector, k, s) grid."""

    config: PhaseDiagramConfig
    successes: np.ndarray  # int, shape (n_selectors, len(k_grid), len(s_grid))
    failures_numerical: np.ndarray  # int, shape (len(k_grid), len(s_grid))
    audit_checked: int
    audit_violations: int

    @property
    def probability(self) -> np.ndarray:
        return self.successes / self.config.trials


@dataclass(frozen=True)
class BaselineCurveConfig:
    n: int
    k_grid: tuple[int, ...]
    trials: int
    mode: str = "fixed_index"
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        _check_positive(self.trials, "trials")
        _check_positive(self.workers, "workers")
        if self.mode not in BASELINE_MODES:
            raise ValueError(f"mode must be one of {BASELINE_MODES}, got {self.mode!r}")
        if not self.k_grid:
            raise ValueError("k_grid must be nonempty")
        for k in self.k_grid:
            if not 1 <= k <= self.n:
                raise ValueError(f"k_grid entries must lie in [1, n], got k={k}")


@dataclass(frozen=True, eq=False)
class BaselineCurveResult:
    """Per-k medians over trials for subspaces with no planted vector.

    ``median_value`` is the l1 objective in fixed-index mode and the
    minimal l1/linf score in min-ratio mode; ``median_score`` is the
    l1/linf score of the recorded output in both modes, which makes the
    two modes directly comparable.
    """

    config: BaselineCurveConfig
    median_value: tuple[float, ...]
    median_score: tuple[float, ...]
    failures_numerical: tuple[int, ...]


@dataclass(frozen=True)
class ScalingLawConfig:
    n_fixed: int
    k_grid: tuple[int, ...]
    k_fixed: int
    n_grid: tuple[int, ...]
    trials: int
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        _check_positive(self.trials, "trials")
        _check_positive(self.workers, "workers")
        if len(self.k_grid) < 3 or len(self.n_grid) < 3:
            raise ValueError("scaling fits need at least 3 grid points per axis")
        if max(self.k_grid) * 16 > self.n_fixed:
            raise ValueError("k sweep must satisfy k <= n/16")
        if self.k_fixed * 16 > min(self.n_grid):
            raise ValueError("n sweep must satisfy k <= n/16 at the smallest n")


@dataclass(frozen=True, eq=False)
class ScalingLawResult:
    config: ScalingLawConfig
    k_medians: tuple[float, ...]
    n_medians: tuple[float, ...]
    slope_k: float
    slope_n: float


@dataclass(frozen=True)
class StabilitySweepConfig:
    n: int
    k: int
    s: int
    delta_grid: tuple[float, ...]
    trials: int
    tau: float = 0.01
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        _check_positive(self.trials, "trials")
        _check_positive(self.workers, "workers")
        if not 1 <= self.k <= self.n - 1:
            raise ValueError(f"need 1 <= k <= n - 1, got k={self.k}")
        if not 1 <= self.s <= self.n:
            raise ValueError(f"need 1 <= s <= n, got s={self.s}")
        if not self.delta_grid:
            raise ValueError("delta_grid must be nonempty")
        for d in self.delta_grid:
            if d < 0:
                raise ValueError(f"delta values must be nonnegative, got {d}")


@dataclass(frozen=True, eq=False)
class StabilitySweepResult:
    """Median oracle-selection error per noise level, and error/noise ratios."""

    config: StabilitySweepConfig
    median_error: tuple[float, ...]
    error_over_delta: tuple[float | None, ...]  # None where delta == 0
    failures_numerical: tuple[int, ...]


def _check_positive(value: int, name: str) -> None:
    if int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value}")


def lower_median(values) -> float:
    """Order-statistic median: the lower of the two middles for even counts."""
    ordered = sorted(values)
    if not ordered:
        raise ValueError("median of empty sequence")
    return float(ordered[(len(ordered) - 1) // 2])


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 2:
        raise ValueError("need two equal-length 1-D grids with at least 2 points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs strictly positive values")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


# ---------------------------------------------------------------------------
# Phase diagram


def _phase_trial(config: PhaseDiagramConfig, k: int, s: int, trial: int):
    tstream = RngStream(config.master_seed).derive("phase", config.n, k, s, trial)
    v = make_test_vector(
        TestVectorSpec(config.n, s, config.delta), tstream.derive("signal")
    )
    inst = planted_random(v, k, tstream.derive("subspace"), mixed=True, support_size=s)
    candidates = recover_all(inst.W)
    solver_failed = any(
        c.solution.status is SolveStatus.NUMERICAL_FAILURE for c in candidates
    )

    successes = np.zeros(len(config.selectors), dtype=np.int64)
    oracle_error = None
    for j, sel in enumerate(config.selectors):
        try:
            outcome = evaluate_trial(
                candidates, sel, v, config.tau, oracle_index=inst.i_star
            )
        except SelectionError:
            continue
        successes[j] = int(outcome.success)
        if sel.kind == "oracle":
            oracle_error = outcome.error

    audit_checked = audit_violation = 0
    if config.audit:
        if oracle_error is None:
            try:
                oracle_error = evaluate_trial(
                    candidates, _ORACLE, v, config.tau, oracle_index=inst.i_star
                ).error
            except SelectionError:
                oracle_error = None
        if oracle_error is not None and oracle_error <= EXACT_RECOVERY_TOL:
            audit_checked = 1
            bound = necessary_condition_value(inst.vtilde, inst.i_star)
            ratio = np.abs(v).sum() / np.abs(v).max()
            audit_violation = int(ratio > bound + AUDIT_SLACK)

    return successes, int(solver_failed), audit_checked, audit_violation


def _phase_cell(args):
    config, ki, si = args
    k, s = config.k_grid[ki], config.s_grid[si]
    successes = np.zeros(len(config.selectors), dtype=np.int64)
    failures = 0
    audit_checked = audit_violations = 0
    for trial in range(config.trials):
        succ, failed, checked, violated = _phase_trial(config, k, s, trial)
        successes += succ
        failures += failed
        audit_checked += checked
        audit_violations += violated
    return ki, si, successes, failures, audit_checked, audit_violations


def phase_diagram(config: PhaseDiagramConfig) -> PhaseDiagramResult:
    """Empirical recovery probability over the (k, s) grid, per selector.

    Each trial plants an approximately s-sparse vector in a random
    (k+1)-dimensional subspace, solves the n pinned programs once, and
    scores every selector on the shared candidate set.
    """
    tasks = [
        (config, ki, si)
        for ki in range(len(config.k_grid))
        for si in range(len(config.s_grid))
    ]
    successes = np.zeros(
        (len(config.selectors), len(config.k_grid), len(config.s_grid)), dtype=np.int64
    )
    failures = np.zeros((len(config.k_grid), len(config.s_grid)), dtype=np.int64)
    audit_checked = audit_violations = 0
    for ki, si, succ, fail, checked, violated in _map_tasks(
        _phase_cell, tasks, config.workers
    ):
        successes[:, ki, si] = succ
        failures[ki, si] = fail
        audit_checked += checked
        audit_violations += violated
    return PhaseDiagramResult(config, successes, failures, audit_checked, audit_violations)


# ---------------------------------------------------------------------------
# Baseline curves (no planted vector)


def _baseline_trial(master_seed: int, n: int, k: int, trial: int, mode: str):
    stream = RngStream(master_seed).derive("baseline", n, k, trial)
    A = pure_random_basis(n, k, stream)
    if mode == "fixed_index":
        sol = solve_l1_program(A, 0)
        if not sol.optimal:
            return math.inf, math.inf, 1
        return sol.objective, sparsity_score(sol.z, _L1LINF), 0
    candidates = recover_all(A)
    failed = int(
        any(c.solution.status is SolveStatus.NUMERICAL_FAILURE for c in candidates)
    )
    scores = [
        sparsity_score(c.solution.z, _L1LINF) for c in candidates if c.solution.optimal
    ]
    if not scores:
        return math.inf, math.inf, 1
    best = min(scores)
    return best, best, failed


def _baseline_point(args):
    master_seed, n, k, trials, mode, tag = args
    values, scores, failures = [], [], 0
    for trial in range(trials):
        value, score, failed = _baseline_trial(master_seed, n, k, trial, mode)
        values.append(value)
        scores.append(score)
        failures += failed
    return tag, lower_median(values), lower_median(scores), failures


def baseline_curve(config: BaselineCurveConfig) -> BaselineCurveResult:
    """Median behavior of the pinned programs on purely random subspaces.

    Fixed-index mode records the objective of the single program that pins
    coordinate 0 (the choice is immaterial in distribution); min-ratio mode
    solves all n programs and records the smallest l1/linf score.
    """
    tasks = [
        (config.master_seed, config.n, k, config.trials, config.mode, ki)
        for ki, k in enumerate(config.k_grid)
    ]
    medians = [None] * len(config.k_grid)
    scores = [None] * len(config.k_grid)
    failures = [0] * len(config.k_grid)
    for tag, med, score, fail in _map_tasks(_baseline_point, tasks, config.workers):
        medians[tag], scores[tag], failures[tag] = med, score, fail
    return BaselineCurveResult(config, tuple(medians), tuple(scores), tuple(failures))


def scaling_fit(config: ScalingLawConfig) -> ScalingLawResult:
    """Fit the two scaling exponents of the fixed-index baseline medians.

    Medians are taken over the same seeded trials as fixed-index baseline
    curves at each grid point; the slopes are least-squares fits of the
    log medians against log k (at fixed n) and log n (at fixed k).
    """
    tasks = [
        (config.master_seed, config.n_fixed, k, config.trials, "fixed_index", ("k", ki))
        for ki, k in enumerate(config.k_grid)
    ] + [
        (config.master_seed, n, config.k_fixed, config.trials, "fixed_index", ("n", ni))
        for ni, n in enumerate(config.n_grid)
    ]
    k_medians = [None] * len(config.k_grid)
    n_medians = [None] * len(config.n_grid)
    for (axis, idx), med, _score, _fail in _map_tasks(
        _baseline_point, tasks, config.workers
    ):
        (k_medians if axis == "k" else n_medians)[idx] = med
    slope_k = loglog_slope(config.k_grid, k_medians)
    slope_n = loglog_slope(config.n_grid, n_medians)
    return ScalingLawResult(config, tuple(k_medians), tuple(n_medians), slope_k, slope_n)


# ---------------------------------------------------------------------------
# Stability sweep


def _stability_trial(config: StabilitySweepConfig, trial: int):
    tstream = RngStream(config.master_seed).derive(
        "stability", config.n, config.k, config.s, trial
    )
    errors = np.empty(len(config.delta_grid))
    failures = np.zeros(len(config.delta_grid), dtype=np.int64)
    for di, delta in enumerate(config.delta_grid):
        # Re-deriving the role streams replays the same draws for every
        # delta: only the noise scale varies within a trial.
        v = make_test_vector(
            TestVectorSpec(config.n, config.s, delta), tstream.derive("signal")
        )
        inst = planted_random(
            v, config.k, tstream.derive("subspace"), mixed=True, support_size=config.s
        )
        sol = solve_l1_program(inst.W, inst.i_star)
        if not sol.optimal:
            errors[di] = math.inf
            failures[di] = 1
            continue
        errors[di], _ = evaluate_success(sol.z, v, config.tau)
    return errors, failures


def _stability_chunk(args):
    config, trial = args
    return (trial,) + _stability_trial(config, trial)


def stability_sweep(config: StabilitySweepConfig) -> StabilitySweepResult:
    """Median oracle-selection error as the planted vector's tail grows.

    Oracle selection takes the program pinned at the peak coordinate, so
    only that one program is solved per (trial, delta).
    """
    tasks = [(config, trial) for trial in range(config.trials)]
    all_errors = np.empty((config.trials, len(config.delta_grid)))
    failures = np.zeros(len(config.delta_grid), dtype=np.int64)
    for trial, errors, fails in _map_tasks(_stability_chunk, tasks, config.workers):
        all_errors[trial] = errors
        failures += fails
    medians = tuple(lower_median(all_errors[:, di]) for di in range(len(config.delta_grid)))
    ratios = tuple(
        med / delta if delta > 0 else None
        for med, delta in zip(medians, config.delta_grid)
    )
    return StabilitySweepResult(config, medians, ratios, tuple(int(f) for f in failures))


# ---------------------------------------------------------------------------
# Worker-pool plumbing


def _map_tasks(fn, tasks, workers: int):
    """Run ``fn`` over ``tasks``, in-process or on a process pool.

    Results are yielded as they complete; callers must place them by the
    task tags they carry, never by arrival order.
    """
    if workers <= 1 or len(tasks) <= 1:
        for task in tasks:
            yield fn(task)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, tasks)
