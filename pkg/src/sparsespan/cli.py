"""Command-line surface for reproducible runs.

Subcommands: generate, recover, phase, baseline, scaling, stability,
certify.  Every experiment writes a run directory containing a replayable
manifest; pass ``--manifest`` to an experiment subcommand to rerun a
recorded configuration.  Exit status: 0 success, 1 configuration error,
2 runtime or numerical error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .exceptions import FaceLimitError, NumericalFailureError, SelectionError
from .experiments import (
    BASELINE_MODES,
    BaselineCurveConfig,
    PhaseDiagramConfig,
    ScalingLawConfig,
    StabilitySweepConfig,
    baseline_curve,
    phase_diagram,
    scaling_fit,
    stability_sweep,
)
from .recovery import (
    SELECTOR_KINDS,
    SelectorSpec,
    certify_exact,
    certify_stable,
    evaluate_trial,
    recover_all,
)
from .results import RunManifest, config_from_manifest, make_manifest, read_results, write_results
from .rng import RngStream
from .subspaces import TestVectorSpec, load_instance, make_test_vector, planted_random, save_instance


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports configuration errors with exit status 1."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _config_error(message: str) -> int:
    print(f"sparsespan: error: {message}", file=sys.stderr)
    return 1


def _runtime_error(message: str) -> int:
    print(f"sparsespan: runtime error: {message}", file=sys.stderr)
    return 2


def _grid(lo: int, hi: int, step: int) -> tuple[int, ...]:
    return tuple(range(lo, hi + 1, step))


def _selector_from_args(args) -> SelectorSpec:
    return SelectorSpec(args.selector, epsilon=args.epsilon, zero_tol=args.zero_tol)


def _make_instance(args):
    """Generate the same (vector, instance) pair the experiment drivers use."""
    stream = RngStream(args.seed).derive("cli", args.n, args.k, args.s)
    v = make_test_vector(
        TestVectorSpec(args.n, args.s, args.delta), stream.derive("signal")
    )
    mixed = not getattr(args, "unmixed", False)
    instance = planted_random(
        v, args.k, stream.derive("subspace"), mixed=mixed, support_size=args.s
    )
    return v, instance


def _check_out(parser, out: str) -> None:
    if os.path.exists(out):
        parser.error(f"--out path already exists: {out}")
    parent = os.path.dirname(os.path.abspath(out))
    probe = parent
    while probe and not os.path.exists(probe):
        probe = os.path.dirname(probe)
    if probe and not os.access(probe, os.W_OK):
        parser.error(f"--out is not writable: {out}")


def _load_manifest_config(parser, args, kind: str):
    try:
        with open(args.manifest) as fh:
            manifest = RunManifest.from_json(fh.read())
    except (OSError, ValueError, TypeError, KeyError) as exc:
        parser.error(f"--manifest could not be read: {exc}")
    if manifest.kind != kind:
        parser.error(f"--manifest records a {manifest.kind!r} run, not {kind!r}")
    config = config_from_manifest(manifest)
    if args.workers is not None:
        config = type(config)(**{**config.__dict__, "workers": args.workers})
    return config


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_generate(parser, args) -> int:
    _check_out(parser, args.out)
    v, instance = _make_instance(args)
    staging = f"{args.out}.tmp-{os.getpid()}"
    save_instance(instance, staging)
    os.rename(staging, args.out)
    print(f"instance written to {args.out} (n={args.n}, k={args.k}, s={args.s}, i*={instance.i_star})")
    return 0


def _cmd_recover(parser, args) -> int:
    if args.instance is not None:
        instance = load_instance(args.instance)
        v = instance.v
    else:
        if None in (args.n, args.k, args.s):
            parser.error("recover requires --n, --k and --s (or --instance)")
        v, instance = _make_instance(args)
    selector = _selector_from_args(args)
    candidates = recover_all(instance.W)
    outcome = evaluate_trial(
        candidates, selector, v, args.tau, oracle_index=instance.i_star
    )
    print(f"chosen index: {outcome.chosen_index}")
    print(f"error: {outcome.error:.6g}")
    print(f"success: {outcome.success}")
    return 0


def _cmd_certify(parser, args) -> int:
    v, instance = _make_instance(args)
    alpha = args.alpha if args.alpha is not None else math.sqrt(math.log(args.n))
    exact = None
    if args.delta == 0:
        exact = certify_exact(v, instance.vtilde, instance.S)
        print(f"exact-recovery certificate: {exact}")
    else:
        print("exact-recovery certificate: skipped (requires delta = 0)")
    bounds = certify_stable(v, instance.vtilde, instance.S, alpha)
    if bounds is None:
        print(f"stability certificate (alpha={alpha:.4g}): not satisfied")
    else:
        print(
            f"stability certificate (alpha={alpha:.4g}): |x1 - 1| <= {bounds[0]:.6g}, "
            f"tail l1 <= {bounds[1]:.6g}"
        )
    return 0


def _cmd_phase(parser, args) -> int:
    _check_out(parser, args.out)
    if args.manifest is not None:
        config = _load_manifest_config(parser, args, "phase")
    else:
        try:
            selectors = tuple(
                SelectorSpec(kind, epsilon=args.epsilon) for kind in args.selectors
            )
            config = PhaseDiagramConfig(
                n=args.n,
                k_grid=_grid(args.kmin, args.kmax, args.kstep),
                s_grid=_grid(args.smin, args.smax, args.sstep),
                trials=args.trials,
                delta=args.delta,
                selectors=selectors,
                tau=args.tau,
                master_seed=args.seed,
                audit=args.audit,
                workers=args.workers or 1,
            )
        except ValueError as exc:
            parser.error(str(exc))
    result = phase_diagram(config)
    write_results(result, make_manifest(result), args.out, pgm=args.pgm)
    print(f"phase diagram written to {args.out}")
    if config.audit:
        print(
            f"necessary-condition audit: {result.audit_violations} violations "
            f"in {result.audit_checked} exact recoveries"
        )
    return 0


def _cmd_baseline(parser, args) -> int:
    _check_out(parser, args.out)
    if args.manifest is not None:
        config = _load_manifest_config(parser, args, "baseline")
    else:
        try:
            config = BaselineCurveConfig(
                n=args.n,
                k_grid=_grid(args.kmin, args.kmax, args.kstep),
                trials=args.trials,
                mode=args.mode,
                master_seed=args.seed,
                workers=args.workers or 1,
            )
        except ValueError as exc:
            parser.error(str(exc))
    result = baseline_curve(config)
    write_results(result, make_manifest(result), args.out)
    print(f"baseline curve written to {args.out}")
    return 0


def _cmd_scaling(parser, args) -> int:
    _check_out(parser, args.out)
    if args.manifest is not None:
        config = _load_manifest_config(parser, args, "scaling")
    else:
        try:
            config = ScalingLawConfig(
                n_fixed=args.n_fixed,
                k_grid=tuple(args.k_list),
                k_fixed=args.k_fixed,
                n_grid=tuple(args.n_list),
                trials=args.trials,
                master_seed=args.seed,
                workers=args.workers or 1,
            )
        except ValueError as exc:
            parser.error(str(exc))
    result = scaling_fit(config)
    write_results(result, make_manifest(result), args.out)
    print(f"scaling fit written to {args.out}")
    print(f"slope vs k: {result.slope_k:.4f}   slope vs n: {result.slope_n:.4f}")
    return 0


def _cmd_stability(parser, args) -> int:
    _check_out(parser, args.out)
    if args.manifest is not None:
        config = _load_manifest_config(parser, args, "stability")
    else:
        try:
            config = StabilitySweepConfig(
                n=args.n,
                k=args.k,
                s=args.s,
                delta_grid=tuple(args.deltas),
                trials=args.trials,
                tau=args.tau,
                master_seed=args.seed,
                workers=args.workers or 1,
            )
        except ValueError as exc:
            parser.error(str(exc))
    result = stability_sweep(config)
    write_results(result, make_manifest(result), args.out)
    print(f"stability sweep written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser assembly


def _add_instance_flags(sub, *, delta_default=0.01, required=True):
    sub.add_argument("--n", type=int, required=required, help="ambient dimension")
    sub.add_argument("--k", type=int, required=required, help="random subspace dimension")
    sub.add_argument("--s", type=int, required=required, help="planted support size")
    sub.add_argument(
        "--delta", type=float, default=delta_default,
        help=f"noise scale of the planted vector (default {delta_default})",
    )
    sub.add_argument("--seed", type=int, default=0, help="master seed (default 0)")


def _add_experiment_flags(sub):
    sub.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    sub.add_argument("--trials", type=int, default=50, help="trials per grid point (default 50)")
    sub.add_argument("--workers", type=int, default=None, help="worker processes (default 1)")
    sub.add_argument("--out", required=True, help="output run directory (must not exist)")
    sub.add_argument("--manifest", default=None, help="replay the run recorded in this manifest")


def build_parser() -> _Parser:
    parser = _Parser(prog="sparsespan", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("generate", parents=[], help="write a planted instance to disk")
    _add_instance_flags(p)
    p.add_argument("--unmixed", action="store_true", help="keep [v | random] column order (debugging)")
    p.add_argument("--out", required=True, help="output instance directory (must not exist)")
    p.set_defaults(handler=_cmd_generate)

    p = subs.add_parser("recover", help="run the n programs on one planted instance")
    _add_instance_flags(p, required=False)
    p.add_argument("--instance", default=None, help="read a generated instance directory instead of sampling")
    p.add_argument(
        "--selector", choices=SELECTOR_KINDS, default="thresholded_l0",
        help="sparsity selector (default thresholded_l0)",
    )
    p.add_argument("--epsilon", type=float, default=0.01, help="thresholded-l0 level (default 0.01)")
    p.add_argument("--zero-tol", type=float, default=1e-6, help="strict-l0 zero cutoff (default 1e-6)")
    p.add_argument("--tau", type=float, default=0.01, help="success tolerance (default 0.01)")
    p.set_defaults(handler=_cmd_recover)

    p = subs.add_parser("certify", help="evaluate the deterministic recovery certificates")
    _add_instance_flags(p, delta_default=0.0)
    p.add_argument("--alpha", type=float, default=None, help="stability margin (default sqrt(log n))")
    p.set_defaults(handler=_cmd_certify)

    p = subs.add_parser("phase", help="success-probability diagram over the (k, s) grid")
    p.add_argument("--n", type=int, default=64, help="ambient dimension (default 64)")
    p.add_argument("--kmin", type=int, default=2, help="smallest k (default 2)")
    p.add_argument("--kmax", type=int, required=False, default=16, help="largest k (default 16)")
    p.add_argument("--kstep", type=int, default=1, help="k stride (default 1)")
    p.add_argument("--smin", type=int, default=1, help="smallest s (default 1)")
    p.add_argument("--smax", type=int, default=24, help="largest s (default 24)")
    p.add_argument("--sstep", type=int, default=1, help="s stride (default 1)")
    p.add_argument("--delta", type=float, default=0.01, help="noise scale (default 0.01)")
    p.add_argument("--epsilon", type=float, default=0.01, help="thresholded-l0 level (default 0.01)")
    p.add_argument("--tau", type=float, default=0.01, help="success tolerance (default 0.01)")
    p.add_argument(
        "--selectors", nargs="+", choices=SELECTOR_KINDS,
        default=["oracle", "l1linf", "l1l2", "thresholded_l0"],
        help="selectors to score (default: oracle l1linf l1l2 thresholded_l0)",
    )
    p.add_argument("--audit", action="store_true", help="audit the necessary condition per exact recovery")
    p.add_argument("--no-pgm", dest="pgm", action="store_false",
                   help="skip the P2 graymap heatmaps (written by default)")
    _add_experiment_flags(p)
    p.set_defaults(handler=_cmd_phase)

    p = subs.add_parser("baseline", help="median program values on subspaces with no planted vector")
    p.add_argument("--n", type=int, default=100, help="ambient dimension (default 100)")
    p.add_argument("--kmin", type=int, default=2, help="smallest k (default 2)")
    p.add_argument("--kmax", type=int, default=16, help="largest k (default 16)")
    p.add_argument("--kstep", type=int, default=2, help="k stride (default 2)")
    p.add_argument(
        "--mode", choices=BASELINE_MODES, default="fixed_index",
        help="fixed_index: objective of the program pinning coordinate 0; "
        "min_ratio: best l1/linf score over all n programs",
    )
    _add_experiment_flags(p)
    p.set_defaults(handler=_cmd_baseline)

    p = subs.add_parser("scaling", help="fit the scaling exponents of the baseline medians")
    p.add_argument("--n-fixed", type=int, default=100, help="ambient dimension for the k sweep (default 100)")
    p.add_argument("--k-list", type=int, nargs="+", default=[2, 3, 4, 5, 6], help="k grid (default 2..6)")
    p.add_argument("--k-fixed", type=int, default=4, help="subspace dimension for the n sweep (default 4)")
    p.add_argument("--n-list", type=int, nargs="+", default=[64, 128, 256], help="n grid (default 64 128 256)")
    _add_experiment_flags(p)
    p.set_defaults(handler=_cmd_scaling)

    p = subs.add_parser("stability", help="median oracle error versus the noise scale")
    p.add_argument("--n", type=int, default=100, help="ambient dimension (default 100)")
    p.add_argument("--k", type=int, default=4, help="subspace dimension (default 4)")
    p.add_argument("--s", type=int, default=4, help="support size (default 4)")
    p.add_argument(
        "--deltas", type=float, nargs="+", default=[0.0, 1e-3, 1e-2, 1e-1],
        help="noise grid (default 0 0.001 0.01 0.1)",
    )
    p.add_argument("--tau", type=float, default=0.01, help="success tolerance (default 0.01)")
    _add_experiment_flags(p)
    p.set_defaults(handler=_cmd_stability)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    for flag in ("n", "k", "s", "trials"):
        value = getattr(args, flag, None)
        if value is not None and value < 1:
            parser.error(f"--{flag} must be >= 1, got {value}")
    for flag in ("delta", "epsilon", "tau"):
        value = getattr(args, flag, None)
        if value is not None and value < 0:
            parser.error(f"--{flag} must be nonnegative, got {value}")
    seed = getattr(args, "seed", 0)
    if seed is not None and not 0 <= seed < 1 << 64:
        parser.error(f"--seed must be a 64-bit unsigned integer, got {seed}")
    workers = getattr(args, "workers", None)
    if workers is not None and workers < 1:
        parser.error(f"--workers must be >= 1, got {workers}")

    try:
        return args.handler(parser, args)
    except (NumericalFailureError, SelectionError, FaceLimitError, np.linalg.LinAlgError) as exc:
        return _runtime_error(str(exc))
    except OSError as exc:
        return _runtime_error(f"{exc}")


if __name__ == "__main__":
    sys.exit(main())
