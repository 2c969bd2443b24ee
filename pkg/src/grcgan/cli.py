"""Command-line front end: dataset generation, training, evaluation,
one-command reproduction of the synthetic studies, and gradient checks.

Exit codes: 0 success, 1 error, 2 acceptance-band miss under
``reproduce --check``.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .experiments import (
    CIRCULAR_VARIANTS,
    EXPERIMENTS,
    MVN_VARIANTS,
    RunManifest,
    SWEEP_DIMS_DEFAULT,
    build_manifest,
    dataset_for_rep,
    evaluate_repetition,
    reproduce,
    run_repetition,
    write_dataset_csv,
)
from .gan.train import TrainingDiverged


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _variants_for(experiment: str) -> tuple[str, ...]:
    if experiment in ("circular-full", "circular-partial"):
        return CIRCULAR_VARIANTS
    return MVN_VARIANTS


def _resolve_manifest(args) -> RunManifest:
    if args.config:
        manifest = RunManifest.load(args.config)
        if args.out is not None:
            manifest.out = str(args.out)
        return manifest
    variant = args.variant or _variants_for(args.experiment)[0]
    return build_manifest(
        args.experiment,
        variant,
        str(args.out if args.out is not None else Path("runs")),
        seed=args.seed,
        repetitions=args.reps,
        scale=args.scale,
    )


def _progress_printer(total: int, tag: str):
    stride = max(1, total // 10)

    def progress(k, log):
        if (k + 1) % stride == 0 or k + 1 == total:
            print(
                f"  [{tag}] iter {k + 1}/{total} "
                f"d={log.d_loss[-1]:.4f} g={log.g_adv[-1]:.4f} reg={log.g_reg[-1]:.4f}",
                flush=True,
            )

    return progress


def _add_common(p: argparse.ArgumentParser, need_experiment: bool = True) -> None:
    if need_experiment:
        p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", type=Path, default=None, help="manifest JSON to replay")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--scale", type=float, default=1.0, help="iteration budget multiplier")


def main(argv=None) -> int:
    parser = _Parser(prog="grcgan")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen-data", help="write dataset CSVs + regeneration manifests")
    _add_common(p_gen)
    p_gen.add_argument("--variant", default=None)

    p_train = sub.add_parser("train", help="train checkpoints for one variant")
    _add_common(p_train)
    p_train.add_argument("--variant", default=None)

    p_eval = sub.add_parser("eval", help="evaluate existing checkpoints")
    _add_common(p_eval)
    p_eval.add_argument("--variant", default=None)

    p_rep = sub.add_parser("reproduce", help="full pipeline incl. all model variants")
    _add_common(p_rep)
    p_rep.add_argument("--check", action="store_true", help="exit 2 if targets are missed")
    p_rep.add_argument(
        "--dims",
        default=",".join(str(d) for d in SWEEP_DIMS_DEFAULT),
        help="comma-separated condition dims for mvn-sweep",
    )
    p_rep.add_argument("--variants", default=None, help="comma-separated variant subset")

    p_grad = sub.add_parser("gradcheck", help="finite-difference checks of all gradients")
    p_grad.add_argument("--seed", type=int, default=0)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        if args.command == "gradcheck":
            return _cmd_gradcheck(args.seed)
        if args.command == "gen-data":
            return _cmd_gen_data(args)
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "reproduce":
            dims = tuple(int(d) for d in str(args.dims).split(","))
            variants = tuple(args.variants.split(",")) if args.variants else None
            return reproduce(
                args.experiment,
                str(args.out if args.out is not None else Path("runs")),
                seed=args.seed,
                repetitions=args.reps,
                scale=args.scale,
                check=args.check,
                variants=variants,
                sweep_dims=dims,
                progress=None,
            )
        raise ValueError(f"unknown command {args.command!r}")
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"snapshot: {exc.snapshot}", file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_gen_data(args) -> int:
    manifest = _resolve_manifest(args)
    for rep in range(manifest.repetitions):
        ds = dataset_for_rep(manifest, rep)
        path = Path(manifest.out) / manifest.experiment / f"dataset-rep{rep:02d}.csv"
        write_dataset_csv(ds, path)
        print(f"wrote {path} ({len(ds)} rows)")
    return 0


def _cmd_train(args) -> int:
    manifest = _resolve_manifest(args)
    total = manifest.gan.iterations
    for rep in range(manifest.repetitions):
        t0 = time.perf_counter()
        rep_dir = run_repetition(
            manifest,
            rep,
            progress=_progress_printer(total, f"{manifest.variant} rep{rep}"),
        )
        print(f"rep {rep}: {rep_dir} ({time.perf_counter() - t0:.1f}s)")
    return 0


def _cmd_eval(args) -> int:
    manifest = _resolve_manifest(args)
    for rep in range(manifest.repetitions):
        evaluate_repetition(manifest, rep)
        print(f"rep {rep}: report at {manifest.rep_dir(rep) / 'report.csv'}")
    return 0


def _cmd_gradcheck(seed: int) -> int:
    from .gradcheck import layer_check_suite
    from .penalty_checks import penalty_check_suite

    t0 = time.perf_counter()
    results = layer_check_suite(seed) + penalty_check_suite(seed)
    failures = 0
    for r in results:
        status = "ok" if r.passed else "FAIL"
        print(f"{r.name:40s} rel_err={r.rel_error:.3e} tol={r.tolerance:.0e} {status}")
        failures += 0 if r.passed else 1
    print(f"{len(results)} checks, {failures} failures, {time.perf_counter() - t0:.1f}s")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
