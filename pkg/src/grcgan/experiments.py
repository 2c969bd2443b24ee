"""Experiment manifests, presets, deterministic runners, and aggregation.

A :class:`RunManifest` pins everything a study needs: experiment id, model
variant, full training configuration, dataset recipe, one training seed per
repetition, and evaluation sizes.  Replaying the same manifest on the same
build reproduces every output file byte for byte (the training-log timing
column is measured wall clock and is exempt).

Runs are cached by manifest content: a repetition directory whose stored
manifest hash matches is trusted and not recomputed.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datasets import (
    CircularSpec,
    LabeledDataset,
    MvnSpec,
    circular_labels,
    default_gaps,
    make_mvn_params,
    sample_circular,
    sample_mvn,
)
from .gan import (
    ConditionEncoding,
    ExactFD,
    GanConfig,
    Ratio,
    SphereSurface,
    VanillaBCE,
    WassersteinGP,
    generate,
    train,
)
from .metrics import MvnReport, evaluate_circular, evaluate_mvn
from .nn import (
    circular_discriminator_spec,
    circular_generator_spec,
    load_checkpoint,
    mvn_discriminator_spec,
    mvn_generator_spec,
    save_checkpoint,
)
from .optim import AdamParams

MANIFEST_VERSION = 1

EXPERIMENTS = ("circular-full", "circular-partial", "mvn", "mvn-sweep")
CIRCULAR_VARIANTS = ("gr-exact", "gr-ratio", "degenerate", "no-interp")
MVN_VARIANTS = ("gr", "cgan")
SWEEP_DIMS_DEFAULT = (5, 8, 11, 15)

N_EVAL_ANGLES = 360
CIRC_SAMPLES_PER_LABEL = 100
MVN_EVAL_LABELS = 100
MVN_EVAL_SAMPLES = 250


def fmt_cell(v) -> str:
    """Deterministic CSV cell: repr for floats (shortest round-trip), str else."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, header: str, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(fmt_cell(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# Manifests


@dataclass
class RunManifest:
    experiment: str
    variant: str
    gan: GanConfig
    dataset: dict
    dataset_seed: int
    seeds: list[int]
    repetitions: int
    encoding: str
    eval_params: dict
    out: str

    def to_dict(self) -> dict:
        return {
            "version": MANIFEST_VERSION,
            "experiment": self.experiment,
            "variant": self.variant,
            "gan": self.gan.to_dict(),
            "dataset": self.dataset,
            "dataset_seed": self.dataset_seed,
            "seeds": list(self.seeds),
            "repetitions": self.repetitions,
            "encoding": self.encoding,
            "eval_params": self.eval_params,
            "out": str(self.out),
        }

    @staticmethod
    def from_dict(d: dict) -> "RunManifest":
        required = {
            "version",
            "experiment",
            "variant",
            "gan",
            "dataset",
            "dataset_seed",
            "seeds",
            "repetitions",
            "encoding",
            "eval_params",
            "out",
        }
        keys = set(d)
        if keys - required:
            raise ValueError(f"unknown manifest keys: {sorted(keys - required)}")
        if required - keys:
            raise ValueError(f"missing manifest keys: {sorted(required - keys)}")
        if d["version"] != MANIFEST_VERSION:
            raise ValueError(f"unsupported manifest version {d['version']}")
        return RunManifest(
            experiment=d["experiment"],
            variant=d["variant"],
            gan=GanConfig.from_dict(d["gan"]),
            dataset=d["dataset"],
            dataset_seed=d["dataset_seed"],
            seeds=list(d["seeds"]),
            repetitions=d["repetitions"],
            encoding=d["encoding"],
            eval_params=d["eval_params"],
            out=d["out"],
        )

    def content_hash(self) -> str:
        """Hash of everything except the output location."""
        d = self.to_dict()
        d.pop("out")
        blob = json.dumps(d, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    def save(self, path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def load(path) -> "RunManifest":
        with open(path) as fh:
            return RunManifest.from_dict(json.load(fh))

    def rep_dir(self, rep: int) -> Path:
        return Path(self.out) / self.experiment / self.variant / f"rep{rep:02d}"

    def experiment_dir(self) -> Path:
        return Path(self.out) / self.experiment


def _scaled_iterations(base: int, scale: float) -> int:
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    return max(1, round(base * scale))


def circular_gan_config(variant: str, seed: int, iterations: int = 6000) -> GanConfig:
    adam = AdamParams(lr=5e-5, beta1=0.5, beta2=0.999)
    # All circular presets train the generator on the non-saturating
    # adversarial term: at this scale the saturating form stalls the game in
    # a flat-discriminator regime with a visibly collapsed conditional
    # spread, while the non-saturating form holds the spread near the truth.
    base = dict(
        loss=VanillaBCE(),
        n_critic=1,
        batch=128,
        iterations=iterations,
        adam_g=adam,
        adam_d=adam,
        noise_dim=2,
        seed=seed,
        nonsaturating=True,
    )
    if variant == "gr-exact":
        return GanConfig(lam=0.02, reg_form=ExactFD(h=1e-3), **base)
    if variant == "gr-ratio":
        return GanConfig(
            lam=0.02,
            reg_form=Ratio(),
            perturbation=SphereSurface(0.1),
            tau1=math.inf,
            **base,
        )
    if variant == "degenerate":
        return GanConfig(lam=0.0, reg_form=ExactFD(h=1e-3), **base)
    if variant == "no-interp":
        return GanConfig(lam=0.02, reg_form=ExactFD(h=1e-3), interpolate=False, **base)
    raise ValueError(f"unknown circular variant {variant!r}")


def mvn_gan_config(variant: str, seed: int, out_dim: int, iterations: int = 50000) -> GanConfig:
    adam = AdamParams(lr=2e-5, beta1=0.5, beta2=0.9)
    base = dict(
        loss=WassersteinGP(gp_coeff=0.1, delta=1e-3),
        n_critic=1,
        batch=256,
        iterations=iterations,
        adam_g=adam,
        adam_d=adam,
        noise_dim=out_dim,
        seed=seed,
    )
    if variant == "gr":
        return GanConfig(
            lam=1.0,
            reg_form=Ratio(),
            perturbation=SphereSurface(0.1),
            tau1=math.inf,
            tau2=1e-6,
            **base,
        )
    if variant == "cgan":
        return GanConfig(lam=0.0, reg_form=Ratio(), perturbation=SphereSurface(0.1), **base)
    raise ValueError(f"unknown mvn variant {variant!r}")


def build_manifest(
    experiment: str,
    variant: str,
    out: str,
    seed: int = 0,
    repetitions: int = 3,
    scale: float = 1.0,
    mvn_p: int = 8,
) -> RunManifest:
    """Preset manifest for one (experiment, variant) study."""
    seeds = [seed + i for i in range(repetitions)]
    if experiment in ("circular-full", "circular-partial"):
        gaps = () if experiment == "circular-full" else default_gaps()
        spec = CircularSpec(gaps=gaps)
        return RunManifest(
            experiment=experiment,
            variant=variant,
            gan=circular_gan_config(variant, seed, _scaled_iterations(6000, scale)),
            dataset={"family": "circular", "spec": spec.to_dict()},
            dataset_seed=seed + 7919,
            seeds=seeds,
            repetitions=repetitions,
            encoding="sincos",
            eval_params={
                "labels": "full" if experiment == "circular-full" else "test",
                "n_eval_labels": N_EVAL_ANGLES,
                "n_per_label": CIRC_SAMPLES_PER_LABEL,
            },
            out=str(out),
        )
    if experiment == "mvn":
        k = mvn_p + 2
        return RunManifest(
            experiment=experiment,
            variant=variant,
            gan=mvn_gan_config(variant, seed, 2, _scaled_iterations(50000, scale)),
            dataset={"family": "mvn", "k": k, "p": mvn_p, "param_seed": 20210327, "n": 1000},
            dataset_seed=seed + 104729,
            seeds=seeds,
            repetitions=repetitions,
            encoding="raw",
            eval_params={"n_labels": MVN_EVAL_LABELS, "n_per_label": MVN_EVAL_SAMPLES},
            out=str(out),
        )
    raise ValueError(f"no preset for experiment {experiment!r}")


# ---------------------------------------------------------------------------
# Dataset materialization


def dataset_for_rep(manifest: RunManifest, rep: int) -> LabeledDataset:
    """Build the training set a repetition sees.

    Circular studies redraw the dataset per repetition; the multivariate
    study shares one dataset across repetitions and variants.
    """
    d = manifest.dataset
    if d["family"] == "circular":
        spec = CircularSpec.from_dict(d["spec"])
        labels, _ = circular_labels(spec)
        rng = np.random.default_rng(manifest.dataset_seed + rep)
        return sample_circular(spec, labels, rng)
    if d["family"] == "mvn":
        spec = make_mvn_params(d["k"], d["param_seed"], p=d["p"])
        rng = np.random.default_rng(manifest.dataset_seed)
        return sample_mvn(spec, d["n"], rng)
    raise ValueError(f"unknown dataset family {d['family']!r}")


def write_dataset_csv(ds: LabeledDataset, path) -> None:
    p = ds.conditions.shape[1]
    q = ds.outputs.shape[1]
    header = ",".join([f"x_{i + 1}" for i in range(p)] + [f"y_{i + 1}" for i in range(q)])
    rows = (
        tuple(ds.conditions[i]) + tuple(ds.outputs[i]) for i in range(len(ds))
    )
    write_csv(path, header, rows)
    meta = dict(ds.provenance)
    with open(Path(path).with_suffix(".manifest.json"), "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def network_specs(manifest: RunManifest):
    d = manifest.dataset
    if d["family"] == "circular":
        return circular_generator_spec(), circular_discriminator_spec()
    if d["family"] == "mvn":
        out_dim = d["k"] - d["p"]
        return mvn_generator_spec(d["p"], out_dim), mvn_discriminator_spec(d["p"], out_dim)
    raise ValueError(f"unknown dataset family {d['family']!r}")


# ---------------------------------------------------------------------------
# Single-repetition runner


def _eval_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, 1000003])


class _IncrementalLogWriter:
    """Streams training-log rows to disk as they are produced.

    A diverging run keeps whatever was flushed; a completed file matches
    ``TrainingLog.to_csv`` byte for byte.
    """

    def __init__(self, path, inner=None):
        self.fh = open(path, "w", newline="")
        self.fh.write("iter,d_loss,g_adv,g_reg,wall_ms\n")
        self.inner = inner

    def __call__(self, k, log):
        self.fh.write(
            f"{k},{log.d_loss[-1]!r},{log.g_adv[-1]!r},{log.g_reg[-1]!r},"
            f"{log.wall_ms[-1]:.3f}\n"
        )
        self.fh.flush()
        if self.inner is not None:
            self.inner(k, log)

    def close(self):
        self.fh.close()


def run_repetition(manifest: RunManifest, rep: int, progress=None, force: bool = False) -> Path:
    """Train and evaluate one repetition; reuse cached outputs when valid."""
    rep_dir = manifest.rep_dir(rep)
    stamp = rep_dir / "manifest.json"
    done = rep_dir / "report.csv"
    if not force and stamp.exists() and done.exists():
        stored = RunManifest.load(stamp)
        if stored.content_hash() == manifest.content_hash():
            return rep_dir

    rep_dir.mkdir(parents=True, exist_ok=True)
    ds = dataset_for_rep(manifest, rep)
    write_dataset_csv(ds, rep_dir / "dataset.csv")

    cfg = dataclasses.replace(manifest.gan, seed=manifest.seeds[rep])
    enc = ConditionEncoding(manifest.encoding)
    g_spec, d_spec = network_specs(manifest)
    log_writer = _IncrementalLogWriter(rep_dir / "train_log.csv", inner=progress)
    try:
        result = train(ds, g_spec, d_spec, cfg, enc, progress=log_writer)
    finally:
        log_writer.close()
    extra = {"config": cfg.to_dict(), "encoding": manifest.encoding, "rep": rep}
    save_checkpoint(rep_dir / "generator.npz", result.generator, result.rng_state, extra)
    save_checkpoint(rep_dir / "discriminator.npz", result.discriminator, result.rng_state, extra)

    evaluate_repetition(manifest, rep, result.generator)
    manifest.save(stamp)
    return rep_dir


def evaluate_repetition(manifest: RunManifest, rep: int, gen=None) -> None:
    """Write report + plot-data CSVs for one repetition's checkpoint."""
    rep_dir = manifest.rep_dir(rep)
    if gen is None:
        gen, _, _ = load_checkpoint(rep_dir / "generator.npz")
    enc = ConditionEncoding(manifest.encoding)
    rng = _eval_rng(manifest.seeds[rep])
    d = manifest.dataset

    if d["family"] == "circular":
        spec = CircularSpec.from_dict(d["spec"])
        train_labels, test_labels = circular_labels(spec)
        if manifest.eval_params["labels"] == "full":
            eval_labels = 2.0 * math.pi * np.arange(manifest.eval_params["n_eval_labels"]) / (
                manifest.eval_params["n_eval_labels"]
            )
        else:
            eval_labels = test_labels
        n_per = manifest.eval_params["n_per_label"]
        report = evaluate_circular(
            gen, enc, eval_labels, spec, rng, n_per, manifest.gan.noise_dim
        )
        report.to_csv(rep_dir / "report.csv")

        sample_rng = _eval_rng(manifest.seeds[rep] + 500009)
        sample_rows = []
        for label in eval_labels:
            pts = generate(gen, np.array([label]), n_per, enc, sample_rng, manifest.gan.noise_dim)
            for row in pts:
                sample_rows.append((float(label), float(row[0]), float(row[1])))
        write_csv(rep_dir / "samples.csv", "label,y_1,y_2", sample_rows)
        write_csv(
            rep_dir / "circles.csv",
            "label,center_1,center_2,radius",
            (
                (float(a), float(spec.mean_at(float(a))[0]), float(spec.mean_at(float(a))[1]), spec.hq_threshold)
                for a in eval_labels
            ),
        )
        write_csv(
            rep_dir / "labels.csv",
            "angle,kind",
            [(float(a), "train") for a in train_labels]
            + [(float(a), "test") for a in test_labels],
        )
        return

    if d["family"] == "mvn":
        spec = make_mvn_params(d["k"], d["param_seed"], p=d["p"])
        report = evaluate_mvn(
            gen,
            spec,
            rng,
            n_labels=manifest.eval_params["n_labels"],
            n_per_label=manifest.eval_params["n_per_label"],
            encoding=enc,
        )
        report.to_csv(rep_dir / "report.csv")
        _write_mvn_panels(manifest, rep_dir, gen, spec, enc)
        return
    raise ValueError(f"unknown dataset family {d['family']!r}")


def _write_mvn_panels(manifest, rep_dir, gen, spec: MvnSpec, enc) -> None:
    """Sample dumps at mu +/- {0, .25, .5} sigma for side-by-side plots."""
    from .datasets import true_conditional

    rng = _eval_rng(manifest.seeds[0] + 900001)
    sigma_x = np.sqrt(np.diag(spec.sigma)[: spec.p])
    rows = []
    for c in (-0.5, -0.25, 0.0, 0.25, 0.5):
        x = spec.mu[: spec.p] + c * sigma_x
        fakes = generate(gen, x, MVN_EVAL_SAMPLES, enc, rng, spec.out_dim)
        truths = true_conditional(spec, x).sample(MVN_EVAL_SAMPLES, rng)
        for r in fakes:
            rows.append((c, "fake") + tuple(float(v) for v in r))
        for r in truths:
            rows.append((c, "true") + tuple(float(v) for v in r))
    q = spec.out_dim
    header = "offset,kind," + ",".join(f"y_{i + 1}" for i in range(q))
    write_csv(rep_dir / "panels.csv", header, rows)


# ---------------------------------------------------------------------------
# Reading results back


def read_report_summary(path) -> dict:
    """Summary row of a report CSV as {column: value}."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        last = None
        for line in fh:
            if line.strip():
                last = line.strip().split(",")
    if last is None or last[0] != "summary":
        raise ValueError(f"no summary row in {path}")
    return {k: (v if k in ("label", "label_index") else float(v)) for k, v in zip(header, last)}


def circular_summary(manifest: RunManifest, rep: int) -> dict:
    s = read_report_summary(manifest.rep_dir(rep) / "report.csv")
    return {
        "pct_high_quality": 100.0 * s["hq_frac"],
        "pct_recovered": 100.0 * s["recovered"],
        "mean_w2": s["w2"],
    }


def mvn_summary(manifest: RunManifest, rep: int) -> dict:
    s = read_report_summary(manifest.rep_dir(rep) / "report.csv")
    return {"mean_w2_fitted": s["w2_fitted"], "mean_w2_exact": s["w2_exact"]}


# ---------------------------------------------------------------------------
# Full-study drivers


def run_study(manifest: RunManifest, progress=None) -> list[dict]:
    """All repetitions of one (experiment, variant) manifest; returns summaries."""
    summaries = []
    for rep in range(manifest.repetitions):
        run_repetition(manifest, rep, progress=progress)
        if manifest.dataset["family"] == "circular":
            summaries.append(circular_summary(manifest, rep))
        else:
            summaries.append(mvn_summary(manifest, rep))
    study_dir = Path(manifest.out) / manifest.experiment / manifest.variant
    with open(study_dir / "aggregate_manifest.json", "w") as fh:
        json.dump(
            {
                "experiment": manifest.experiment,
                "variant": manifest.variant,
                "config_hash": manifest.content_hash(),
                "seeds": list(manifest.seeds),
                "repetitions": manifest.repetitions,
                "summaries": summaries,
            },
            fh,
            indent=1,
            sort_keys=True,
        )
        fh.write("\n")
    return summaries


def aggregate_rows(variant: str, summaries: list[dict]) -> list[tuple]:
    rows = [
        (variant, str(rep)) + tuple(float(s[k]) for k in sorted(s))
        for rep, s in enumerate(summaries)
    ]
    keys = sorted(summaries[0])
    mean_row = (variant, "mean") + tuple(
        float(np.mean([s[k] for s in summaries])) for k in keys
    )
    return rows + [mean_row]


def reproduce(
    experiment: str,
    out: str,
    seed: int = 0,
    repetitions: int = 3,
    scale: float = 1.0,
    check: bool = False,
    variants: tuple[str, ...] | None = None,
    sweep_dims: tuple[int, ...] = SWEEP_DIMS_DEFAULT,
    progress=None,
    echo=print,
) -> int:
    """One-command pipeline: data, training, evaluation, aggregate table.

    Returns 0, or 2 when ``check`` is set and a target band is missed.
    """
    t_start = time.perf_counter()
    if experiment == "mvn-sweep":
        rc = 0
        all_rows = []
        for p in sweep_dims:
            sub_out = str(Path(out) / "mvn-sweep" / f"p{p:02d}")
            per_variant = {}
            for variant in MVN_VARIANTS:
                m = build_manifest("mvn", variant, sub_out, seed, repetitions, scale, mvn_p=p)
                echo(f"[mvn-sweep p={p}] {variant}: {m.repetitions} reps x {m.gan.iterations} iters")
                per_variant[variant] = run_study(m, progress=progress)
            for variant, summaries in per_variant.items():
                for rep, s in enumerate(summaries):
                    all_rows.append((p, variant, str(rep), s["mean_w2_fitted"], s["mean_w2_exact"]))
                all_rows.append(
                    (
                        p,
                        variant,
                        "mean",
                        float(np.mean([s["mean_w2_fitted"] for s in summaries])),
                        float(np.mean([s["mean_w2_exact"] for s in summaries])),
                    )
                )
            if check:
                gr = np.mean([s["mean_w2_fitted"] for s in per_variant["gr"]])
                cg = np.mean([s["mean_w2_fitted"] for s in per_variant["cgan"]])
                ok = gr <= cg
                echo(f"[check] p={p}: regularized W2 {gr:.4f} <= plain W2 {cg:.4f}: "
                     f"{'PASS' if ok else 'FAIL'}")
                rc = rc or (0 if ok else 2)
        write_csv(
            Path(out) / "mvn-sweep" / "aggregate.csv",
            "p,variant,rep,mean_w2_fitted,mean_w2_exact",
            all_rows,
        )
        echo(f"[done] wall clock {time.perf_counter() - t_start:.1f}s")
        return rc

    if experiment in ("circular-full", "circular-partial"):
        chosen = variants or CIRCULAR_VARIANTS
    elif experiment == "mvn":
        chosen = variants or MVN_VARIANTS
    else:
        raise ValueError(f"unknown experiment {experiment!r}")

    per_variant: dict[str, list[dict]] = {}
    for variant in chosen:
        m = build_manifest(experiment, variant, out, seed, repetitions, scale)
        echo(f"[{experiment}] {variant}: {m.repetitions} reps x {m.gan.iterations} iters")
        per_variant[variant] = run_study(m, progress=progress)

    rows = []
    for variant, summaries in per_variant.items():
        rows.extend(aggregate_rows(variant, summaries))
    if experiment == "mvn":
        header = "variant,rep,mean_w2_exact,mean_w2_fitted"
    else:
        header = "variant,rep,mean_w2,pct_high_quality,pct_recovered"
    agg_path = Path(out) / experiment / "aggregate.csv"
    write_csv(agg_path, header, rows)
    echo(f"[done] aggregate written to {agg_path}")

    rc = 0
    if check:
        rc = check_experiment(experiment, per_variant, echo=echo)
    echo(f"[done] wall clock {time.perf_counter() - t_start:.1f}s")
    return rc


def check_experiment(experiment: str, per_variant: dict[str, list[dict]], echo=print) -> int:
    """Assert the reproduction bands; returns 0 or 2."""
    rc = 0

    def report(name: str, ok: bool, detail: str) -> None:
        nonlocal rc
        echo(f"[check] {name}: {detail}: {'PASS' if ok else 'FAIL'}")
        if not ok:
            rc = 2

    if experiment == "circular-full":
        gr = per_variant.get("gr-exact")
        if not gr:
            raise ValueError("check requires the gr-exact variant")
        rec = np.mean([s["pct_recovered"] for s in gr])
        hq = np.mean([s["pct_high_quality"] for s in gr])
        w2 = np.mean([s["mean_w2"] for s in gr])
        report("recovered modes", rec == 100.0, f"{rec:.2f} == 100")
        report("high quality", hq >= 88.0, f"{hq:.2f} >= 88")
        report("mean W2", w2 <= 0.05, f"{w2:.4f} <= 0.05")
    elif experiment == "circular-partial":
        gr = per_variant.get("gr-exact")
        deg = per_variant.get("degenerate")
        if not gr or not deg:
            raise ValueError("check requires gr-exact and degenerate variants")
        rec = np.mean([s["pct_recovered"] for s in gr])
        w2 = np.mean([s["mean_w2"] for s in gr])
        wins = sum(
            1 for g, d in zip(gr, deg) if d["mean_w2"] > g["mean_w2"]
        )
        report("recovered modes (test labels)", rec == 100.0, f"{rec:.2f} == 100")
        report("mean W2 (test labels)", w2 <= 0.06, f"{w2:.4f} <= 0.06")
        report(
            "regularized beats plain",
            wins >= 2,
            f"wins {wins}/{len(gr)} repetitions (need >= 2)",
        )
    elif experiment == "mvn":
        gr = np.mean([s["mean_w2_fitted"] for s in per_variant["gr"]])
        cg = np.mean([s["mean_w2_fitted"] for s in per_variant["cgan"]])
        report("regularized < plain", gr < cg, f"{gr:.4f} < {cg:.4f}")
    else:
        raise ValueError(f"no checks defined for {experiment!r}")
    return rc
