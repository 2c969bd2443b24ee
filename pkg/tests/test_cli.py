import json
from pathlib import Path

import numpy as np
import pytest

from grcgan.cli import main
from grcgan.experiments import build_manifest


def run_cli(*args) -> int:
    return main(list(args))


def test_gen_data_circular_full(tmp_path, capsys):
    rc = run_cli("gen-data", "circular-full", "--out", str(tmp_path), "--reps", "1")
    assert rc == 0
    csv = tmp_path / "circular-full" / "dataset-rep00.csv"
    lines = csv.read_text().strip().split("\n")
    assert len(lines) == 1201
    assert lines[0] == "x_1,y_1,y_2"


def test_gen_data_partial_avoids_gaps(tmp_path):
    rc = run_cli("gen-data", "circular-partial", "--out", str(tmp_path), "--reps", "1")
    assert rc == 0
    csv = tmp_path / "circular-partial" / "dataset-rep00.csv"
    rows = csv.read_text().strip().split("\n")[1:]
    assert len(rows) == 1200
    from grcgan.datasets import default_gaps

    xs = np.array([float(r.split(",")[0]) for r in rows])
    for lo, hi in default_gaps():
        assert not ((xs > lo) & (xs < hi)).any()


def test_gen_data_mvn_columns(tmp_path):
    rc = run_cli("gen-data", "mvn", "--out", str(tmp_path), "--reps", "1")
    assert rc == 0
    csv = tmp_path / "mvn" / "dataset-rep00.csv"
    lines = csv.read_text().strip().split("\n")
    assert len(lines) == 1001
    assert lines[0].split(",") == [f"x_{i}" for i in range(1, 9)] + ["y_1", "y_2"]


def test_train_and_eval_smoke(tmp_path):
    # A single tiny repetition through the real pipeline.
    rc = run_cli(
        "train", "circular-full", "--variant", "gr-exact", "--out", str(tmp_path),
        "--reps", "1", "--scale", "0.002",
    )
    assert rc == 0
    rep_dir = tmp_path / "circular-full" / "gr-exact" / "rep00"
    assert (rep_dir / "generator.npz").exists()
    log_lines = (rep_dir / "train_log.csv").read_text().strip().split("\n")
    assert log_lines[0] == "iter,d_loss,g_adv,g_reg,wall_ms"
    assert len(log_lines) == 13  # 6000 * 0.002 = 12 iterations + header

    rc = run_cli(
        "eval", "circular-full", "--variant", "gr-exact", "--out", str(tmp_path),
        "--reps", "1", "--scale", "0.002",
    )
    assert rc == 0
    assert (rep_dir / "report.csv").exists()


def test_train_writes_expected_log_row_count(tmp_path):
    rc = run_cli(
        "train", "circular-full", "--variant", "degenerate", "--out", str(tmp_path),
        "--reps", "1", "--scale", "0.001",
    )
    assert rc == 0
    rep_dir = tmp_path / "circular-full" / "degenerate" / "rep00"
    rows = (rep_dir / "train_log.csv").read_text().strip().split("\n")[1:]
    assert len(rows) == 6


def test_config_replay_reproduces_byte_identical(tmp_path):
    manifest = build_manifest(
        "circular-full", "gr-exact", str(tmp_path / "a"), seed=0, repetitions=1,
        scale=0.002,
    )
    manifest.eval_params["n_eval_labels"] = 8
    manifest.eval_params["n_per_label"] = 10
    cfg_path = tmp_path / "manifest.json"
    manifest.save(cfg_path)

    rc = run_cli("train", "circular-full", "--config", str(cfg_path))
    assert rc == 0
    rep = Path(manifest.out) / "circular-full" / "gr-exact" / "rep00"
    files = ["dataset.csv", "report.csv", "samples.csv", "train_log.csv"]
    first = {f: (rep / f).read_bytes() for f in files}

    # Replay into a different location; every CSV must match byte for byte,
    # except the wall-clock column of the training log.
    manifest.out = str(tmp_path / "b")
    cfg2 = tmp_path / "manifest2.json"
    manifest.save(cfg2)
    rc = run_cli("train", "circular-full", "--config", str(cfg2))
    assert rc == 0
    rep2 = Path(manifest.out) / "circular-full" / "gr-exact" / "rep00"
    for f in ["dataset.csv", "report.csv", "samples.csv"]:
        assert (rep2 / f).read_bytes() == first[f], f

    def strip_wall(text: bytes) -> list[str]:
        return [",".join(line.split(",")[:4]) for line in text.decode().splitlines()]

    assert strip_wall((rep2 / "train_log.csv").read_bytes()) == strip_wall(
        first["train_log.csv"]
    )


def test_unknown_config_key_is_error(tmp_path):
    manifest = build_manifest("circular-full", "gr-exact", str(tmp_path))
    d = manifest.to_dict()
    d["surprise"] = True
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(d))
    rc = run_cli("train", "circular-full", "--config", str(cfg))
    assert rc == 1


def test_bad_experiment_name_exits_one(capsys):
    rc = run_cli("gen-data", "circular-bogus")
    assert rc == 1


def test_gradcheck_passes(capsys):
    rc = run_cli("gradcheck")
    assert rc == 0
    out = capsys.readouterr().out
    assert "0 failures" in out


def test_reproduce_smoke_mode(tmp_path, capsys):
    # Scaled-down end-to-end pipeline across all variants of one experiment.
    rc = run_cli(
        "reproduce", "circular-full", "--out", str(tmp_path), "--reps", "1",
        "--scale", "0.002",
    )
    assert rc == 0
    agg = tmp_path / "circular-full" / "aggregate.csv"
    lines = agg.read_text().strip().split("\n")
    assert lines[0] == "variant,rep,mean_w2,pct_high_quality,pct_recovered"
    variants = {line.split(",")[0] for line in lines[1:]}
    assert variants == {"gr-exact", "gr-ratio", "degenerate", "no-interp"}
    # Two rows per variant: rep 0 and the mean row.
    assert len(lines) == 1 + 4 * 2


def test_aggregate_matches_per_repetition_reports(tmp_path):
    # The aggregate table must equal a recomputation from the report files.
    rc = run_cli(
        "reproduce", "circular-full", "--out", str(tmp_path), "--reps", "2",
        "--scale", "0.002", "--variants", "gr-exact,degenerate",
    )
    assert rc == 0
    from grcgan.experiments import read_report_summary

    agg_lines = (tmp_path / "circular-full" / "aggregate.csv").read_text().strip().split("\n")
    header = agg_lines[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in agg_lines[1:]]
    for row in rows:
        if row["rep"] == "mean":
            continue
        rep_dir = tmp_path / "circular-full" / row["variant"] / f"rep{int(row['rep']):02d}"
        summary = read_report_summary(rep_dir / "report.csv")
        assert float(row["mean_w2"]) == summary["w2"]
        assert float(row["pct_high_quality"]) == 100.0 * summary["hq_frac"]
        assert float(row["pct_recovered"]) == 100.0 * summary["recovered"]
    for variant in ("gr-exact", "degenerate"):
        reps = [r for r in rows if r["variant"] == variant and r["rep"] != "mean"]
        mean_row = next(r for r in rows if r["variant"] == variant and r["rep"] == "mean")
        for col in ("mean_w2", "pct_high_quality", "pct_recovered"):
            recomputed = np.mean([float(r[col]) for r in reps])
            assert abs(float(mean_row[col]) - recomputed) < 1e-12
