import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from sehp.cascades import Cascade, read_cascades, write_cascades
from sehp.cli import FIT_HEADER, horizon_grid_seconds, main

HOUR = 3600.0


def run(*argv):
    return main([str(a) for a in argv])


def write(path, cascades):
    with open(path, "w", encoding="utf-8") as fh:
        write_cascades(cascades, fh)
    return path


@pytest.fixture
def corpus(tmp_path):
    out = tmp_path / "corpus.jsonl"
    assert run("simulate", "--v", 0.02, "--alpha", 1.6e-4, "--beta", 2e-4,
               "--horizon", 48 * HOUR, "--count", 6, "--seed", 7, "--out", out) == 0
    return out


def test_simulate_writes_corpus_and_truth(tmp_path):
    out = tmp_path / "c.jsonl"
    assert run("simulate", "--v", 5, "--alpha", 0.8, "--beta", 1.0, "--horizon", 172800,
               "--count", 20, "--seed", 7, "--out", out) == 0
    assert len(read_cascades(out)) == 20
    truth = [json.loads(x) for x in (tmp_path / "c.jsonl.truth.jsonl").read_text().splitlines()]
    assert truth == [{"v": 5.0, "alpha": 0.8, "beta": 1.0, "seed_range": [7, 26]}]


def test_simulate_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for p in (a, b):
        run("simulate", "--v", 5, "--alpha", 0.8, "--beta", 1.0, "--horizon", 100, "--count", 5, "--out", p)
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.jsonl.truth.jsonl").read_bytes() == (tmp_path / "b.jsonl.truth.jsonl").read_bytes()


def test_negative_alpha_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        run("simulate", "--v", 5, "--alpha", -1, "--beta", 1, "--horizon", 10, "--out", tmp_path / "x")
    assert info.value.code == 1


def test_unknown_flag_rejected(tmp_path):
    with pytest.raises(SystemExit) as info:
        run("filter", "--in", tmp_path / "x", "--bogus")
    assert info.value.code == 1


@pytest.mark.parametrize("cmd", ["simulate", "filter", "fit", "predict", "evaluate"])
def test_help(cmd, capsys):
    with pytest.raises(SystemExit) as info:
        run(cmd, "--help")
    assert info.value.code == 0
    assert "usage" in capsys.readouterr().out


def test_fit_header_and_unfittable_row(tmp_path):
    src = write(tmp_path / "in.jsonl", [
        Cascade("empty", [], 10.0),
        Cascade("one", [5.0], 10.0),
    ])
    out = tmp_path / "params.csv"
    assert run("fit", "--in", src, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "id,v,alpha,beta,log_likelihood,gradient_norm,iterations,converged,status"
    rows = list(csv.DictReader(out.open()))
    assert rows[0]["status"] == "unfittable" and rows[0]["v"] == ""
    assert rows[1]["status"] == "ok" and rows[1]["converged"] == "true"


def test_fit_empty_input(tmp_path, capsys):
    src = tmp_path / "empty.jsonl"
    src.write_text("")
    assert run("fit", "--in", src) == 2
    assert "no cascades" in capsys.readouterr().err


def test_fit_train_t_truncates(tmp_path, corpus):
    out = tmp_path / "p.csv"
    assert run("fit", "--in", corpus, "--train-t", 21600, "--out", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["id"] for r in rows] == [c.id for c in read_cascades(corpus)]
    assert all(r["status"] == "ok" for r in rows)


def test_fit_parallel_matches_serial(tmp_path, corpus):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run("fit", "--in", corpus, "--train-t", 21600, "--out", a)
    run("fit", "--in", corpus, "--train-t", 21600, "--out", b, "--jobs", 3)
    assert a.read_bytes() == b.read_bytes()


def test_horizon_grid():
    np.testing.assert_array_equal(horizon_grid_seconds(1, 42, 1), HOUR * np.arange(1, 43))
    assert horizon_grid_seconds(0, 0, 1).tolist() == [0.0]


def test_predict_rows_and_boundary(tmp_path, corpus):
    params = tmp_path / "p.csv"
    run("fit", "--in", corpus, "--train-t", 21600, "--out", params)
    pred = tmp_path / "pred.csv"
    assert run("predict", "--params", params, "--in", corpus, "--train-t", 21600,
               "--from-h", 0, "--to-h", 42, "--step-h", 1, "--out", pred) == 0
    rows = list(csv.DictReader(pred.open()))
    cascades = {c.id: c for c in read_cascades(corpus)}
    assert len(rows) == 43 * len(cascades)
    for r in rows:
        if float(r["horizon_seconds"]) == 0.0:
            assert float(r["predicted_count"]) == cascades[r["id"]].count_until(21600)


def test_predict_missing_cascade_and_params(tmp_path):
    params = tmp_path / "p.csv"
    params.write_text(",".join(FIT_HEADER) + "\nghost,1.0,0.5,1.0,-1.0,0.0,3,true,ok\n")
    src = write(tmp_path / "in.jsonl", [Cascade("other", [1.0], 5.0)])
    pred = tmp_path / "pred.csv"
    assert run("predict", "--params", params, "--in", src, "--to-h", 2, "--out", pred) == 0
    rows = list(csv.DictReader(pred.open()))
    assert len(rows) == 2
    assert {r["status"] for r in rows} == {"missing_cascade"}
    assert run("predict", "--params", tmp_path / "nope.csv", "--in", src) == 2


def write_oracle_predictions(path, cascades, train_t, offsets):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "horizon_seconds", "predicted_count", "status"])
        for c in cascades:
            for h in offsets:
                w.writerow([c.id, repr(h), repr(float(c.count_until(train_t + h))), "ok"])


def test_evaluate_oracle_predictions(tmp_path, corpus):
    cascades = read_cascades(corpus)
    offsets = [HOUR * k for k in range(1, 43)]
    pred = tmp_path / "pred.csv"
    write_oracle_predictions(pred, cascades, 21600.0, offsets)
    out = tmp_path / "m.jsonl"
    assert run("evaluate", "--predictions", pred, "--in", corpus, "--train-t", 21600, "--out", out) == 0
    reports = [json.loads(x) for x in out.read_text().splitlines()]
    assert len(reports) == 42
    for rep in reports:
        assert rep["mape"] == 0.0 and rep["accuracy"] == 1.0
        assert set(rep) == {"horizon_seconds", "mape", "accuracy", "n_items", "n_skipped"}


def test_evaluate_epsilon_zero_flagged(tmp_path, corpus, capsys):
    cascades = read_cascades(corpus)
    pred = tmp_path / "pred.csv"
    with open(pred, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "horizon_seconds", "predicted_count", "status"])
        for i, c in enumerate(cascades):
            actual = c.count_until(21600.0 + HOUR)
            w.writerow([c.id, repr(HOUR), repr(float(actual + (i % 2))), "ok"])
    out = tmp_path / "m.jsonl"
    assert run("evaluate", "--predictions", pred, "--in", corpus, "--train-t", 21600,
               "--epsilon", 0, "--out", out) == 0
    (rep,) = [json.loads(x) for x in out.read_text().splitlines()]
    assert rep["accuracy"] == 0.5
    assert rep["degenerate_epsilon"] is True
    assert "epsilon 0" in capsys.readouterr().err


def test_evaluate_default_epsilon(tmp_path, corpus):
    cascades = read_cascades(corpus)
    pred = tmp_path / "pred.csv"
    with open(pred, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "horizon_seconds", "predicted_count", "status"])
        for c in cascades:
            w.writerow([c.id, repr(HOUR), repr(1.2 * c.count_until(21600.0 + HOUR)), "ok"])
    out = tmp_path / "m.jsonl"
    run("evaluate", "--predictions", pred, "--in", corpus, "--train-t", 21600, "--out", out)
    (rep,) = [json.loads(x) for x in out.read_text().splitlines()]
    assert rep["accuracy"] == 1.0
    assert rep["mape"] == pytest.approx(0.2)


def test_evaluate_flags_horizon_without_items(tmp_path):
    src = write(tmp_path / "in.jsonl", [Cascade("a", [], 100.0)])
    pred = tmp_path / "pred.csv"
    pred.write_text("id,horizon_seconds,predicted_count,status\na,10.0,1.5,ok\n")
    out = tmp_path / "m.jsonl"
    assert run("evaluate", "--predictions", pred, "--in", src, "--train-t", 50, "--out", out) == 0
    (rep,) = [json.loads(x) for x in out.read_text().splitlines()]
    assert rep["n_items"] == 0 and rep["n_skipped"] == 1 and "error" in rep


def test_filter_defaults_and_counts(tmp_path, capsys):
    early = np.linspace(1.0, 3000.0, 11)
    late = np.linspace(4000.0, 100000.0, 95)
    keep = Cascade("keep", np.concatenate([early, late]), 172800.0)
    drop = Cascade("drop", early[:10], 172800.0)
    src = write(tmp_path / "in.jsonl", [keep, drop])
    src.write_text(src.read_text() + "garbage\n")
    out = tmp_path / "out.jsonl"
    assert run("filter", "--in", src, "--out", out) == 0
    assert read_cascades(out) == [keep]
    err = capsys.readouterr().err
    assert "kept=1 dropped=1" in err
    assert "line 3" in err


def test_filter_all_dropped(tmp_path, capsys):
    src = write(tmp_path / "in.jsonl", [Cascade("a", [1.0], 10.0), Cascade("b", [], 10.0)])
    out = tmp_path / "out.jsonl"
    assert run("filter", "--in", src, "--out", out) == 0
    assert out.read_text() == ""
    assert "kept=0 dropped=2" in capsys.readouterr().err


def test_filter_pass_through(tmp_path):
    cascades = [Cascade("a", [0.0, 1.0], 10.0), Cascade("b", [0.5, 2.0, 3.0], 10.0)]
    src = write(tmp_path / "in.jsonl", cascades)
    out = tmp_path / "out.jsonl"
    run("filter", "--in", src, "--out", out, "--min-early", 0, "--early-window-s", 5,
        "--min-total", 1, "--total-window-s", 10)
    assert out.read_bytes() == src.read_bytes()


def test_inputs_not_mutated(tmp_path, corpus):
    before = corpus.read_bytes()
    params = tmp_path / "p.csv"
    run("filter", "--in", corpus, "--out", tmp_path / "f.jsonl")
    run("fit", "--in", corpus, "--train-t", 21600, "--out", params)
    run("predict", "--params", params, "--in", corpus, "--train-t", 21600, "--out", tmp_path / "x.csv")
    assert corpus.read_bytes() == before


def test_console_entry_point_exit_codes(tmp_path):
    exe = [sys.executable, "-m", "sehp.cli"]
    assert subprocess.run(exe + ["--help"], capture_output=True).returncode == 0
    assert subprocess.run(exe, capture_output=True).returncode == 1
    assert subprocess.run(exe + ["fit", "--in", str(tmp_path / "missing.jsonl")], capture_output=True).returncode == 2
