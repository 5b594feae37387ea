import csv
import json
import math

import pytest

from gcruin import cli

MAX_MODEL = json.dumps({
    "algebra": {"kind": "max"},
    "claim_law": {"family": "uniform", "a": 0.0, "b": 1.0},
    "premium_law": {"family": "uniform", "a": 0.0, "b": 2.0},
})

ALPHA_MODEL = json.dumps({
    "algebra": {"kind": "alpha_stable", "alpha": 1.0},
    "claim_law": {"family": "lom_alpha", "gamma": 1.0, "alpha": 1.0},
    "premium_law": {"family": "lom_alpha", "gamma": 1.0, "alpha": 1.0},
    "beta": 2.0,
})

KENDALL_MODEL = json.dumps({
    "algebra": {"kind": "kendall", "alpha": 1.0},
    "claim_law": {"family": "lom_kendall", "c": 1.0, "alpha": 1.0},
    "premium_law": {"family": "lom_kendall", "c": 1.0, "alpha": 1.0},
    "u": 1.0, "lambda": 2.0,
})


def read_csv(path):
    with path.open() as fh:
        return list(csv.reader(fh))


def test_sample_writes_csv_and_meta(tmp_path):
    rc = cli.main(["--out", str(tmp_path), "sample",
                   "--law", '{"family": "uniform", "a": 0, "b": 1}', "--n", "50"])
    assert rc == 0
    rows = read_csv(tmp_path / "sample.csv")
    assert rows[0] == ["value"] and len(rows) == 51
    assert all(0.0 <= float(r[0]) <= 1.0 for r in rows[1:])
    meta = json.loads((tmp_path / "sample_meta.json").read_text())
    assert meta["command"] == "sample"
    assert meta["seed"] == cli.DEFAULT_SEED
    assert "version" in meta and "elapsed_seconds" in meta


def test_sample_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["--out", str(out), "sample",
                         "--law", '{"family": "pareto2a", "alpha": 1.0}',
                         "--n", "200"]) == 0
    assert (a / "sample.csv").read_bytes() == (b / "sample.csv").read_bytes()


def test_convolve_kendall_atom(tmp_path):
    rc = cli.main(["--out", str(tmp_path), "convolve",
                   "--algebra", '{"kind": "kendall", "alpha": 1.0}',
                   "--x", "0.5", "--y", "1.0", "--grid", "0:4:5"])
    assert rc == 0
    rows = read_csv(tmp_path / "convolve.csv")
    got = {float(z): float(c) for z, c in rows[1:]}
    assert got[0.0] == 0.0
    assert got[1.0] == pytest.approx(0.5)          # atom at the maximum
    assert got[2.0] == pytest.approx(0.875)
    meta = json.loads((tmp_path / "convolve_meta.json").read_text())
    assert meta["result"]["atoms"] == [[1.0, 0.5]]


def test_transform_values(tmp_path):
    rc = cli.main(["--out", str(tmp_path), "transform",
                   "--algebra", '{"kind": "classical"}',
                   "--law", '{"family": "point", "a": 1.0}', "--t-grid", "0:2:3"])
    assert rc == 0
    rows = read_csv(tmp_path / "transform.csv")
    vals = {float(t): float(p) for t, p in rows[1:]}
    assert vals[0.0] == pytest.approx(1.0)
    assert vals[1.0] == pytest.approx(math.exp(-1.0))
    assert vals[2.0] == pytest.approx(math.exp(-2.0))


def test_walk_full_paths(tmp_path):
    rc = cli.main(["--out", str(tmp_path), "walk",
                   "--algebra", '{"kind": "max"}',
                   "--step-law", '{"family": "uniform", "a": 0, "b": 1}',
                   "--n", "5", "--paths", "2", "--full"])
    assert rc == 0
    rows = read_csv(tmp_path / "walk.csv")
    assert rows[0] == ["path", "step", "state"]
    assert len(rows) == 1 + 2 * 6
    states = [float(r[2]) for r in rows[1:7]]
    assert states == sorted(states)          # max walk is nondecreasing


def test_safety_kendall(tmp_path):
    rc = cli.main(["--out", str(tmp_path), "safety", "--model", KENDALL_MODEL,
                   "--t", "1.0"])
    assert rc == 0
    rep = json.loads((tmp_path / "safety.json").read_text())
    assert rep["margin"] == pytest.approx(math.exp(-1.0) + 1.0, abs=1e-10)
    assert rep["condition_holds"] is True


def test_ruin_closed_form_row(tmp_path):
    rc = cli.main(["--out", str(tmp_path), "ruin", "--model", MAX_MODEL,
                   "--u", "0.5"])
    assert rc == 0
    rows = read_csv(tmp_path / "ruin.csv")
    u, surv, ruin = float(rows[1][0]), float(rows[1][1]), float(rows[1][2])
    assert (u, rows[1][5]) == (0.5, "closed_form")
    assert surv == pytest.approx(0.755929, abs=1e-5)
    assert ruin == pytest.approx(0.244071, abs=1e-5)
    summary = json.loads((tmp_path / "ruin_summary.json").read_text())
    assert summary["method"] == "closed" and summary["rows"] == 1


def test_ruin_u_grid_volterra(tmp_path):
    rc = cli.main(["--out", str(tmp_path), "ruin", "--model", ALPHA_MODEL,
                   "--u-grid", "0:2:3", "--steps", "1000"])
    assert rc == 0
    rows = read_csv(tmp_path / "ruin.csv")
    assert len(rows) == 4
    got = {float(r[0]): float(r[1]) for r in rows[1:]}
    for u, surv in got.items():
        assert surv == pytest.approx(1.0 - 0.5 * math.exp(-0.5 * u), abs=1e-3)


def test_ruin_mc_method(tmp_path):
    rc = cli.main(["--out", str(tmp_path), "ruin", "--model", KENDALL_MODEL,
                   "--method", "mc", "--u", "2.0", "--paths", "4000",
                   "--horizon", "200", "--seed", "7"])
    assert rc == 0
    rows = read_csv(tmp_path / "ruin.csv")
    surv, lo, hi = float(rows[1][1]), float(rows[1][3]), float(rows[1][4])
    assert 0.0 < lo <= surv <= hi < 1.0


def test_malformed_json_exits_2(tmp_path, capsys):
    assert cli.main(["--out", str(tmp_path), "sample", "--law", "{not json"]) == 2
    assert "invalid JSON" in capsys.readouterr().err


def test_unknown_family_exits_2(tmp_path, capsys):
    assert cli.main(["--out", str(tmp_path), "sample",
                     "--law", '{"family": "cauchy"}']) == 2
    assert "family" in capsys.readouterr().err


def test_missing_model_field_exits_2(tmp_path, capsys):
    assert cli.main(["--out", str(tmp_path), "ruin", "--model",
                     '{"algebra": {"kind": "max"}}']) == 2
    assert "missing field" in capsys.readouterr().err


def test_certain_ruin_exits_3(tmp_path, capsys):
    model = json.loads(ALPHA_MODEL)
    model["beta"] = 1.0          # rho = 1: the net profit condition fails
    assert cli.main(["--out", str(tmp_path), "ruin",
                     "--model", json.dumps(model), "--u", "1.0"]) == 3
    assert "numeric failure" in capsys.readouterr().err


def test_bad_grid_exits_2(tmp_path):
    assert cli.main(["--out", str(tmp_path), "convolve",
                     "--algebra", '{"kind": "max"}',
                     "--x", "1", "--y", "1", "--grid", "nope"]) == 2
