import csv
import json
import math

import numpy as np
import pytest

from bessel_subordinate import cli
from bessel_subordinate import densities as d


def run(tmp_path, *argv):
    return cli.main([*argv])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ------------------------------------------------------------ grid syntax

def test_grid_excludes_max():
    g = cli.parse_grid("0.1:5:0.1")
    assert len(g) == 49 and g[0] == 0.1 and g[-1] == pytest.approx(4.9)
    assert len(cli.parse_grid("0:1:0.25")) == 4
    assert len(cli.parse_grid("0:1:0.3")) == 4


@pytest.mark.parametrize("text", ["1:2", "a:b:c", "2:1:0.1", "0:1:0"])
def test_bad_grid(text):
    with pytest.raises(cli.UsageError):
        cli.parse_grid(text)


# ------------------------------------------------------------ sample

def test_sample_csv(tmp_path, capsys):
    out = tmp_path / "a.csv"
    code = run(tmp_path, "sample", "--law", "bessel_at_fpt", "--gamma", "2", "--t", "1", "--count", "100000",
               "--seed", "7", "--output", "csv", "--output-path", str(out))
    assert code == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "value" and len(lines) == 100001
    assert "mean" in capsys.readouterr().out


def test_sample_is_byte_identical(tmp_path):
    args = ["sample", "--law", "jr", "--gamma", "2", "--count", "2000", "--seed", "11"]
    run(tmp_path, *args, "--output-path", str(tmp_path / "a.csv"))
    run(tmp_path, *args, "--output-path", str(tmp_path / "b.csv"))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_sample_values_round_trip_exactly(tmp_path):
    out = tmp_path / "a.csv"
    run(tmp_path, "sample", "--law", "fpt", "--count", "500", "--seed", "3", "--output-path", str(out))
    from bessel_subordinate.samplers import ProcessSpec, sample
    expected = sample(ProcessSpec("FPT"), 500, 3).values
    got = np.array([float(r["value"]) for r in read_csv(out)])
    assert np.array_equal(got, expected)


def test_iterated_passage_sample_is_nonnegative(tmp_path):
    out = tmp_path / "s.json"
    assert run(tmp_path, "sample", "--law", "iterated_fpt", "--n", "3", "--t", "1", "--count", "5000",
               "--output", "json", "--output-path", str(out)) == 0
    vals = json.loads(out.read_text())
    assert len(vals) == 5000 and min(vals) >= 0


def test_sample_pushforward(tmp_path):
    out = tmp_path / "h.csv"
    run(tmp_path, "sample", "--law", "hat_r", "--gamma", "3", "--count", "1000", "--output-path", str(out))
    vals = [float(r["value"]) for r in read_csv(out)]
    assert all(0 < v < 1 for v in vals)


@pytest.mark.parametrize("argv", [
    ["sample", "--law", "bessel_at_fpt", "--t", "1"],
    ["sample", "--law", "nope"],
    ["sample", "--law", "fpt", "--count", "0"],
    ["sample", "--law", "stable", "--nu", "1.5"],
    ["density", "--law", "fpt"],
    ["density", "--law", "fpt", "--grid", "0:1:0.1", "--method", "fox"],
    ["verify", "--suite", "moments", "--law", "jr"],
    ["sample", "--law", "fpt", "--seed", "-1"],
    ["frobnicate"],
])
def test_usage_errors_exit_two(tmp_path, argv):
    assert run(tmp_path, *argv, "--output-path", str(tmp_path / "x")) == 2 if argv[0] != "frobnicate" \
        else run(tmp_path, *argv) == 2


# ------------------------------------------------------------ density

def test_density_grid_rows(tmp_path):
    out = tmp_path / "d.csv"
    assert run(tmp_path, "density", "--law", "hypJ3", "--t", "1", "--grid", "0.1:5:0.1",
               "--output-path", str(out)) == 0
    rows = read_csv(out)
    assert len(rows) == 49
    assert all(float(r["density"]) >= 0 for r in rows)
    cdf = [float(r["cdf"]) for r in rows]
    assert cdf == sorted(cdf)


def test_density_flags_points_outside_support(tmp_path):
    out = tmp_path / "d.csv"
    run(tmp_path, "density", "--law", "beta_arcsin", "--gamma", "3", "--t", "2", "--points=-1,0.5,3",
        "--output-path", str(out))
    rows = read_csv(out)
    assert [r["in_support"] for r in rows] == ["0", "1", "0"]
    assert float(rows[0]["density"]) == 0 and float(rows[2]["cdf"]) == 1


def test_density_fox_and_quadrature_routes_agree(tmp_path):
    paths = {}
    for m in ("fox", "quadrature"):
        paths[m] = tmp_path / f"{m}.csv"
        run(tmp_path, "density", "--law", "iterated_bessel", "--gamma", "2", "--t", "1", "--grid", "0.1:4:0.3",
            "--method", m, "--output-path", str(paths[m]))
    a = np.array([float(r["density"]) for r in read_csv(paths["fox"])])
    b = np.array([float(r["density"]) for r in read_csv(paths["quadrature"])])
    assert np.max(np.abs(a - b)) < 1e-6


def test_density_stable_ratio_closed_form(tmp_path):
    out = tmp_path / "s.csv"
    run(tmp_path, "density", "--law", "stable_ratio", "--nu", "0.5", "--grid", "0.1:10:0.1", "--output-path", str(out))
    rows = read_csv(out)
    assert len(rows) == 99
    for r in rows:
        w = float(r["point"])
        assert float(r["density"]) == pytest.approx(w ** -0.5 / (math.pi * (1 + w)), rel=1e-12)


def test_density_convention_flag(tmp_path):
    half, whole = tmp_path / "h.json", tmp_path / "w.json"
    base = ["density", "--law", "hyp3", "--t", "0.5", "--points", "1.0", "--output", "json"]
    run(tmp_path, *base, "--output-path", str(half))
    run(tmp_path, *base, "--convention", "whole", "--output-path", str(whole))
    h = json.loads(half.read_text())[0]["density"]
    w = json.loads(whole.read_text())[0]["density"]
    from bessel_subordinate import hyperbolic as hyp
    assert w == pytest.approx(hyp.p3_density(1.0, 1.0), rel=1e-12) and h != pytest.approx(w)


# ------------------------------------------------------------ config precedence

def test_config_file_and_flag_precedence(tmp_path, monkeypatch):
    conf = tmp_path / "run.conf"
    conf.write_text("# defaults for this run\nlaw = fpt\ncount = 300\nseed = 5\noutput-path = " +
                    str(tmp_path / "c.csv") + "\n")
    monkeypatch.setenv(cli.SEED_ENV, "99")
    args = cli.build_parser().parse_args(["sample", "--config", str(conf), "--count", "200"])
    cfg = cli.resolve(args)
    assert cfg.law == "fpt" and cfg.count == 200 and cfg.seed == 5


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "99")
    cfg = cli.resolve(cli.build_parser().parse_args(["sample", "--law", "fpt"]))
    assert cfg.seed == 99
    monkeypatch.delenv(cli.SEED_ENV)
    cfg = cli.resolve(cli.build_parser().parse_args(["sample", "--law", "fpt"]))
    assert cfg.seed == cli.DEFAULT_SEED


def test_missing_config_is_usage_error(tmp_path):
    assert run(tmp_path, "sample", "--config", str(tmp_path / "none.conf"), "--law", "fpt") == 2


# ------------------------------------------------------------ verify

def test_verify_pde_single_law(tmp_path):
    out = tmp_path / "r.json"
    code = run(tmp_path, "verify", "--suite", "pde", "--law", "jr", "--gamma", "1.5", "--output-path", str(out))
    rep = json.loads(out.read_text())
    assert code == 0
    assert rep["schema_version"] == cli.SCHEMA_VERSION
    main = [r for r in rep["records"] if not r["informational"]]
    assert len(main) == 1 and "convergence_slope" in main[0]["detail"]
    assert all(r["anchor"] for r in rep["records"])
    assert rep["environment"]["seed"] == cli.DEFAULT_SEED


def test_verify_oracles(tmp_path):
    out = tmp_path / "r.json"
    assert run(tmp_path, "verify", "--suite", "oracles", "--output-path", str(out)) == 0
    rep = json.loads(out.read_text())
    assert rep["summary"]["failed"] == 0 and rep["summary"]["counted"] == len(rep["records"])


def test_verify_identities_report(tmp_path):
    out = tmp_path / "r.json"
    assert run(tmp_path, "verify", "--suite", "identities", "--seed", "7", "--output-path", str(out)) == 0
    ids = {r["check_id"] for r in json.loads(out.read_text())["records"]}
    assert {"composition_swap", "passage_of_bessel_one", "sinh_ratio[t=1.0]"} <= ids


def test_verify_failure_exit_code(tmp_path, monkeypatch):
    from bessel_subordinate import suites
    from bessel_subordinate.mc_harness import CheckResult
    fake = lambda seed: [CheckResult("x", "always fails", False, 1.0, 0.0, "none")]
    monkeypatch.setitem(suites.SUITES, "moments", fake)
    out = tmp_path / "r.json"
    assert run(tmp_path, "verify", "--suite", "moments", "--output-path", str(out)) == 1
    assert json.loads(out.read_text())["summary"]["failures"] == ["x"]


def test_jsonable_handles_non_finite():
    assert cli.jsonable({1.0: [np.float64(np.inf), np.int64(3), np.bool_(True)]}) == {"1.0": ["inf", 3, True]}


def test_atomic_write_leaves_no_temp(tmp_path):
    cli.write_atomic(str(tmp_path / "f.txt"), "a\n")
    assert [p.name for p in tmp_path.iterdir()] == ["f.txt"]
