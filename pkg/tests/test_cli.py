import csv
import json
import math

import numpy as np
import pytest

from bertrand import cli
from bertrand.cli import BOUNDS, CSV_HEADER, main, parse_config
from bertrand.errors import ConfigError

KEPLER = {"family": "type1", "n": 1, "m": 1, "K": 0.0, "amplitude": -1.0,
          "initial": {"E": -0.375, "J2": 1.0}}


def write_config(tmp_path, cfg, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(argv, capsys):
    rc = main(argv)
    out, err = capsys.readouterr()
    return rc, out, err


class TestParseConfig:
    def test_defaults(self):
        cfg = parse_config(dict(KEPLER))
        assert cfg.n_periods == 10.0 and cfg.t_end is None
        assert cfg.rtol == cfg.atol == 1e-12

    @pytest.mark.parametrize("patch,field", [
        ({"family": "type3"}, "family"),
        ({"n": 0}, "n"),
        ({"n": 2, "m": 4}, "n"),
        ({"branch": 0, "family": "type2"}, "branch"),
        ({"rtol": -1.0}, "rtol"),
        ({"t_end": 1.0, "n_periods": 2}, "t_end"),
        ({"initial": {"E": -0.3}}, "initial.J2"),
        ({"initial": {"q": [1, 0], "p": [0, 1, 0]}}, "initial.q"),
        ({"initial": {"q": [1, 0, 0], "p": [0, 1, 0], "E": 1.0}}, "initial"),
        ({"n_samples": 1}, "n_samples"),
    ])
    def test_names_field(self, patch, field):
        with pytest.raises(ConfigError) as info:
            parse_config({**KEPLER, **patch})
        assert info.value.field == field


class TestSimulate:
    def test_catalog_kepler(self, tmp_path, capsys):
        rc, out, _ = run(["simulate", "--example", "constant-curvature", "--kappa", "0",
                          "--attractive", "--energy", "-0.375", "--j2", "1",
                          "--out-dir", str(tmp_path)], capsys)
        assert rc == 0
        summary = json.loads(out)
        assert summary["classification"] == "BoundedPeriodic"
        assert summary["apsidal_angle"] == pytest.approx(math.pi, abs=1e-5)
        assert summary["E"] == pytest.approx(-0.375, abs=1e-15)
        assert summary == json.loads((tmp_path / "summary.json").read_text())
        with open(tmp_path / "trajectory.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == CSV_HEADER
        assert len(rows) == 2002
        first = [float(x) for x in rows[1]]
        assert first[7] == pytest.approx(2.0 / 3.0, abs=1e-15)
        assert first[12:15] == pytest.approx([1.0, 0.0, 0.0], abs=1e-12)

    def test_full_precision(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**KEPLER, "n_periods": 0.5, "n_samples": 5})
        assert run(["simulate", "--config", cfg, "--out-dir", str(tmp_path)], capsys)[0] == 0
        with open(tmp_path / "trajectory.csv") as fh:
            rows = list(csv.reader(fh))[1:]
        for row in rows:
            for cell in row:
                assert f"{float(cell):.17g}" == cell

    def test_zero_periods(self, tmp_path, capsys):
        rc, _, _ = run(["simulate", "--example", "constant-curvature", "--attractive",
                        "--energy", "-0.375", "--j2", "1", "--n-periods", "0",
                        "--out-dir", str(tmp_path)], capsys)
        assert rc == 0
        assert (tmp_path / "trajectory.csv").read_text().strip() == ",".join(CSV_HEADER)

    def test_malformed_config(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**KEPLER, "family": "typeX"})
        rc, _, err = run(["simulate", "--config", cfg], capsys)
        assert rc == 2 and "family" in err

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        rc, _, err = run(["simulate", "--config", str(path)], capsys)
        assert rc == 2 and "config" in err

    def test_override_dotted(self, tmp_path, capsys):
        cfg = write_config(tmp_path, KEPLER)
        rc, out, _ = run(["simulate", "--config", cfg, "--override", "initial.J2=0.8",
                          "--override", "n_periods=1", "--out-dir", str(tmp_path)], capsys)
        assert rc == 0
        assert json.loads(out)["J2"] == pytest.approx(0.8, abs=1e-14)

    def test_chart_exit_is_warning(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"family": "type1", "K": -1.0, "t_end": 50.0,
                                      "initial": {"q": [0.5, 0, 0], "p": [1.0, 0.3, 0]}})
        rc, out, _ = run(["simulate", "--config", cfg, "--out-dir", str(tmp_path)], capsys)
        assert rc == 0 and json.loads(out)["status"] == "chart_exit"

    def test_numeric_failure(self, tmp_path, capsys):
        # starting outside the chart is rejected by the integrator
        cfg = write_config(tmp_path, {"family": "type1", "K": -1.0, "t_end": 1.0,
                                      "initial": {"q": [2.0, 0, 0], "p": [0, 1.0, 0]}})
        rc, _, _ = run(["simulate", "--config", cfg, "--out-dir", str(tmp_path)], capsys)
        assert rc == 3


class TestVerify:
    def test_kepler_passes(self, tmp_path, capsys):
        cfg = write_config(tmp_path, KEPLER)
        rc, out, _ = run(["verify", "--config", cfg, "--out-dir", str(tmp_path)], capsys)
        report = json.loads(out)
        assert rc == 0 and report["pass"]
        assert all(c["pass"] and c["value"] <= c["bound"] for c in report["checks"])
        names = {c["name"] for c in report["checks"]}
        assert {"energy_drift", "runge_lenz_drift", "tensor_drift", "apsidal_angle"} <= names
        assert report["versions"]["numpy"] == np.__version__
        assert report == json.loads((tmp_path / "report.json").read_text())

    def test_loose_tolerance_fails(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**KEPLER, "rtol": 1e-3, "atol": 1e-3})
        rc, out, _ = run(["verify", "--config", cfg], capsys)
        report = json.loads(out)
        assert rc == 1 and not report["pass"]
        drift = next(c for c in report["checks"] if c["name"] == "runge_lenz_drift")
        assert not drift["pass"]

    def test_radial_skips(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**KEPLER, "t_end": 0.3, "initial": {"q": [1.0, 0, 0],
                                                                          "p": [0.5, 0, 0]}})
        rc, out, _ = run(["verify", "--config", cfg], capsys)
        report = json.loads(out)
        skipped = [c for c in report["checks"] if c.get("skipped")]
        assert skipped and all(c["skipped"] == "radial" for c in skipped)
        assert "runge_lenz_norm" in {c["name"] for c in skipped}
        assert rc == 0 and report["pass"]

    def test_rows_carry_bounds(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**KEPLER, "n_periods": 2})
        _, out, _ = run(["verify", "--config", cfg], capsys)
        for c in json.loads(out)["checks"]:
            assert c["bound"] == BOUNDS[c["name"]]


def sweep_config(params, E, J2, **extra):
    return {**params, "grid": {"E": E, "J2": J2}, **extra}


class TestSweep:
    def test_kepler_grid(self, tmp_path, capsys):
        cfg = write_config(tmp_path, sweep_config(
            {k: KEPLER[k] for k in ("family", "amplitude")},
            {"start": -0.9, "stop": -0.1, "num": 4}, {"start": 0.2, "stop": 2.0, "num": 4},
            n_samples=801))
        rc, out, _ = run(["sweep", "--config", cfg, "--out-dir", str(tmp_path)], capsys)
        rows = json.loads(out)["rows"]
        assert rc == 0 and len(rows) == 16
        bounded = [r for r in rows if r["class"] == "BoundedPeriodic"]
        assert bounded and all(abs(r["apsidal"] - math.pi) < 1e-5 for r in bounded)
        assert all(r["bound"] == 1e-5 for r in rows)
        assert [(r["E"], r["J2"]) for r in rows] == sorted((r["E"], r["J2"]) for r in rows)
        assert (tmp_path / "sweep.csv").read_text().splitlines()[0].startswith("E,J2,class")

    def test_empty_cell(self, capsys):
        # below the circular-orbit energy for J2 = 1 no motion exists
        cfg = parse_config(sweep_config({"family": "type1", "amplitude": -1.0}, [-1.0], [1.0]))
        row = cli.cmd_sweep(cfg)["rows"][0]
        assert row["class"] == "Empty" and row["error"] is None and row["apsidal"] is None

    def test_three_two(self):
        params = {"family": "type2", "n": 3, "m": 2, "K": 0.2, "D": 0.1, "amplitude": -1.0}
        cfg = parse_config(sweep_config(params, [0.8, 1.2], [0.2, 0.4], n_samples=801))
        rows = cli.cmd_sweep(cfg)["rows"]
        assert all(r["class"] == "BoundedPeriodic" for r in rows)
        for r in rows:
            assert abs(r["apsidal"] - 2 * math.pi / 3) < 1e-5
            assert r["closure"] < 1e-5

    def test_cell_errors_recorded(self, monkeypatch):
        def boom(*a, **k):
            raise cli.BertrandError("synthetic")
        monkeypatch.setattr(cli, "classify_orbit", boom)
        cfg = parse_config(sweep_config({"family": "type1"}, [0.1, 0.2], [1.0]))
        rows = cli.cmd_sweep(cfg)["rows"]
        assert len(rows) == 2 and all("synthetic" in r["error"] for r in rows)

    def test_parallel_matches_serial(self):
        cfg = parse_config(sweep_config({"family": "type1", "amplitude": -1.0},
                                        [-0.6, -0.3], [0.5, 1.0], n_samples=201, seed=7))
        assert cli.cmd_sweep(cfg, jobs=2) == cli.cmd_sweep(cfg, jobs=1)


class TestDeterminism:
    def test_byte_identical(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**KEPLER, "n_periods": 2})
        for sub in ("a", "b"):
            assert run(["verify", "--config", cfg, "--out-dir", str(tmp_path / sub)], capsys)[0] == 0
            assert run(["simulate", "--config", cfg, "--out-dir", str(tmp_path / sub)], capsys)[0] == 0
        for name in ("report.json", "summary.json", "trajectory.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_sweep_seed_independent(self):
        base = sweep_config({"family": "type1", "amplitude": -1.0}, [-0.6, -0.3], [0.5, 1.0],
                            n_samples=201)
        a = cli.cmd_sweep(parse_config({**base, "seed": 1}))
        b = cli.cmd_sweep(parse_config({**base, "seed": 2}))
        assert json.dumps(a) == json.dumps(b)


class TestCatalog:
    def test_listing(self, capsys):
        rc, out, _ = run(["catalog", "--json"], capsys)
        entries = json.loads(out)
        assert rc == 0
        by_name = {}
        for e in entries:
            by_name.setdefault(e["name"], []).append(e)
        kinds = {e["arguments"]["kind"] for e in by_name["constant-curvature"]}
        assert kinds == {"kepler", "oscillator"}
        dar = by_name["darboux-iii"][0]
        assert "K=4/k^4" in dar["identification"].replace(" ", "")
        mk = by_name["multifold-kepler"][0]
        assert "K=4b^2/a^4" in mk["identification"].replace(" ", "")

    def test_catalog_values(self):
        from bertrand.spaces import example_catalog
        for kd in (0.5, 1.0, 2.0):
            p = example_catalog("darboux-iii", k=kd).params
            assert p.K == pytest.approx(4 / kd ** 4) and p.D == pytest.approx(-2 / kd ** 2)
        p = example_catalog("multifold-kepler", a=2.0, b=0.5, n=3, m=2).params
        assert p.K == pytest.approx(4 * 0.25 / 16) and p.D == pytest.approx(-2 * 0.5 / 4)

    def test_text(self, capsys):
        rc, out, _ = run(["catalog"], capsys)
        assert rc == 0 and "darboux-iii" in out
