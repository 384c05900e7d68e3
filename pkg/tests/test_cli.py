import csv
import io
import json
import math

import pytest

from growthbound import ConfigError, random_scenarios, run_growth, run_spectrum, run_verify
from growthbound.cli import main, parse_lambda_grid, payload
from growthbound.scenarios import apply_overrides, get_scenario, load_config, parse_override


class TestScenarios:
    def test_growth_diagonal(self):
        rep = run_growth("diagonal")
        assert rep.passed
        assert rep.bounds["omega0_gamma"] == pytest.approx(-1.0, abs=1e-6)
        assert rep.bounds["omega0"] == pytest.approx(-1.0, abs=1e-6)

    def test_growth_jordan_split(self):
        rep = run_growth("jordan2", {"scenario.family": "split"})
        assert rep.bounds["omega0_gamma"] == math.inf
        assert rep.certificates["omega0_gamma"]["infinite"]
        assert abs(rep.bounds["omega0"]) <= 1e-3

    def test_spectrum_jordan(self):
        assert run_spectrum("jordan2").bounds["s"] == 0.0

    def test_spectrum_diagonal(self):
        rep = run_spectrum("diagonal")
        assert rep.bounds["s"] == -1.0
        assert [r["class"] for r in rep.classification if r["lambda.re"] == -1.0 and r["lambda.im"] == 0] \
            == ["NotInvertible"]

    def test_verify_all(self):
        reps = run_verify("all")
        assert [r.scenario for r in reps][-1] == "formulas"
        assert all(r.passed for r in reps), [(r.scenario, r.first_failure) for r in reps if not r.passed]

    def test_verify_jordan(self):
        reps = run_verify("jordan2")
        assert all(r.passed for r in reps)

    def test_verify_small_level_cap_fails(self):
        (rep,) = run_verify("right_shift", {"growth.levels": 5})
        assert not rep.passed
        assert rep.first_failure.name == "omega0_gamma"
        assert "level-cap-too-small" in rep.first_failure.detail

    def test_unknown_scenario(self):
        with pytest.raises(ConfigError):
            get_scenario("left_shift")

    def test_random_scenarios_are_reproducible(self):
        a = [s.name for s in random_scenarios(6, seed=3)]
        b = [s.name for s in random_scenarios(6, seed=3)]
        assert a == b and len(a) == 6

    def test_override_time_grid(self):
        sc = apply_overrides(get_scenario("diagonal"), {"growth.tmax": 20, "growth.t_points": 16})
        assert max(sc.config.t_grid) == pytest.approx(20) and len(sc.config.t_grid) == 16

    def test_override_family_unknown(self):
        with pytest.raises(ConfigError):
            apply_overrides(get_scenario("right_shift"), {"scenario.family": "split"})


class TestConfig:
    def test_parse_override(self):
        assert parse_override("spectrum.radii=[0, 2]") == ("spectrum.radii", [0, 2])

    @pytest.mark.parametrize("bad", ["noequals", "growth.nope=1", "spectrum.radii=[1"])
    def test_bad_override(self, bad):
        with pytest.raises(ConfigError):
            parse_override(bad)

    def test_config_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("scenario: diagonal\ngrowth:\n  levels: 30\n  tmax: 20\nspectrum:\n  angles: 4\n")
        assert load_config(path) == {"scenario.name": "diagonal", "growth.levels": 30,
                                     "growth.tmax": 20, "spectrum.angles": 4}

    def test_config_file_reports_line(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("growth:\n  levels: [1\n")
        with pytest.raises(ConfigError, match="line"):
            load_config(path)

    def test_config_unknown_key(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("growth:\n  speed: 3\n")
        with pytest.raises(ConfigError, match="growth.speed"):
            load_config(path)

    def test_lambda_grid(self):
        assert parse_lambda_grid("0,0.5,1x6") == {"spectrum.radii": [0.0, 0.5, 1.0], "spectrum.angles": 6}
        with pytest.raises(ConfigError):
            parse_lambda_grid("x4")


class TestMain:
    def test_growth_exit_zero(self, capsys):
        assert main(["growth", "--scenario", "diagonal", "--levels", "30"]) == 0
        assert "omega0_gamma" in capsys.readouterr().out

    def test_verify_failure_exit_one(self, capsys):
        assert main(["verify", "--scenario", "right_shift", "--levels", "5"]) == 1
        assert "level-cap-too-small" in capsys.readouterr().err

    def test_config_error_exit_two(self, capsys):
        assert main(["growth", "--scenario", "nowhere"]) == 2
        assert main(["growth", "--scenario", "diagonal", "--set", "growth.levels=abc"]) == 2
        assert main(["spectrum", "--scenario", "diagonal", "--lambda-grid", "a,bx2"]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["growth", "--config", str(tmp_path / "none.yaml")]) == 2

    def test_json_is_deterministic(self, tmp_path, capsys):
        args = ["report", "--scenario", "jordan2", "--format", "json"]
        main(args + ["--out", str(tmp_path / "a.json")])
        main(args + ["--out", str(tmp_path / "b.json")])
        a, b = (tmp_path / "a.json").read_bytes(), (tmp_path / "b.json").read_bytes()
        assert a == b
        doc = json.loads(a)
        for key in ("scenario", "bound.s", "bound.omega0", "bound.omega0_gamma"):
            assert key in doc
        assert set(doc["spectrum"][0]) == {"lambda.re", "lambda.im", "class", "M_lambda", "mu",
                                           "K_profile", "certified"}

    def test_spectrum_csv(self, tmp_path, capsys):
        out = tmp_path / "grid.csv"
        assert main(["spectrum", "--scenario", "right_shift", "--lambda-grid", "0,1,2x4",
                     "--out", str(out)]) == 0
        rows = list(csv.DictReader(io.StringIO(out.read_text())))
        assert len(rows) == 9
        assert rows[0]["class"] == "NotInvertible"
        one = next(r for r in rows if r["lambda.re"] == "1.0" and r["lambda.im"] == "0.0")
        assert one["class"] == "ScaledResolvent" and one["mu"] == "0.5"
        assert one["K_profile"]

    def test_growth_csv(self, tmp_path, capsys):
        out = tmp_path / "cells.csv"
        main(["growth", "--scenario", "diagonal", "--levels", "10", "--set", "growth.t_points=8",
              "--out", str(out)])
        rows = list(csv.DictReader(io.StringIO(out.read_text())))
        assert len(rows) == 80
        assert float(rows[0]["norm"]) == pytest.approx(math.exp(-0.25), rel=1e-9)

    def test_infinite_bound_serialised(self):
        doc = payload(run_growth("jordan2_split"))
        assert doc["bound.omega0_gamma"] == "inf"
        json.dumps(doc, allow_nan=False)
