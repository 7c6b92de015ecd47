import io
import json
import math

import numpy as np
import pytest

from membranecalc.cli import main
from conftest import data_file


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run(*argv)
    assert code == 0, err
    return json.loads(out)


class TestExamples:
    def test_classify_null(self):
        rep = run_json("classify", "--expr", "exp(-1/eps)")
        assert rep["results"]["net"]["class"]["kind"] == "Null"
        assert rep["config"]["grid"]["k_max"] == 48

    def test_integrate_gauge_ball(self):
        rep = run_json("integrate", "--f", "1", "--membrane", data_file("ball2d-alpha-s.json"), "--s", "1")
        net = rep["results"]["integral"]["net"]
        eps = np.array(net["grid"])
        np.testing.assert_allclose(net["values"], math.pi * eps ** 2, rtol=1e-12)
        assert rep["results"]["integral"]["class"]["valuation"] == pytest.approx(2, abs=1e-6)

    def test_cauchy_exp(self):
        rep = run_json("contour-cauchy", "--f", "exp(z)", "--contour", data_file("unit-circle.json"),
                       "--z0", "0")
        assert rep["results"]["gap"]["class"]["kind"] == "Null"


class TestExitCodes:
    def test_precondition_failure_is_two(self):
        code, _, err = run("contour-cauchy", "--f", "exp(z)", "--contour", data_file("unit-circle.json"),
                           "--z0", "1")
        assert code == 2 and "invertible" in err

    def test_parse_error_is_one(self):
        code, _, err = run("classify", "--expr", "exp(-1/")
        assert code == 1 and err

    def test_missing_file_is_one(self):
        code, _, _ = run("integrate", "--f", "1", "--membrane", "/nonexistent/m.json")
        assert code == 1

    def test_usage_error_is_one(self):
        code, _, _ = run("integrate", "--f", "1")
        assert code == 1

    def test_unknown_command_is_one(self):
        assert run("frobnicate")[0] == 1


class TestReports:
    def test_refuses_to_overwrite(self, tmp_path):
        target = tmp_path / "r.json"
        assert run("classify", "--expr", "eps^2", "--out", str(target))[0] == 0
        first = target.read_text()
        code, _, err = run("classify", "--expr", "eps^3", "--out", str(target))
        assert code == 1 and "--force" in err
        assert target.read_text() == first
        assert run("classify", "--expr", "eps^3", "--out", str(target), "--force")[0] == 0
        assert target.read_text() != first

    def test_config_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MEMBRANE_CALC_CONFIG", data_file("config-small.json"))
        rep = run_json("classify", "--expr", "eps")
        assert rep["config"]["grid"]["k_max"] == 40
        assert len(rep["results"]["net"]["net"]["grid"]) == 37
        # command-line flags override the file
        rep = run_json("classify", "--expr", "eps", "--grid-kmax", "44")
        assert rep["config"]["grid"]["k_max"] == 44

    def test_bad_config_key(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"grid": {"bogus": 1}}))
        assert run("classify", "--expr", "eps", "--config", str(cfg))[0] == 1

    def test_csv_layout(self):
        code, out, _ = run("line", "--field=-x2/2", "--field", "x1/2", "--history", data_file("eps-circle.json"),
                           "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        rows = [ln for ln in lines if ln and not ln.startswith("#")]
        comments = [ln for ln in lines if ln.startswith("#")]
        assert rows[0].split(",")[0] == "eps"
        assert len(rows) == 1 + 45
        eps, val = (float(v) for v in rows[-1].split(",")[:2])
        assert val == pytest.approx(math.pi * eps ** 2, rel=1e-12)
        assert any("kind=" in c for c in comments)
        assert any(c.startswith("# config:") for c in comments)

    def test_taylor_table(self):
        code, out, _ = run("taylor", "--f", "exp(z)", "--contour", data_file("unit-circle.json"), "--z0", "0",
                           "--n-max", "4", "--format", "csv")
        assert code == 0
        rows = [ln.split(",") for ln in out.splitlines() if ln and not ln.startswith("#")]
        assert rows[0][0] == "n" and rows[0][-2:] == ["valuation", "kind"]
        assert len(rows) == 6
        assert float(rows[4][1]) == pytest.approx(1 / 6, abs=1e-12)

    @pytest.mark.parametrize("argv", [
        ("integrate", "--f", "x1^2 + x2", "--membrane", data_file("eps-disk.json")),
        ("green", "--field=-x2/2", "--field", "x1/2", "--history", data_file("eps-circle.json"),
         "--membrane", data_file("eps-disk.json")),
        ("transport", "--problem", data_file("transport-source.json"), "--probe", "0.3,0.5",
         "--probe", "eps,1+eps"),
    ])
    def test_worker_count_does_not_change_output(self, argv):
        one = run(*argv, "--workers", "1")
        four = run(*argv, "--workers", "4")
        assert one[0] == four[0] == 0
        strip = [json.loads(o[1]) for o in (one, four)]
        for rep in strip:
            rep["config"].pop("workers")
            rep["config"]["quad"].pop("workers")
        assert json.dumps(strip[0], sort_keys=True) == json.dumps(strip[1], sort_keys=True)


class TestCommands:
    def test_meanvalue(self):
        rep = run_json("meanvalue", "--f", "1/eps^2", "--membrane", data_file("unit-square.json"))
        assert rep["scalars"]["r_star"] == pytest.approx(-2, abs=0.01)

    def test_consistency(self):
        rep = run_json("consistency", "--f", "1", "--a", "0", "--b", "alpha:1")
        assert rep["results"]["gap"]["class"]["kind"] == "Null"

    def test_wave(self):
        rep = run_json("wave", "--problem", data_file("wave-sin.json"), "--probe", "0.3,0.7")
        assert "residual_floor" in rep["results"]
        assert rep["scalars"]["scaled_class"]["kind"] == "Null"

    def test_wrong_candidate(self):
        rep = run_json("transport", "--problem", data_file("transport-sin.json"), "--probe", "0.3,0.5",
                       "--candidate", "sin(x1 + t)")
        assert rep["scalars"]["scaled_class"]["kind"] != "Null"

    def test_classify_sharp_norm(self):
        rep = run_json("classify", "--expr", "0.5/eps")
        assert rep["scalars"]["sharp_norm"] == pytest.approx(math.e, rel=1e-9)
