import json
import math
import struct

import numpy as np
import pytest
from click.testing import CliRunner

from takagi_lab.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args, **kw):
    result = runner.invoke(main, list(args), catch_exceptions=False, **kw)
    return result


class TestEval:
    def test_classic_at_third(self, runner):
        r = run(runner, "eval", "--H", "1/2", "--t", "1/3", "--eps", "1e-10")
        assert r.exit_code == 0
        value = float(r.output.splitlines()[0])
        assert value == pytest.approx((2 + math.sqrt(2)) / 3, abs=1e-9)
        assert r.output.splitlines()[1].startswith("level ")

    def test_half_negated_at_five_sixths(self, runner):
        r = run(runner, "eval", "--H", "1/2", "--coeffs", "half-negated",
                "--t", "5/6", "--eps", "1e-10")
        assert r.exit_code == 0
        value = float(r.output.splitlines()[0])
        assert value == pytest.approx(0.5 - (2 + math.sqrt(2)) / 3, abs=1e-9)

    def test_zero(self, runner):
        r = run(runner, "eval", "--H", "1/2", "--t", "0", "--eps", "1e-10")
        assert r.exit_code == 0
        assert float(r.output.splitlines()[0]) == 0.0

    def test_json_format(self, runner):
        r = run(runner, "eval", "--H", "1/4", "--t", "1/3", "--format", "json")
        payload = json.loads(r.output)
        assert set(payload) == {"H", "t", "eps", "value", "level"}

    def test_invalid_h_is_usage_error(self, runner):
        r = run(runner, "eval", "--H", "3/2", "--t", "0.5")
        assert r.exit_code == 2
        r = run(runner, "eval", "--H", "abc", "--t", "0.5")
        assert r.exit_code == 2

    def test_invalid_t(self, runner):
        r = run(runner, "eval", "--H", "1/2", "--t", "7/6")
        assert r.exit_code == 2


class TestGrid:
    def test_csv(self, runner):
        r = run(runner, "grid", "--H", "1/2", "--level", "1", "--what", "values")
        assert r.output == "k,t,value\n0,0.0,0.0\n1,0.5,0.5\n2,1.0,0.0\n"

    def test_raw(self, runner, tmp_path):
        out = tmp_path / "grid.bin"
        r = run(runner, "grid", "--H", "1/2", "--level", "4",
                "--what", "increments", "--format", "raw", "--output", str(out))
        assert r.exit_code == 0
        raw = out.read_bytes()
        (level,) = struct.unpack_from("<Q", raw)
        assert level == 4
        assert np.frombuffer(raw[8:], "<f8").size == 16

    def test_json(self, runner):
        r = run(runner, "grid", "--H", "1/2", "--level", "2", "--format", "json")
        payload = json.loads(r.output)
        assert payload["n"] == 2 and len(payload["data"]) == 5

    def test_level_guard_exit_1(self, runner):
        r = run(runner, "grid", "--H", "1/2", "--level", "26")
        assert r.exit_code == 1
        r = run(runner, "grid", "--H", "1/2", "--level", "26", "--max-level", "30")
        assert r.exit_code == 1  # still needs --streaming beyond the dense guard
        r = run(runner, "grid", "--H", "1/2", "--level", "31", "--max-level", "31")
        assert r.exit_code == 2  # --max-level cannot exceed the hard cap

    def test_explicit_source(self, runner, tmp_path):
        f = tmp_path / "signs.json"
        f.write_text("[[1], [1, -1]]", encoding="utf-8")
        r = run(runner, "grid", "--H", "1/2", "--level", "2", "--coeffs", "explicit",
                "--explicit-file", str(f))
        assert r.exit_code == 0
        # querying beyond the supplied rows trips the guard -> exit 1
        r = run(runner, "grid", "--H", "1/2", "--level", "3", "--coeffs", "explicit",
                "--explicit-file", str(f))
        assert r.exit_code == 1


class TestVariation:
    def test_csv_closed_form(self, runner):
        r = run(runner, "variation", "--H", "1/2", "--p", "2", "--n-max", "8")
        lines = r.output.splitlines()
        assert lines[0] == "n,V_n,predicted_limit,regime"
        last = lines[-1].split(",")
        assert int(last[0]) == 8
        assert float(last[1]) == pytest.approx(1 - 2.0 ** -8, abs=1e-12)
        assert last[3] == "LINEAR"

    def test_json_regimes(self, runner):
        r = run(runner, "variation", "--H", "1/2", "--p", "4", "--n-max", "6",
                "--format", "json")
        payload = json.loads(r.output)
        assert payload["regime"] == "VANISHES"
        assert payload["predicted_limit"] == 0.0
        r = run(runner, "variation", "--H", "1/2", "--p", "1", "--n-max", "6",
                "--format", "json")
        payload = json.loads(r.output)
        assert payload["regime"] == "DIVERGES"
        assert payload["predicted_limit"] == math.inf

    def test_exact_rational_regime(self, runner):
        r = run(runner, "variation", "--H", "1/3", "--p", "3", "--n-max", "4",
                "--format", "json", "--mc-samples", "20000")
        payload = json.loads(r.output)
        assert payload["regime"] == "LINEAR"

    def test_streaming_guard(self, runner):
        r = run(runner, "variation", "--H", "1/2", "--p", "2", "--n-max", "25")
        assert r.exit_code == 1
        assert "streaming" in r.output or "streaming" in (r.stderr or "")


class TestSlopeAndMoments:
    def test_single_h_exact(self, runner):
        r = run(runner, "slope", "--H", "1/2", "--format", "json")
        payload = json.loads(r.output)
        assert payload == {"H": 0.5, "slope": 1.0, "stderr": None,
                           "method": "recursion"}

    def test_sweep_csv(self, runner):
        r = run(runner, "slope", "--sweep", "6", "--samples", "10000")
        lines = r.output.splitlines()
        assert lines[0] == "H,slope,stderr,method"
        assert len(lines) == 7
        assert lines[1].endswith("recursion")  # H = 1/8 -> p = 8

    def test_requires_one_mode(self, runner):
        assert run(runner, "slope").exit_code == 2
        assert run(runner, "slope", "--H", "1/2", "--sweep", "5").exit_code == 2

    def test_moments_json_schema(self, runner):
        r = run(runner, "moments", "--H", "1/2", "--p", "2")
        payload = json.loads(r.output)
        assert payload == {"lambda": pytest.approx(2 ** -0.5), "p": 2.0,
                           "value": 2.0, "exact": True, "method": "recursion"}

    def test_moments_rational_lambda(self, runner):
        r = run(runner, "moments", "--lam", "1/2", "--p", "2")
        payload = json.loads(r.output)
        assert payload["value"] == pytest.approx(4 / 3, rel=1e-15)

    def test_moments_signed_odd(self, runner):
        r = run(runner, "moments", "--H", "1/2", "--p", "3", "--kind", "signed")
        payload = json.loads(r.output)
        assert payload["value"] == 0.0 and payload["exact"] is True

    def test_moments_odd_abs_needs_mc(self, runner):
        assert run(runner, "moments", "--H", "1/2", "--p", "3").exit_code != 0
        r = run(runner, "moments", "--H", "1/2", "--p", "3", "--method", "mc",
                "--samples", "20000")
        payload = json.loads(r.output)
        assert payload["exact"] is False and "stderr" in payload

    def test_moments_series_normalization(self, runner):
        r = run(runner, "moments", "--H", "1/2", "--p", "2", "--method", "series")
        payload = json.loads(r.output)
        lam = 2 ** -0.5
        assert payload["value"] == pytest.approx((1 - lam) / (1 + lam), rel=1e-12)
        assert "normalization" in payload


class TestExtremesModulusSharpness:
    def test_extremes_json(self, runner):
        r = run(runner, "extremes", "--H", "1/2", "--n-max", "3")
        payload = json.loads(r.output)
        assert payload["max"] == pytest.approx((2 + math.sqrt(2)) / 3)
        assert payload["maximizers"] == [pytest.approx(1 / 3), pytest.approx(2 / 3)]
        assert payload["oscillation"] == pytest.approx(1.7761423749, abs=1e-9)
        assert len(payload["truncated"]) == 3

    def test_extremes_csv(self, runner):
        r = run(runner, "extremes", "--H", "1/2", "--n-max", "2", "--format", "csv")
        lines = r.output.splitlines()
        assert lines[0] == "n,M_n,t_n"
        assert len(lines) == 3

    def test_modulus_json_auto_factor(self, runner):
        r = run(runner, "modulus", "--H", "1/2", "--n-grid", "8")
        payload = json.loads(r.output)
        assert payload["bound_factor"] == 1.0
        assert payload["max_ratio"] <= 1 + 1e-9
        r = run(runner, "modulus", "--H", "1/2", "--coeffs", "half-negated",
                "--n-grid", "8")
        payload = json.loads(r.output)
        assert payload["bound_factor"] == pytest.approx(2 ** 0.5)
        assert payload["max_ratio"] <= 1 + 1e-9

    def test_modulus_csv_table(self, runner):
        r = run(runner, "modulus", "--H", "1/2", "--n-grid", "4", "--format", "csv")
        lines = r.output.splitlines()
        assert lines[0] == "h,omega,max_ratio"
        assert len(lines) == 16  # header + one row per step h = j/16, j = 1..15

    def test_modulus_guard(self, runner):
        assert run(runner, "modulus", "--H", "1/2", "--n-grid", "23").exit_code == 1

    def test_sharpness_csv(self, runner):
        r = run(runner, "sharpness", "--H", "1/2", "--n-max", "6")
        lines = r.output.splitlines()
        assert lines[0] == "n,h,lhs,omega,ratio,identity_gap"
        assert len(lines) == 6
        for line in lines[1:]:
            gap = float(line.split(",")[-1])
            assert abs(gap) <= 1e-9


class TestEnumcheck:
    def test_passes(self, runner):
        r = run(runner, "enumcheck", "--coeffs", "seeded", "--seed", "5", "--n", "10")
        assert r.exit_code == 0
        assert "complete" in r.output

    def test_formats(self, runner):
        r = run(runner, "enumcheck", "--n", "6", "--format", "json")
        assert json.loads(r.output) == {"n": 6, "complete": True}
        r = run(runner, "enumcheck", "--n", "6", "--format", "csv")
        assert r.output == "n,complete\n6,true\n"


class TestThreadsEnv:
    def test_env_var_sets_thread_count(self, runner):
        # results must not depend on the worker count
        base = run(runner, "variation", "--H", "1/2", "--p", "2", "--n-max", "6")
        via_env = runner.invoke(
            main,
            ["variation", "--H", "1/2", "--p", "2", "--n-max", "6"],
            env={"TAKAGI_LAB_THREADS": "3"},
            catch_exceptions=False,
        )
        assert via_env.exit_code == 0
        assert via_env.output == base.output


class TestReproducibility:
    def test_identical_invocations_byte_identical(self, runner, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["moments", "--H", "1/3", "--p", "3", "--method", "mc",
                "--samples", "50000", "--seed", "17"]
        assert run(runner, *args, "--output", str(a)).exit_code == 0
        assert run(runner, *args, "--output", str(b)).exit_code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_seeded_grid_files_byte_identical(self, runner, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["grid", "--H", "2/5", "--coeffs", "seeded", "--seed", "9",
                "--level", "8", "--what", "increments"]
        run(runner, *args, "--output", str(a))
        run(runner, *args, "--output", str(b))
        assert a.read_bytes() == b.read_bytes()
