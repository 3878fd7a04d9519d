import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from frackirchhoff import GNCache, RadialGrid, read_field
from frackirchhoff.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_PARTIAL,
    ConfigError,
    RunConfig,
    main,
    validate,
)

from conftest import MIXED


@pytest.fixture(scope="session")
def cache_file(tmp_path_factory, gn_constants):
    path = tmp_path_factory.mktemp("cache") / "gn.json"
    cache = GNCache(path)
    grid = RadialGrid()
    cache.put(MIXED.s, MIXED.q, grid, gn_constants[0])
    cache.put(MIXED.s, MIXED.p, grid, gn_constants[1])
    return str(path)


def _manifest(out: Path) -> dict:
    return json.loads((out / "manifest.json").read_text())


class TestConfig:
    def test_equal_exponents_rejected(self, tmp_path, capsys):
        code = main(["mountain_pass", "--q", "4.7", "--p", "4.7", "--mu", "1", "--out", str(tmp_path)])
        assert code == EXIT_CONFIG
        assert "2<q<p<2_{s}^{\\ast}" in capsys.readouterr().err

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown config keys: bogus"):
            RunConfig.from_dict({"mode": "thresholds", "bogus": 1})

    @pytest.mark.parametrize(
        "kwargs, field",
        [
            ({"mode": "local_min"}, "mu"),
            ({"mode": "mountain_pass", "q": 3.5}, "q, p"),
            ({"mode": "thresholds", "q": 4.5, "p": 4.8}, "q, p"),
            ({"mode": "sweep", "mu_ladder": [1.0, 2.0]}, "mu_ladder"),
            ({"mode": "verify"}, "field"),
            ({"mode": "verify", "field": "/nonexistent.csv"}, "field"),
            ({"mode": "mountain_pass", "mu": 1.0, "tol_el": 0.0}, "tol_el"),
            ({"mode": "nope"}, "mode"),
        ],
    )
    def test_validation_names_the_field(self, kwargs, field):
        with pytest.raises(ConfigError, match=field):
            validate(RunConfig(**kwargs))

    def test_config_file_and_flag_override(self, tmp_path, cache_file):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"mode": "thresholds", "mu": 1.0, "gn_cache": cache_file}))
        out = tmp_path / "run"
        assert main(["thresholds", "--config", str(cfg), "--mu", "2.0", "--out", str(out)]) == EXIT_OK
        assert _manifest(out)["config"]["mu"] == 2.0


class TestModes:
    def test_thresholds(self, tmp_path, cache_file, gn_constants):
        out = tmp_path / "th"
        assert main(["thresholds", "--mu", "1000", "--gn-cache", cache_file, "--out", str(out)]) == EXIT_OK
        man = _manifest(out)
        assert man["exit_status"] == 0
        assert man["gn_constants"]["C_q"]["value"] == gn_constants[0]
        assert man["gn_constants"]["C_q"]["source"] == "cache"
        th = man["thresholds"]
        assert th["mu_1"] > 0 and th["mu_2"] > 0 and 0 < th["R0"] < th["R1"]
        assert "tables/thresholds.csv" in man["artifacts"]
        assert (out / "logs" / "run.log").exists()

    def test_gn_constant_mode(self, tmp_path):
        out = tmp_path / "gn"
        assert main(["gn_constant", "--grid", "20,1024", "--out", str(out)]) == EXIT_OK
        man = _manifest(out)
        assert man["gn_constants"]["C_p"]["n"] == 1024
        assert man["gn_constants"]["C_p"]["source"] == "computed"

    def test_local_min_above_window_fails(self, tmp_path, cache_file):
        out = tmp_path / "lm"
        code = main(["local_min", "--mu", "1e12", "--gn-cache", cache_file, "--out", str(out)])
        assert code == EXIT_PARTIAL
        assert "min(mu_1, mu_2)" in _manifest(out)["error"]

    def test_mountain_pass_and_verify(self, tmp_path, capsys):
        out = tmp_path / "mp"
        assert main(["mountain_pass", "--q", "4.5", "--p", "4.8", "--mu", "1", "--out", str(out)]) == EXIT_OK
        man = _manifest(out)
        rep = man["reports"]["mountain_pass"]
        assert rep["converged"] and rep["classification"] == "P_minus"
        field = out / rep["field_csv"]
        u, meta = read_field(field)
        assert meta["s"] == 0.9

        vout = tmp_path / "verify"
        capsys.readouterr()
        code = main(["verify", "--q", "4.5", "--p", "4.8", "--mu", "1", "--field", str(field), "--out", str(vout)])
        assert code == EXIT_OK
        lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith(("PASS", "FAIL"))]
        assert len(lines) == 7 and all(line.startswith("PASS") for line in lines)
        assert all(v["pass"] for v in _manifest(vout)["verify"].values())

        # the same field fails verification for a different problem
        code = main(["verify", "--q", "4.5", "--p", "4.8", "--mu", "5", "--field", str(field), "--out", str(vout)])
        assert code == EXIT_PARTIAL

    def test_rerun_from_manifest(self, tmp_path):
        first = tmp_path / "a"
        assert main(["mu_zero", "--out", str(first)]) == EXIT_OK
        second = tmp_path / "b"
        assert main(["mu_zero", "--config", str(first / "manifest.json"), "--out", str(second)]) == EXIT_OK
        la = _manifest(first)["reports"]["mu_zero"]["level"]
        lb = _manifest(second)["reports"]["mu_zero"]["level"]
        assert lb == pytest.approx(la, rel=1e-12, abs=0.0)

    def test_partial_sweep(self, tmp_path, cache_file):
        out = tmp_path / "sw"
        code = main(["sweep", "--mu-ladder", "1e12,1e6", "--gn-cache", cache_file, "--out", str(out)])
        assert code == EXIT_PARTIAL
        man = _manifest(out)
        assert man["sweep"][0]["status"].startswith("local_min failed")
        assert man["sweep"][1]["status"] == "ok"
        assert math.isnan(man["sweep"][0]["m_level"])
        header = (out / "tables" / "sweep.csv").read_text().splitlines()[0]
        assert header.startswith("mu,m_level,sigma_level")

    def test_supercritical_sweep_default_ladder(self, tmp_path):
        out = tmp_path / "ssw"
        args = ["sweep", "--q", "4.5", "--p", "4.8", "--mu", "1", "--ladder-rungs", "3", "--out", str(out)]
        assert main(args) == EXIT_OK
        assert _manifest(out)["mu_ladder"] == [1.0, 0.5, 0.25]


class TestDeterminism:
    def test_identical_runs(self, tmp_path):
        args = ["mountain_pass", "--q", "4.5", "--p", "4.8", "--mu", "1"]
        assert main(args + ["--out", str(tmp_path / "x")]) == EXIT_OK
        assert main(args + ["--out", str(tmp_path / "y")]) == EXIT_OK
        files = sorted(p.relative_to(tmp_path / "x") for p in (tmp_path / "x").rglob("*.csv"))
        assert files
        for rel in files:
            assert (tmp_path / "x" / rel).read_bytes() == (tmp_path / "y" / rel).read_bytes()


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "frackirchhoff", "thresholds", "--q", "4.5", "--p", "4.8", "--out", str(tmp_path)],
            capture_output=True, text=True,
        )
        assert proc.returncode == EXIT_CONFIG
        assert "mixed regime" in proc.stderr
