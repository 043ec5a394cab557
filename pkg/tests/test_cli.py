import json
import time

import numpy as np
import pytest

from xychain import cli, pipeline
from xychain.cache import CODE_TAG, CacheKey, ResultCache, round_sig
from xychain.errors import ConfigError, NumericalIntegrityError
from xychain.export import export_table, read_table


def run(tmp_path, *argv):
    return cli.run_command([*argv])


def test_lambda_grid_parsing():
    np.testing.assert_allclose(pipeline.lambda_grid("0:2:0.02")[[0, 1, -1]], [0, 0.02, 2.0])
    assert len(pipeline.lambda_grid("0:2:0.02")) == 101
    assert pipeline.lambda_grid("0.3,0.5").tolist() == [0.3, 0.5]
    assert pipeline.lambda_grid("0.1:0.3:0.1").tolist() == [0.1, 0.2, 0.3]
    for bad in ("1:0:0.1", "0:1:0", "0:1", "a,b", "", "0.5,0.3"):
        with pytest.raises(ConfigError):
            pipeline.lambda_grid(bad)


def test_cache_roundtrip(tmp_path):
    cache = ResultCache(tmp_path)
    key = CacheKey("tangle", "k_max=4", 48, 1.0, 0.1 + 0.2)
    assert cache.load(key) is None and cache.misses == 1
    value = {"values": [0.1 + 0.2, 1 / 3], "sector": "antiperiodic"}
    cache.store(key, value)
    assert cache.load(key) == value
    cache.store(key, value)  # idempotent
    with pytest.raises(RuntimeError):
        cache.store(key, {"values": [0.0]})


def test_cache_key_canonicalization():
    a = CacheKey("noise", "", 32, 1.0, 0.3)
    b = CacheKey("noise", "", 32, 1.0, 0.30000000000000004)
    assert a.digest == b.digest
    assert a.digest != CacheKey("noise", "", 32, 1.0, 0.3, tag="other").digest
    assert round_sig(1 / 3) == "0.333333333333"
    assert CODE_TAG in a.canonical()


def test_corrupted_entry_is_a_miss(tmp_path, caplog):
    cache = ResultCache(tmp_path)
    key = CacheKey("mx", "", 16, 1.0, 0.5)
    cache.store(key, {"mx": 0.5})
    path = next(tmp_path.rglob("*.json"))
    path.write_text("{not json")
    assert cache.load(key) is None
    assert "corrupted" in caplog.text


def test_export_roundtrip(tmp_path):
    rows = [[1, 0.1 + 0.2, 1 / 3, True], None, [2, np.pi, -1e-20, False]]
    path = export_table(tmp_path / "t.csv", ["N", "a", "b", "flag"], rows, {"config_digest": "abc"})
    meta, header, parsed = read_table(path)
    assert meta["config_digest"] == "abc" and header == ["N", "a", "b", "flag"]
    assert parsed[0][1] == float("%.12g" % (0.1 + 0.2))
    assert parsed[1][2] == -1e-20 and parsed[1][3] == 0.0
    with pytest.raises(ConfigError):
        export_table(tmp_path / "e.csv", ["a"], [])


def test_noise_command_schema(tmp_path):
    out = tmp_path / "noise.csv"
    code = cli.run_command(["noise", "--N", "24", "--lambda", "0.8:1.2:0.1", "--no-cache", "--out", str(out)])
    assert code == 0
    meta, header, rows = read_table(out)
    assert header == ["lambda", "n0", "delta00", "threshold", "entangled_flag"]
    assert len(rows) == 5 and all(r[3] == 3.125 for r in rows)
    side = json.loads((tmp_path / "noise.csv.meta.json").read_text())
    assert side["config_digest"] == meta["config_digest"]
    assert set(side["sectors"].values()) <= {"antiperiodic", "periodic"}


def test_exit_codes(tmp_path, monkeypatch):
    assert cli.run_command(["tangle", "--N", "2", "--no-cache"]) == cli.EXIT_CONFIG
    assert cli.run_command(["entropy", "--N", "12", "--L", "4", "--no-cache"]) == cli.EXIT_CONFIG
    with pytest.raises(SystemExit) as exc:
        cli.run_command(["tangle", "--N", "abc"])
    assert exc.value.code == 2

    def boom(*a, **k):
        raise NumericalIntegrityError("forced")

    monkeypatch.setitem(pipeline.POINT_FUNCS, "mx", boom)
    assert cli.run_command(["mx", "--N", "8", "--lambda", "0.5", "--no-cache",
                            "--out", str(tmp_path / "m.csv")]) == cli.EXIT_NUMERICAL


def test_oracle_check_exit_codes(tmp_path, monkeypatch):
    assert cli.run_command(["oracle-check", "--sizes", "6", "--gammas", "1.0", "--lambdas", "0.5"]) == 0
    from xychain import oracle

    real = oracle.compare_point

    def skewed(params):
        comps = real(params)
        c = comps[0]
        comps[0] = oracle.Comparison(c.quantity, c.N, c.gamma, c.lam, c.fermion + 1e-6, c.exact)
        return comps

    monkeypatch.setattr(oracle, "compare_point", skewed)
    assert cli.run_command(["oracle-check", "--sizes", "6", "--gammas", "1.0", "--lambdas", "0.5"]) == cli.EXIT_ORACLE


def test_config_file_defaults(tmp_path):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({"sizes": [10], "lambda_grid": "0.5,1.0", "gamma": 0.5}))
    out = tmp_path / "mx.csv"
    assert cli.run_command(["mx", "--config", str(cfg), "--no-cache", "--out", str(out), "--N", "12"]) == 0
    _, _, rows = read_table(out)
    assert [r[0] for r in rows] == [12, 12] and [r[1] for r in rows] == [0.5, 1.0]
    cfg.write_text(json.dumps({"bogus": 1}))
    assert cli.run_command(["mx", "--config", str(cfg), "--no-cache"]) == cli.EXIT_CONFIG


def test_degenerate_point_is_perturbed(monkeypatch):
    from xychain.errors import DegenerateModeError

    calls = []
    real = pipeline.majorana_covariance

    def flaky(params):
        calls.append(params.lam)
        if len(calls) == 1:
            raise DegenerateModeError("zero mode")
        return real(params)

    monkeypatch.setattr(pipeline, "majorana_covariance", flaky)
    res = pipeline.point_mx(10, 1.0, 0.5)
    assert res["lambda_used"] == pytest.approx(0.5 + pipeline.LAMBDA_NUDGE)


def test_warm_cache_is_byte_identical_and_fast(tmp_path):
    args = ["tangle", "--N", "48", "--lambda", "0.85:1.0:0.05", "--cache-dir", str(tmp_path / "c")]
    t0 = time.perf_counter()
    assert cli.run_command(args + ["--out", str(tmp_path / "a.csv")]) == 0
    cold = time.perf_counter() - t0
    t0 = time.perf_counter()
    cache = ResultCache(tmp_path / "c")
    tasks = [pipeline.Task("tangle", 48, 1.0, l, (("k_max", 4), ("max_extent", None)))
             for l in pipeline.lambda_grid("0.85:1.0:0.05")]
    pipeline.run_tasks(tasks, cache)
    assert cli.run_command(args + ["--out", str(tmp_path / "b.csv")]) == 0
    warm = time.perf_counter() - t0
    assert cache.hit_rate >= 0.99
    assert warm * 10 <= cold
    a, b = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
    assert a == b
    nocache = tmp_path / "n.csv"
    assert cli.run_command(args[:-2] + ["--no-cache", "--out", str(nocache)]) == 0
    assert nocache.read_bytes() == a
