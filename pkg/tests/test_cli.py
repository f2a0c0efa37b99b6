import json

import numpy as np
import pytest

from bergmanlab.cli.cache import HEADER, Cache, CacheKey
from bergmanlab.cli.config import config_from_dict, domain_from_table, load_config
from bergmanlab.cli.main import main
from bergmanlab.errors import ConfigError


# ---------------------------------------------------------------------------
# config

def test_config_round_trip():
    doc = {"symbol": ["1 - abs(z1)^2", "bump(0, 0.5)"], "truncation": 60, "order": 48,
           "cuts": [0, 10, 59], "seed": 2**64 - 1, "out": "runs/x",
           "domain": {"kind": "annulus", "eps": 0.5}, "weight": {"r": 1.0},
           "thresholds": {"decay": 0.01, "persist": 0.6}}
    cfg = config_from_dict(doc)
    assert config_from_dict(cfg.to_table()) == cfg
    assert cfg.cuts == (0, 10, 59) and cfg.thresholds == (0.01, 0.6)


@pytest.mark.parametrize("doc", [
    {"bogus": 1},
    {"domain": {"kind": "disc", "colour": 1}},
    {"weight": {"r": 1, "exponent": 2}},
    {"symbol": "abs(z1"},
    {"symbol": "sin(z1)"},
    {"truncation": 0},
    {"truncation": 1.5},
    {"cuts": [0, 5, 5]},
    {"seed": -1},
    {"seed": 2**64},
    {"thresholds": {"decay": 0.6, "persist": 0.5}},
    {"weight": {"r": -1}},
    {"domain": {"kind": "annulus"}},
    {"domain": {"kind": "annulus", "eps": 1.5}},
])
def test_config_rejections(doc):
    with pytest.raises(ConfigError):
        config_from_dict(doc)


def test_lens_aliases_and_toml(tmp_path):
    dom = domain_from_table({"kind": "lens", "parent": {"kind": "annulus", "eps": 0.5},
                             "lens_center": 1.0, "lens_radius": 0.4})
    assert dom.kind == "lens" and dom.radius == 0.4 and dom.center[0] == 1
    path = tmp_path / "run.toml"
    path.write_text('symbol = "abs(z1)^2"\ndomain.kind = "disc"\nweight.r = 2.0\n')
    cfg = load_config(path)
    assert cfg.symbol == ("abs(z1)^2",) and cfg.weight == {"r": 2.0}
    path.write_text("symbol = \n")
    with pytest.raises(ConfigError):
        load_config(path)


# ---------------------------------------------------------------------------
# cache

KEY = CacheKey("gram", "disc[n=1]", "r=0", 10, 64, "phi=abs(z1)^2")


def _matrix():
    rng = np.random.default_rng(0)
    return rng.standard_normal((11, 11)) + 1j * rng.standard_normal((11, 11))


def test_cache_round_trip_bit_for_bit(tmp_path):
    cache = Cache(tmp_path)
    A = _matrix()
    assert cache.get(KEY) is None
    assert cache.put(KEY, A)
    B = cache.get(KEY)
    assert B.dtype == A.dtype and B.tobytes() == A.tobytes()
    # write-once: a valid entry is never replaced
    assert not cache.put(KEY, 2 * A)
    assert cache.get(KEY).tobytes() == A.tobytes()


def test_cache_key_fields_separate_entries(tmp_path):
    cache = Cache(tmp_path)
    cache.put(KEY, _matrix())
    for other in (CacheKey("gram", "disc[n=1]", "r=1", 10, 64, "phi=abs(z1)^2"),
                  CacheKey("gram", "disc[n=1]", "r=0", 11, 64, "phi=abs(z1)^2"),
                  CacheKey("gram", "disc[n=1]", "r=0", 10, 32, "phi=abs(z1)^2"),
                  CacheKey("norms", "disc[n=1]", "r=0", 10, 64, "phi=abs(z1)^2")):
        assert cache.get(other) is None


def test_cache_version_mismatch_is_a_miss(tmp_path):
    cache = Cache(tmp_path)
    cache.put(KEY, _matrix())
    path = cache.path(KEY)
    blob = bytearray(path.read_bytes())
    magic, version, kind, length = HEADER.unpack_from(blob)
    HEADER.pack_into(blob, 0, magic, version + 1, kind, length)
    path.write_bytes(bytes(blob))
    assert cache.get(KEY) is None


@pytest.mark.parametrize("damage", ["flip", "truncate", "empty"])
def test_cache_corruption_recomputes(tmp_path, damage):
    cache = Cache(tmp_path)
    A = _matrix()
    cache.put(KEY, A)
    path = cache.path(KEY)
    blob = bytearray(path.read_bytes())
    if damage == "flip":
        blob[-5] ^= 0xFF
    elif damage == "truncate":
        blob = blob[: len(blob) // 2]
    else:
        blob = bytearray()
    path.write_bytes(bytes(blob))
    assert cache.get(KEY) is None
    # a corrupt entry is overwritten by the next store
    assert cache.put(KEY, A)
    assert cache.get(KEY).tobytes() == A.tobytes()


def test_cache_stat_and_clear(tmp_path):
    cache = Cache(tmp_path)
    cache.put(KEY, _matrix())
    st = cache.stat()
    assert st["entries"] == 1 and st["by_kind"]["gram"] == 1
    assert cache.clear() == 1 and cache.stat()["entries"] == 0


# ---------------------------------------------------------------------------
# command line

def _run(argv, tmp_path):
    return main(argv + ["--out", str(tmp_path / "out"), "--cache-dir", str(tmp_path / "cache")])


def test_exit_ok_and_outputs(tmp_path, capsys):
    assert _run(["scenario", "dichotomy"], tmp_path) == 0
    out = tmp_path / "out"
    doc = json.loads((out / "dichotomy.json").read_text())
    assert "timestamp" in doc and doc["config"]["thresholds"] == [0.05, 0.5]
    assert sorted(p.name for p in out.glob("dichotomy_*.csv"))


def test_exit_assertion_failure_still_writes_report(tmp_path):
    cfg = tmp_path / "strict.toml"
    cfg.write_text("thresholds.decay = 1e-6\nthresholds.persist = 0.5\n")
    code = _run(["scenario", "dichotomy", "--config", str(cfg)], tmp_path)
    assert code == 1
    assert (tmp_path / "out" / "dichotomy.json").exists()


@pytest.mark.parametrize("argv", [
    ["scenario", "no-such-scenario"],
    ["toeplitz", "--symbol", "abs(z1"],
    ["toeplitz", "--domain", "annulus"],
    ["frobnicate"],
    ["kernel", "--seed", "-3"],
])
def test_exit_usage_errors(tmp_path, argv, capsys):
    assert _run(argv, tmp_path) == 2
    assert "error" in capsys.readouterr().err


def test_exit_numerical_error(tmp_path, capsys):
    assert _run(["kernel", "--w", "0", "--z", "1.5"], tmp_path) == 3
    assert "numerical error" in capsys.readouterr().err


def _csvs(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.glob("*.csv"))}


def test_scenario_csvs_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["scenario", "dichotomy", "--seed", "5", "--out", str(d), "--no-cache"]) == 0
    assert _csvs(a) and _csvs(a) == _csvs(b)


def test_warm_cache_matches_cold(tmp_path):
    cache = tmp_path / "cache"
    runs = []
    for name in ("cold", "warm", "none"):
        argv = ["scenario", "dichotomy", "--out", str(tmp_path / name)]
        argv += ["--no-cache"] if name == "none" else ["--cache-dir", str(cache)]
        assert main(argv) == 0
        runs.append(_csvs(tmp_path / name))
    assert runs[0] == runs[1] == runs[2]
    assert Cache(cache).stat()["entries"] > 0


def test_subcommands_run(tmp_path):
    assert _run(["kernel", "--w", "0.2", "--z", "0.3"], tmp_path) == 0
    assert _run(["toeplitz", "--size", "4", "--symbol", "abs(z1)^2"], tmp_path) == 0
    assert _run(["berezin", "--z", "0.3", "--symbol", "1 - abs(z1)^2"], tmp_path) == 0
    assert _run(["diagnose", "--symbol", "bump(0, 0.5)", "--truncation", "40"], tmp_path) == 0
    assert _run(["inflate", "--r", "1"], tmp_path) == 0
    assert main(["cache", "stat", "--cache-dir", str(tmp_path / "cache")]) == 0
    assert main(["cache", "clear", "--cache-dir", str(tmp_path / "cache")]) == 0
    doc = json.loads((tmp_path / "out" / "toeplitz.json").read_text())
    assert doc["size"] == 4
