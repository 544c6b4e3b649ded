import pytest

from semdiff.config import ConfigValidationError, config_hash, load_config, parse_config


def test_sample_config_loads(sample_dir):
    cfg = load_config(f"{sample_dir}/run.toml")
    assert sorted(cfg.layers) == ["aps", "dblp"]
    assert cfg.layers["dblp"].format == "xml"
    assert (cfg.year_min, cfg.year_max, cfg.top_k, cfg.top_n) == (2000, 2004, 50, 5)
    assert cfg.digest == load_config(f"{sample_dir}/run.toml").digest


def _error(text, **kw):
    with pytest.raises(ConfigValidationError) as exc:
        parse_config(text, source="run.toml", check_paths=kw.get("check_paths", False))
    return str(exc.value)


def test_line_numbers():
    assert _error('seed = 1\n\n[profile]\nmode = "weekly"\n').startswith("run.toml:4:")
    assert _error('[corpus]\nyear_min = 2005\nyear_max = 2000\n').startswith("run.toml:2:")
    assert _error('[fit]\ntop_k = "ten"\n').startswith("run.toml:2:")
    assert _error('[report]\nbins = 3\n').startswith("run.toml:2:")
    assert _error('[nonsense]\n').startswith("run.toml:1:")
    assert _error('[profile]\nmode = "windowed"\n').startswith("run.toml:2:")


def test_missing_path_reported_with_line(tmp_path):
    msg = _error('[layers.x]\nformat = "jsonl"\nrecords = "nope.jsonl"\n', check_paths=True)
    assert msg.startswith("run.toml:3:") and "nope.jsonl" in msg


def test_simulation_needs_seed():
    assert "seed" in _error("[simulation]\nn_members = 3\n")


def test_syntax_error():
    assert _error("seed = = 1").startswith("run.toml")


def test_top_k_zero_means_all():
    assert parse_config("[fit]\ntop_k = 0\n", check_paths=False).top_k is None


def test_hash_is_order_free():
    assert config_hash({"a": 1, "b": {"c": 2}}) == config_hash({"b": {"c": 2}, "a": 1})
    assert config_hash({}) is None
