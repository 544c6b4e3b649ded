"""Run configuration (TOML) with line-numbered validation errors."""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class ConfigValidationError(ValueError):
    pass


@dataclass
class LayerSource:
    name: str
    records: Optional[str] = None
    format: str = "jsonl"
    topics: Optional[str] = None
    stoplist: Optional[str] = None


@dataclass
class RunConfig:
    base_dir: str = "."
    seed: Optional[int] = None
    output: str = "out"
    layers: dict[str, LayerSource] = field(default_factory=dict)
    year_min: Optional[int] = None
    year_max: Optional[int] = None
    kinds: Optional[list[str]] = None
    xml_mapping: dict = field(default_factory=dict)
    profile_mode: str = "cumulative"
    profile_window: Optional[int] = None
    top_k: Optional[int] = 50
    max_authors: Optional[int] = None
    authority_year: Optional[int] = None
    given_names: Optional[str] = None
    family_names: Optional[str] = None
    histogram_bin: float = 0.05
    top_n: int = 10
    bridge: Optional[str] = None
    simulation: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        return config_hash(self.raw)

    def path(self, p: Optional[str]) -> Optional[str]:
        if p is None:
            return None
        return p if os.path.isabs(p) else os.path.normpath(os.path.join(self.base_dir, p))


def config_hash(data: Optional[dict]) -> Optional[str]:
    if not data:
        return None
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


_SCHEMA: dict[str, dict[str, type | tuple]] = {
    "": {"seed": int, "output": str},
    "corpus": {"year_min": int, "year_max": int, "kinds": list},
    "profile": {"mode": str, "window": int},
    "fit": {"top_k": int, "max_authors": int, "authority_year": int},
    "ambiguity": {"given_names": str, "family_names": str},
    "report": {"histogram_bin": (int, float), "top_n": int},
    "multiplex": {"bridge": str},
}
_LAYER_KEYS = {"records": str, "format": str, "topics": str, "stoplist": str}


def _line_of(text: str, key: str, section: Optional[str] = None) -> int:
    """Best-effort 1-based line of ``key = ...`` (inside ``[section]`` if given)."""
    lines = text.splitlines()
    start = 0
    if section:
        pat = re.compile(r"^\s*\[\s*" + re.escape(section) + r"\s*\]")
        for i, line in enumerate(lines):
            if pat.match(line):
                start = i
                break
    kpat = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
    for i in range(start, len(lines)):
        if kpat.match(lines[i]):
            return i + 1
    return start + 1


def _fail(text, source, key, section, msg):
    line = _line_of(text, key, section)
    raise ConfigValidationError(f"{source}:{line}: {msg}")


def parse_config(text: str, base_dir: str = ".", source: str = "<config>", check_paths=True) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigValidationError(f"{source}: {exc}") from None

    known_sections = set(_SCHEMA) | {"layers", "xml", "simulation"}
    for key, value in data.items():
        if isinstance(value, dict) and key not in known_sections:
            _fail(text, source, key, None, f"unknown section [{key}]")
    for section, schema in _SCHEMA.items():
        block = data if section == "" else data.get(section, {})
        if not isinstance(block, dict):
            _fail(text, source, section, None, f"[{section}] must be a table")
        for key, value in block.items():
            if section == "" and isinstance(value, dict):
                continue
            if key not in schema:
                _fail(text, source, key, section or None, f"unknown key {key!r}")
            if isinstance(value, bool) or not isinstance(value, schema[key]):
                _fail(text, source, key, section or None, f"{key!r} has the wrong type")

    corpus, profile, fit = data.get("corpus", {}), data.get("profile", {}), data.get("fit", {})
    amb, report = data.get("ambiguity", {}), data.get("report", {})
    cfg = RunConfig(
        base_dir=base_dir,
        seed=data.get("seed"),
        output=data.get("output", "out"),
        year_min=corpus.get("year_min"),
        year_max=corpus.get("year_max"),
        kinds=corpus.get("kinds") or None,
        xml_mapping=data.get("xml", {}),
        profile_mode=profile.get("mode", "cumulative"),
        profile_window=profile.get("window"),
        top_k=None if fit.get("top_k", 50) == 0 else fit.get("top_k", 50),
        max_authors=fit.get("max_authors") or None,
        authority_year=fit.get("authority_year"),
        given_names=amb.get("given_names"),
        family_names=amb.get("family_names"),
        histogram_bin=float(report.get("histogram_bin", 0.05)),
        top_n=report.get("top_n", 10),
        bridge=data.get("multiplex", {}).get("bridge"),
        simulation=data.get("simulation", {}),
        raw=data,
    )
    if cfg.year_min is not None and cfg.year_max is not None and cfg.year_min > cfg.year_max:
        _fail(text, source, "year_min", "corpus", "year_min exceeds year_max")
    if cfg.profile_mode not in ("cumulative", "windowed"):
        _fail(text, source, "mode", "profile", f"unknown profile mode {cfg.profile_mode!r}")
    if cfg.profile_mode == "windowed" and not cfg.profile_window:
        _fail(text, source, "mode", "profile", "windowed profiles need a positive window")
    if cfg.histogram_bin <= 0:
        _fail(text, source, "histogram_bin", "report", "histogram_bin must be positive")
    if cfg.simulation and cfg.seed is None:
        _fail(text, source, "simulation", None, "a seed is required when [simulation] is present")

    for name, block in data.get("layers", {}).items():
        if not isinstance(block, dict):
            _fail(text, source, name, "layers", f"layer {name!r} must be a table")
        for key, value in block.items():
            if key not in _LAYER_KEYS or not isinstance(value, _LAYER_KEYS[key]):
                _fail(text, source, key, f"layers.{name}", f"bad layer key {key!r}")
        cfg.layers[name] = LayerSource(name, **block)

    if check_paths:
        refs = [
            ("given_names", "ambiguity", cfg.given_names),
            ("family_names", "ambiguity", cfg.family_names),
            ("bridge", "multiplex", cfg.bridge),
        ]
        for name, layer in cfg.layers.items():
            refs += [(k, f"layers.{name}", getattr(layer, k)) for k in ("records", "topics", "stoplist")]
        for key, section, value in refs:
            if value is not None and not os.path.exists(cfg.path(value)):
                _fail(text, source, key, section, f"{key} path {value!r} does not exist")
    return cfg


def load_config(path: str, check_paths: bool = True) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, os.path.dirname(os.path.abspath(path)), path, check_paths)


def config_value(cfg: Optional[RunConfig], attr: str, default: Any = None) -> Any:
    if cfg is None:
        return default
    value = getattr(cfg, attr)
    return default if value is None else value
