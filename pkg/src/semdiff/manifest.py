"""Reproducibility manifests written next to every stage output."""

from __future__ import annotations

import hashlib
import json
import os
from collections import Counter
from typing import Iterable, Optional

from . import __version__


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _digests(paths: Iterable[str]) -> dict[str, str]:
    files: list[tuple[str, str]] = []  # (full path, short name)
    for p in paths:
        if os.path.isdir(p):
            top = os.path.basename(os.path.normpath(p))
            for name in sorted(os.listdir(p)):
                full = os.path.join(p, name)
                if os.path.isfile(full) and name != "manifest.json":
                    files.append((full, f"{top}/{name}"))
        elif os.path.exists(p):
            files.append((p, os.path.basename(p)))
    counts = Counter(short for _, short in files)
    out = {}
    for full, short in files:
        if counts[short] > 1:
            # same base name from different places: qualify with the parent directory
            parent = os.path.basename(os.path.dirname(os.path.abspath(full)))
            short = f"{parent}/{os.path.basename(full)}"
        out[short] = file_digest(full)
    return dict(sorted(out.items()))


def manifest_path(output: str) -> str:
    if os.path.isdir(output):
        return os.path.join(output, "manifest.json")
    return output + ".manifest.json"


def write_manifest(
    stage: str,
    output: str,
    inputs: Iterable[str] = (),
    outputs: Iterable[str] = (),
    config_hash: Optional[str] = None,
    parameters: Optional[dict] = None,
) -> str:
    """Record stage, version, config hash, and input/output digests.

    Only base names are stored, so reruns into another directory produce the
    same bytes.
    """
    data = {
        "stage": stage,
        "semdiff_version": __version__,
        "config_hash": config_hash,
        "parameters": parameters or {},
        "inputs": _digests(inputs),
        "outputs": _digests(outputs),
    }
    path = manifest_path(output)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return path
