"""Cross-layer alignment of members and comparison of the two communities."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .estimate import Correlation, MemberFit, pearson, write_rows
from .graph import MemberRegistry
from .lexicon import TopicSet

QUANTITIES = ("neighbor", "trend", "authority")


@dataclass(frozen=True)
class AlignedPair:
    member_a: int
    member_b: int
    name: str
    flagged: bool = False


@dataclass(frozen=True)
class LayerAlignment:
    layer_a: str
    layer_b: str
    pairs: tuple[AlignedPair, ...] = ()

    @property
    def collisions(self) -> list[str]:
        """Shared names that are ambiguity-flagged in either layer."""
        return [p.name for p in self.pairs if p.flagged]

    def swapped(self) -> "LayerAlignment":
        return LayerAlignment(
            self.layer_b,
            self.layer_a,
            tuple(AlignedPair(p.member_b, p.member_a, p.name, p.flagged) for p in self.pairs),
        )


def align_names(
    names_a: Mapping[int, str],
    names_b: Mapping[int, str],
    flagged_a=(),
    flagged_b=(),
    layer_a: str = "A",
    layer_b: str = "B",
) -> LayerAlignment:
    """Exact join on normalized names, ordered by name."""
    if layer_a == layer_b:
        raise ValueError("alignment needs two distinct layers")
    by_name_b = {name: m for m, name in names_b.items()}
    flagged_a, flagged_b = set(flagged_a), set(flagged_b)
    pairs = []
    for ma, name in sorted(names_a.items(), key=lambda kv: kv[1]):
        mb = by_name_b.get(name)
        if mb is not None:
            pairs.append(AlignedPair(ma, mb, name, ma in flagged_a or mb in flagged_b))
    return LayerAlignment(layer_a, layer_b, tuple(pairs))


def align_layers(registry_a: MemberRegistry, registry_b: MemberRegistry) -> LayerAlignment:
    return align_names(
        dict(enumerate(registry_a.names)),
        dict(enumerate(registry_b.names)),
        registry_a.flagged,
        registry_b.flagged,
        registry_a.layer or "A",
        registry_b.layer or "B",
    )


def _value(fit: MemberFit, quantity: str, use_raw: bool) -> float:
    if quantity == "authority":
        return fit.authority
    x = fit.x_raw if use_raw else fit.x_proj
    return x[0] if quantity == "neighbor" else x[1]


def _mean(values) -> float:
    vals = [v for v in values if math.isfinite(v)]
    return math.fsum(vals) / len(vals) if vals else math.nan


@dataclass
class ComparisonReport:
    layers: tuple[str, str]
    n_shared: int
    shared_means: dict[str, dict[str, float]]
    whole_means: dict[str, dict[str, float]]
    correlations: dict[str, Correlation]
    scatter: dict[str, list[dict]] = field(default_factory=dict)
    collisions: list[str] = field(default_factory=list)

    @property
    def correlations_available(self) -> bool:
        return any(c.defined for c in self.correlations.values())

    def table_rows(self) -> list[list]:
        """Rows of the comparison table: one per layer, then correlations."""
        rows = []
        for layer in self.layers:
            row = [layer]
            for q in QUANTITIES:
                row += [self.shared_means[layer][q], self.whole_means[layer][q]]
            rows.append(row)
        corr = ["correlation"]
        for q in QUANTITIES:
            c = self.correlations[q]
            corr += [c.value if c.defined else "unavailable", ""]
        rows.append(corr)
        return rows

    def to_dict(self) -> dict:
        return {
            "layers": list(self.layers),
            "n_shared": self.n_shared,
            "shared_means": self.shared_means,
            "whole_means": self.whole_means,
            "correlations": {
                q: ({"value": c.value, "n": c.n} if c.defined else {"value": None, "n": c.n})
                for q, c in self.correlations.items()
            },
            "collisions": self.collisions,
        }


def _dominant(a: float, b: float, layer_a: str, layer_b: str) -> str:
    if a > b:
        return layer_a
    if b > a:
        return layer_b
    return "tie"


def compare_communities(
    fits_a: Mapping[int, MemberFit],
    fits_b: Mapping[int, MemberFit],
    alignment: LayerAlignment,
    use_raw: bool = False,
) -> ComparisonReport:
    """Community averages (shared members and whole layer) and cross-layer correlations.

    Only fits with a usable status count. Shared-member statistics use the
    aligned members fitted in both layers.
    """
    la, lb = alignment.layer_a, alignment.layer_b
    valid_a = {m: f for m, f in fits_a.items() if f.fitted}
    valid_b = {m: f for m, f in fits_b.items() if f.fitted}
    shared = [p for p in alignment.pairs if p.member_a in valid_a and p.member_b in valid_b]

    shared_means, whole_means, correlations, scatter = {la: {}, lb: {}}, {la: {}, lb: {}}, {}, {}
    for q in QUANTITIES:
        va = [_value(valid_a[p.member_a], q, use_raw) for p in shared]
        vb = [_value(valid_b[p.member_b], q, use_raw) for p in shared]
        shared_means[la][q] = _mean(va)
        shared_means[lb][q] = _mean(vb)
        whole_means[la][q] = _mean(_value(f, q, use_raw) for f in valid_a.values())
        whole_means[lb][q] = _mean(_value(f, q, use_raw) for f in valid_b.values())
        ok = [i for i in range(len(shared)) if math.isfinite(va[i]) and math.isfinite(vb[i])]
        correlations[q] = pearson([va[i] for i in ok], [vb[i] for i in ok])
        scatter[q] = [
            {
                "name": p.name,
                "value_in_a": va[i],
                "value_in_b": vb[i],
                "dominant_layer": _dominant(va[i], vb[i], la, lb),
                "flagged": int(p.flagged),
            }
            for i, p in enumerate(shared)
        ]
    return ComparisonReport(
        (la, lb), len(shared), shared_means, whole_means, correlations, scatter,
        alignment.collisions,
    )


TABLE_HEADER = [
    "community",
    "neighbor_susceptibility_shared", "neighbor_susceptibility_whole",
    "trend_susceptibility_shared", "trend_susceptibility_whole",
    "authority_shared", "authority_whole",
]


def write_report(report: ComparisonReport, out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = [write_rows(os.path.join(out_dir, "comparison.csv"), TABLE_HEADER, report.table_rows())]
    js = os.path.join(out_dir, "comparison.json")
    with open(js, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(report.to_dict()), fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(js)
    la, lb = report.layers
    for q in QUANTITIES:
        paths.append(
            write_rows(
                os.path.join(out_dir, f"scatter_{q}.csv"),
                ["name", f"value_in_{la}", f"value_in_{lb}", "dominant_layer", "flagged"],
                [
                    [r["name"], r["value_in_a"], r["value_in_b"], r["dominant_layer"], r["flagged"]]
                    for r in report.scatter[q]
                ],
            )
        )
    return paths


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


@dataclass(frozen=True)
class IntegratedDomain:
    """Union of two topic bases; bridged topic pairs share one integrated id.

    Unbridged topics stay layer-local under ``"<layer>:<topic_id>"``.
    """

    layers: tuple[str, str]
    rows: tuple[tuple[str, Optional[str], Optional[str]], ...]

    def integrated_id(self, layer: str, topic_id: str) -> Optional[str]:
        col = 1 if layer == self.layers[0] else 2
        for row in self.rows:
            if row[col] == topic_id:
                return row[0]
        return None

    @property
    def n_shared(self) -> int:
        return sum(1 for _, a, b in self.rows if a is not None and b is not None)


def load_bridge(path) -> list[tuple[str, str]]:
    """Bridge CSV with a ``topic_id_a,topic_id_b`` header."""
    with open(path, newline="", encoding="utf-8") as fh:
        return [(row["topic_id_a"].strip(), row["topic_id_b"].strip()) for row in csv.DictReader(fh)]


def integrate_domains(
    topics_a: TopicSet,
    topics_b: TopicSet,
    bridge=(),
    layer_a: str = "A",
    layer_b: str = "B",
) -> IntegratedDomain:
    ids_a, ids_b = set(topics_a.ids), set(topics_b.ids)
    a_to_b: dict[str, str] = {}
    used_b: set[str] = set()
    for ta, tb in bridge:
        if ta not in ids_a or tb not in ids_b:
            raise ValueError(f"bridge pair ({ta}, {tb}) names an unknown topic")
        if ta in a_to_b or tb in used_b:
            raise ValueError(f"topic bridged twice in pair ({ta}, {tb})")
        a_to_b[ta] = tb
        used_b.add(tb)
    rows = [(f"{ta}={a_to_b[ta]}", ta, a_to_b[ta]) for ta in sorted(a_to_b)]
    rows += [(f"{layer_a}:{ta}", ta, None) for ta in sorted(ids_a - set(a_to_b))]
    rows += [(f"{layer_b}:{tb}", None, tb) for tb in sorted(ids_b - used_b)]
    return IntegratedDomain((layer_a, layer_b), tuple(rows))


def write_domain(domain: IntegratedDomain, path) -> str:
    la, lb = domain.layers
    return write_rows(
        path,
        ["integrated_id", f"topic_id_{la}", f"topic_id_{lb}"],
        [[i, a or "", b or ""] for i, a, b in domain.rows],
    )
