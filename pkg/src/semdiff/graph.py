"""Cumulative temporal co-authorship graph of one layer.

Members are distinct normalized names; an undirected, unweighted edge joins
two members from the first year they share a paper, and is never removed.
An edge created by a year-``y`` paper is active in ``y`` itself.
"""

from __future__ import annotations

import bisect
import csv
import itertools
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .corpus import PublicationRecord, normalize_name
from .unionfind import UnionFind

logger = logging.getLogger(__name__)


@dataclass
class MemberRegistry:
    layer: str
    names: list[str]
    years: list[frozenset[int]]
    n_papers: list[int]
    flagged: set[int] = field(default_factory=set)

    def __post_init__(self):
        self._ids = {name: i for i, name in enumerate(self.names)}

    def __len__(self):
        return len(self.names)

    def id_of(self, name: str) -> Optional[int]:
        return self._ids.get(name)

    def first_year(self, member: int) -> int:
        return min(self.years[member])


class TemporalLayerGraph:
    """Edges keyed by unordered member pair with the year they first appear.

    After :meth:`freeze` the per-member neighbor lists are sorted by year so
    ``neighbors(i, t)`` is a bisect plus a slice.
    """

    def __init__(self, layer: str, n_members: int, node_years: Optional[list[int]] = None):
        self.layer = layer
        self.n_members = n_members
        self.node_years = list(node_years) if node_years is not None else [0] * n_members
        self.edges: dict[tuple[int, int], int] = {}
        self._frozen = False

    def add_edge(self, a: int, b: int, year: int) -> None:
        if self._frozen:
            raise RuntimeError("graph is frozen")
        if a == b:
            return
        key = (a, b) if a < b else (b, a)
        prev = self.edges.get(key)
        if prev is None or year < prev:
            self.edges[key] = year

    def freeze(self) -> "TemporalLayerGraph":
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_members)]
        for (a, b), y in self.edges.items():
            adj[a].append((y, b))
            adj[b].append((y, a))
        self._adj_years = []
        self._adj_nbrs = []
        for lst in adj:
            lst.sort()
            self._adj_years.append([y for y, _ in lst])
            self._adj_nbrs.append([j for _, j in lst])
        self._frozen = True
        return self

    def neighbors(self, member: int, year: Optional[int] = None) -> list[int]:
        """Neighbors of ``member`` among edges with first year <= ``year``."""
        if not self._frozen:
            self.freeze()
        if year is None:
            return sorted(self._adj_nbrs[member])
        k = bisect.bisect_right(self._adj_years[member], year)
        return sorted(self._adj_nbrs[member][:k])

    def degree(self, member: int, year: Optional[int] = None) -> int:
        if not self._frozen:
            self.freeze()
        if year is None:
            return len(self._adj_nbrs[member])
        return bisect.bisect_right(self._adj_years[member], year)

    def neighbor_lists(self, year: Optional[int] = None) -> list[list[int]]:
        return [self.neighbors(i, year) for i in range(self.n_members)]

    def n_edges(self, year: Optional[int] = None) -> int:
        if year is None:
            return len(self.edges)
        return sum(1 for y in self.edges.values() if y <= year)

    def edge_rows(self) -> list[tuple[int, int, int]]:
        return sorted((a, b, y) for (a, b), y in self.edges.items())


def build_graph(
    records: Iterable[PublicationRecord],
    layer: str,
    max_authors: Optional[int] = None,
) -> tuple[MemberRegistry, TemporalLayerGraph]:
    """Registry and cumulative co-authorship graph for one layer.

    Member ids follow the sorted order of names, so the result does not depend
    on record order. Papers with more than ``max_authors`` authors still count
    towards their authors' years and paper totals but create no edges.
    """
    years: dict[str, set[int]] = {}
    papers: dict[str, int] = {}
    pair_years: dict[tuple[str, str], int] = {}
    n_skipped = 0
    for rec in records:
        if rec.layer and layer and rec.layer != layer:
            raise ValueError(f"record {rec.record_id} belongs to layer {rec.layer!r}, not {layer!r}")
        authors = sorted(set(rec.authors))
        for name in authors:
            years.setdefault(name, set()).add(rec.year)
            papers[name] = papers.get(name, 0) + 1
        if max_authors is not None and len(authors) > max_authors:
            n_skipped += 1
            continue
        for a, b in itertools.combinations(authors, 2):
            prev = pair_years.get((a, b))
            if prev is None or rec.year < prev:
                pair_years[(a, b)] = rec.year
    if n_skipped:
        logger.info("%d hyper-authored papers excluded from edge creation", n_skipped)
    names = sorted(years)
    registry = MemberRegistry(
        layer=layer,
        names=names,
        years=[frozenset(years[n]) for n in names],
        n_papers=[papers[n] for n in names],
    )
    graph = TemporalLayerGraph(layer, len(names), [min(years[n]) for n in names])
    for (a, b), y in pair_years.items():
        graph.add_edge(registry.id_of(a), registry.id_of(b), y)
    return registry, graph.freeze()


@dataclass(frozen=True)
class TreatabilityReport:
    treatable: tuple[bool, ...]
    n_distinct_years: tuple[int, ...]

    @property
    def n_treatable(self) -> int:
        return sum(self.treatable)


def classify_treatable(registry: MemberRegistry) -> TreatabilityReport:
    counts = tuple(len(y) for y in registry.years)
    return TreatabilityReport(tuple(c >= 2 for c in counts), counts)


@dataclass(frozen=True)
class SnapshotStats:
    n_nodes: int
    n_edges: int
    largest_component: int
    n_isolated: int
    n_small_components: int


def snapshot_stats(graph: TemporalLayerGraph, year: int) -> SnapshotStats:
    """Component census of the graph as it stood at ``year``.

    Nodes are members whose first paper is no later than ``year``. Small
    components are all non-singleton components except the largest.
    """
    nodes = [i for i in range(graph.n_members) if graph.node_years[i] <= year]
    if not nodes:
        return SnapshotStats(0, 0, 0, 0, 0)
    uf = UnionFind(graph.n_members)
    n_edges = 0
    for (a, b), y in graph.edges.items():
        if y <= year:
            uf.union(a, b)
            n_edges += 1
    sizes = uf.component_sizes(nodes)
    n_isolated = sum(1 for s in sizes if s == 1)
    n_small = sum(1 for s in sizes[1:] if s > 1)
    return SnapshotStats(len(nodes), n_edges, sizes[0], n_isolated, n_small)


def frequent_names(given_names: Iterable[str], family_names: Iterable[str]) -> set[str]:
    """Every "given family" combination, normalized."""
    family = [normalize_name(f) for f in family_names if f.strip()]
    return {
        normalize_name(f"{g} {f}")
        for g in (normalize_name(g) for g in given_names if g.strip())
        for f in family
    }


def flag_ambiguous(registry: MemberRegistry, names: Iterable[str]) -> set[int]:
    """Members whose name is one of ``names``; also recorded on the registry."""
    hits = {registry.id_of(normalize_name(n)) for n in names}
    hits.discard(None)
    registry.flagged |= hits
    return hits


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def load_frequent_names(given_path, family_path) -> set[str]:
    return frequent_names(_read_lines(given_path), _read_lines(family_path))


def write_graph(registry: MemberRegistry, graph: TemporalLayerGraph, out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    edges_path = os.path.join(out_dir, "edges.csv")
    reg_path = os.path.join(out_dir, "registry.csv")
    with open(edges_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["member_id_a", "member_id_b", "first_year"])
        w.writerows(graph.edge_rows())
    with open(reg_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["member_id", "name", "first_year", "n_papers", "n_years", "flagged", "years"])
        for i, name in enumerate(registry.names):
            yrs = sorted(registry.years[i])
            w.writerow(
                [i, name, yrs[0], registry.n_papers[i], len(yrs),
                 int(i in registry.flagged), " ".join(map(str, yrs))]
            )
    return [edges_path, reg_path]


def read_graph(in_dir, layer: str = "") -> tuple[MemberRegistry, TemporalLayerGraph]:
    names, years, n_papers, flagged = [], [], [], set()
    with open(os.path.join(in_dir, "registry.csv"), newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            i = int(row["member_id"])
            if i != len(names):
                raise ValueError("registry.csv member ids must be dense and ordered")
            names.append(row["name"])
            years.append(frozenset(int(y) for y in row["years"].split()))
            n_papers.append(int(row["n_papers"]))
            if row.get("flagged") == "1":
                flagged.add(i)
    registry = MemberRegistry(layer, names, years, n_papers, flagged)
    graph = TemporalLayerGraph(layer, len(names), [min(y) for y in years])
    with open(os.path.join(in_dir, "edges.csv"), newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            graph.add_edge(int(row["member_id_a"]), int(row["member_id_b"]), int(row["first_year"]))
    return registry, graph.freeze()
