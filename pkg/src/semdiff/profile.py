"""Per-member semantic profiles over the topic basis."""

from __future__ import annotations

import bisect
import csv
import json
import math
import os
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional

from .graph import MemberRegistry, TreatabilityReport
from .lexicon import IndexedPaper

CUMULATIVE = "cumulative"
WINDOWED = "windowed"


class ProfileSeries:
    """Sparse topic distributions ``vectors[(member, year)]``.

    A vector is stored for each year in which the member has at least one
    indexed paper (the member's observation years). :meth:`at` answers
    queries for arbitrary years: in cumulative mode the latest vector at or
    before the year carries forward unchanged; in windowed mode it does so
    only while that vector is younger than the window.
    """

    def __init__(
        self,
        vectors: dict[tuple[int, int], dict[str, float]],
        mode: str = CUMULATIVE,
        window: Optional[int] = None,
        n_papers: Optional[dict[int, int]] = None,
    ):
        if mode not in (CUMULATIVE, WINDOWED):
            raise ValueError(f"unknown profile mode {mode!r}")
        if mode == WINDOWED and (window is None or window < 1):
            raise ValueError("windowed profiles need a window of at least one year")
        self.vectors = vectors
        self.mode = mode
        self.window = window
        self.n_papers = dict(n_papers or {})
        years = defaultdict(list)
        for member, year in vectors:
            years[member].append(year)
        self._years = {m: sorted(ys) for m, ys in years.items()}

    @property
    def members(self) -> list[int]:
        return sorted(self._years)

    def years(self, member: int) -> list[int]:
        return list(self._years.get(member, ()))

    def get(self, member: int, year: int) -> Optional[dict[str, float]]:
        return self.vectors.get((member, year))

    def at(self, member: int, year: int) -> Optional[dict[str, float]]:
        ys = self._years.get(member)
        if not ys:
            return None
        k = bisect.bisect_right(ys, year)
        if k == 0:
            return None
        last = ys[k - 1]
        if self.mode == WINDOWED and last <= year - self.window:
            return None
        return self.vectors[(member, last)]


def _normalized(weights: dict[str, float]) -> dict[str, float]:
    total = math.fsum(weights.values())
    return {tid: weights[tid] / total for tid in sorted(weights)}


def build_profiles(
    indexed: Iterable[IndexedPaper],
    registry: MemberRegistry,
    mode: str = CUMULATIVE,
    window: Optional[int] = None,
) -> ProfileSeries:
    """Relative topic frequencies of each member's indexed output.

    Every paper spreads a unit weight evenly over its topics. Cumulative
    profiles use all of a member's papers up to the year; windowed ones use
    the years in ``(t - window, t]``. Papers without topics and authors
    unknown to the registry are ignored.
    """
    by_member: dict[int, dict[int, list[IndexedPaper]]] = defaultdict(lambda: defaultdict(list))
    for paper in indexed:
        if not paper.topic_ids:
            continue
        for name in set(paper.authors):
            member = registry.id_of(name)
            if member is not None:
                by_member[member][paper.year].append(paper)

    vectors: dict[tuple[int, int], dict[str, float]] = {}
    n_papers: dict[int, int] = {}
    for member in sorted(by_member):
        per_year = by_member[member]
        years = sorted(per_year)
        yearly: dict[int, dict[str, float]] = {}
        for y in years:
            w: dict[str, float] = defaultdict(float)
            for paper in sorted(per_year[y], key=lambda p: p.record_id):
                share = 1.0 / len(paper.topic_ids)
                for tid in sorted(paper.topic_ids):
                    w[tid] += share
            yearly[y] = w
        n_papers[member] = sum(len(per_year[y]) for y in years)
        running: dict[str, float] = defaultdict(float)
        for y in years:
            if mode == CUMULATIVE:
                for tid, v in sorted(yearly[y].items()):
                    running[tid] += v
                vectors[(member, y)] = _normalized(running)
            else:
                acc: dict[str, float] = defaultdict(float)
                for s in years:
                    if y - window < s <= y:
                        for tid, v in sorted(yearly[s].items()):
                            acc[tid] += v
                vectors[(member, y)] = _normalized(acc)
    return ProfileSeries(vectors, mode, window if mode == WINDOWED else None, n_papers)


@dataclass(frozen=True)
class SemanticTreatabilityReport:
    semantically_treatable: tuple[bool, ...]
    n_profile_years: tuple[int, ...]
    n_indexed_papers: tuple[int, ...]

    @property
    def members(self) -> list[int]:
        return [i for i, ok in enumerate(self.semantically_treatable) if ok]


def classify_semantically_treatable(
    profiles: ProfileSeries, treat: TreatabilityReport
) -> SemanticTreatabilityReport:
    n = len(treat.treatable)
    n_years = tuple(len(profiles.years(i)) for i in range(n))
    return SemanticTreatabilityReport(
        tuple(treat.treatable[i] and n_years[i] >= 2 for i in range(n)),
        n_years,
        tuple(profiles.n_papers.get(i, 0) for i in range(n)),
    )


def write_profiles(profiles: ProfileSeries, out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "profiles.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["member_id", "year", "topic_id", "value"])
        for (member, year) in sorted(profiles.vectors):
            for tid, v in profiles.vectors[(member, year)].items():
                w.writerow([member, year, tid, repr(v)])
    meta = os.path.join(out_dir, "profiles_meta.json")
    with open(meta, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "mode": profiles.mode,
                "window": profiles.window,
                "n_indexed_papers": {str(k): v for k, v in sorted(profiles.n_papers.items())},
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    return [path, meta]


def read_profiles(in_dir) -> ProfileSeries:
    with open(os.path.join(in_dir, "profiles_meta.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    vectors: dict[tuple[int, int], dict[str, float]] = defaultdict(dict)
    with open(os.path.join(in_dir, "profiles.csv"), newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            vectors[(int(row["member_id"]), int(row["year"]))][row["topic_id"]] = float(row["value"])
    return ProfileSeries(
        dict(vectors),
        meta["mode"],
        meta.get("window"),
        {int(k): v for k, v in meta.get("n_indexed_papers", {}).items()},
    )
