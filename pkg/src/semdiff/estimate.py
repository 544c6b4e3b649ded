"""Per-member susceptibility fits, authority and success statistics.

Between two consecutive observation years a member's profile change is
linear in the two susceptibilities:

    y = L_i(t+1) - L_i(t) = x_i (M_i - L_i) + x_is (L_s - L_i)

so each (topic, transition) pair gives one sample ``(y, u, v)`` and the fit
is a two-parameter least-squares problem. The unconstrained minimizer comes
from the 2x2 normal equations; the constrained one (feasible triangle
``x_i, x_is >= 0, x_i + x_is <= 1``) by enumerating the interior point, the
three edge minimizers and the vertices.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .graph import MemberRegistry, TemporalLayerGraph
from .lexicon import TrendSeries
from .profile import ProfileSeries

logger = logging.getLogger(__name__)

INTERIOR = "interior"
BOUNDARY = "boundary"
NO_NEIGHBORS = "degenerate_no_neighbors"
SINGULAR = "degenerate_singular"
INSUFFICIENT = "insufficient_data"

SINGULAR_RATIO = 1e-12
DEFAULT_TOP_K = 50


@dataclass(frozen=True, slots=True)
class TransitionSample:
    member_id: int
    year: int
    topic_id: str
    y: float
    u: Optional[float]
    v: float
    has_neighbors: bool


def _top_topics(row: Mapping[str, float], k: Optional[int]) -> list[str]:
    ranked = sorted(row.items(), key=lambda kv: (-kv[1], kv[0]))
    if k is not None:
        ranked = ranked[:k]
    return [tid for tid, _ in ranked]


def build_transitions(
    profiles: ProfileSeries,
    graph: TemporalLayerGraph,
    trend: TrendSeries,
    member_id: int,
    top_k: Optional[int] = DEFAULT_TOP_K,
) -> list[TransitionSample]:
    """Samples for every pair of consecutive observation years of a member.

    A gap between observation years still counts as one transition. The
    neighbor mean uses only neighbors (as of the earlier year) that have a
    profile then; with none, the transition carries no neighbor term. The
    topics of a transition are those present in either of the member's two
    profiles plus the ``top_k`` leading trend topics (all when ``None``).
    Fewer than two observation years gives an empty list.
    """
    years = profiles.years(member_id)
    out: list[TransitionSample] = []
    for t0, t1 in zip(years, years[1:]):
        before = profiles.get(member_id, t0)
        after = profiles.get(member_id, t1)
        forcing = trend.row_at_or_before(t0)
        if not forcing:
            logger.debug("member %d: no trend at or before %d, transition skipped", member_id, t0)
            continue
        nbr_profiles = [
            p for p in (profiles.at(j, t0) for j in graph.neighbors(member_id, t0)) if p is not None
        ]
        topics = set(before) | set(after) | set(_top_topics(forcing, top_k))
        has = bool(nbr_profiles)
        for tid in sorted(topics):
            l0 = before.get(tid, 0.0)
            u = None
            if has:
                u = math.fsum(p.get(tid, 0.0) - l0 for p in nbr_profiles) / len(nbr_profiles)
            out.append(
                TransitionSample(
                    member_id, t0, tid, after.get(tid, 0.0) - l0, u, forcing.get(tid, 0.0) - l0, has
                )
            )
    return out


@dataclass
class MemberFit:
    member_id: int
    status: str
    n_samples: int = 0
    x_raw: tuple[float, float] = (math.nan, math.nan)
    x_proj: tuple[float, float] = (math.nan, math.nan)
    chi2_full: float = math.nan
    chi2_proj: float = math.nan
    chi2_null: float = math.nan
    box_differs: bool = False
    name: str = ""
    authority: float = 0.0
    normalized_authority: float = 0.0
    success: int = 0
    flagged: bool = False
    n_coauthors: int = 0

    @property
    def dof(self) -> int:
        return self.n_samples - 2

    @property
    def reduced_chi2(self) -> float:
        return self.chi2_full / self.dof if self.dof > 0 else math.nan

    @property
    def fitted(self) -> bool:
        return self.status != INSUFFICIENT


def _chi2(y, u, v, x, s) -> float:
    r = y - x * u - s * v
    return float(np.dot(r, r))


def _clamp(t: float) -> float:
    return min(max(t, 0.0), 1.0)


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def _feasible(x: float, s: float) -> bool:
    return x >= 0.0 and s >= 0.0 and x + s <= 1.0


def _best(y, u, v, candidates) -> tuple[tuple[float, float], float]:
    best, best_chi2 = None, math.inf
    for x, s in candidates:
        c = _chi2(y, u, v, x, s)
        if c < best_chi2:
            best, best_chi2 = (x, s), c
    return best, best_chi2


def constrained_minimum(y, u, v, raw=None) -> tuple[tuple[float, float], float]:
    """Least-squares minimizer over the feasible triangle, and its chi-square.

    The objective is a convex quadratic, so the optimum is either the
    unconstrained minimizer (when feasible) or lies on an edge; each edge is
    a 1-d least-squares problem whose solution is clamped to the segment.
    Ties resolve toward the earlier candidate: raw, then ``x_i = 0``, then
    ``x_is = 0``, then the hypotenuse, then the vertices.
    """
    y, u, v = (np.asarray(a, dtype=float) for a in (y, u, v))
    cands = []
    if raw is not None and all(math.isfinite(c) for c in raw) and _feasible(*raw):
        cands.append(tuple(raw))
    cands.append((0.0, _clamp(_ratio(np.dot(v, y), np.dot(v, v)))))
    cands.append((_clamp(_ratio(np.dot(u, y), np.dot(u, u))), 0.0))
    w, r = u - v, y - v
    t = _clamp(_ratio(np.dot(w, r), np.dot(w, w)))
    cands.append((t, 1.0 - t))
    cands += [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
    return _best(y, u, v, cands)


def box_minimum(y, u, v, raw=None) -> tuple[tuple[float, float], float]:
    """Same as :func:`constrained_minimum` over the unit box instead."""
    y, u, v = (np.asarray(a, dtype=float) for a in (y, u, v))
    cands = []
    if raw is not None and all(math.isfinite(c) for c in raw) and all(0 <= c <= 1 for c in raw):
        cands.append(tuple(raw))
    vv, uu = np.dot(v, v), np.dot(u, u)
    for x in (0.0, 1.0):
        cands.append((x, _clamp(_ratio(np.dot(v, y - x * u), vv))))
    for s in (0.0, 1.0):
        cands.append((_clamp(_ratio(np.dot(u, y - s * v), uu)), s))
    return _best(y, u, v, cands)


def fit_member(samples: Sequence[TransitionSample], member_id: Optional[int] = None) -> MemberFit:
    if member_id is None:
        member_id = samples[0].member_id if samples else -1
    n = len(samples)
    if n == 0:
        return MemberFit(member_id, INSUFFICIENT)
    y = np.array([s.y for s in samples])
    u = np.array([s.u if s.has_neighbors else 0.0 for s in samples])
    v = np.array([s.v for s in samples])
    suu, suv, svv = np.dot(u, u), np.dot(u, v), np.dot(v, v)
    suy, svy = np.dot(u, y), np.dot(v, y)

    s_null = _ratio(svy, svv)
    chi2_null = _chi2(y, u, v, 0.0, s_null)

    if suu == 0.0:
        status = NO_NEIGHBORS
        raw = (math.nan, s_null if svv > 0 else math.nan)
        chi2_full = chi2_null
    else:
        eig = np.linalg.eigvalsh(np.array([[suu, suv], [suv, svv]]))
        if eig[0] < SINGULAR_RATIO * eig[1]:
            status = SINGULAR
            # only one direction is identifiable: keep the better 1-parameter model
            x_only = _ratio(suy, suu)
            chi2_x = _chi2(y, u, v, x_only, 0.0)
            if svv > 0 and chi2_null <= chi2_x:
                raw, chi2_full = (0.0, s_null), chi2_null
            else:
                raw, chi2_full = (x_only, 0.0), chi2_x
        else:
            sol = np.linalg.lstsq(np.column_stack([u, v]), y, rcond=None)[0]
            raw = (float(sol[0]), float(sol[1]))
            status = INTERIOR if _feasible(*raw) else BOUNDARY
            # nested models: guard against rounding pushing the full fit above the null one
            chi2_full = min(_chi2(y, u, v, *raw), chi2_null)

    proj, chi2_proj = constrained_minimum(y, u, v, raw)
    box, chi2_box = box_minimum(y, u, v, raw)
    differs = chi2_box < chi2_proj and not np.allclose(box, proj, rtol=0, atol=1e-12)
    return MemberFit(
        member_id,
        status,
        n_samples=n,
        x_raw=(float(raw[0]), float(raw[1])),
        x_proj=(float(proj[0]), float(proj[1])),
        chi2_full=float(chi2_full),
        chi2_proj=float(chi2_proj),
        chi2_null=float(chi2_null),
        box_differs=bool(differs),
    )


@dataclass(frozen=True)
class ModelComparison:
    reduced_chi2_full: float
    reduced_chi2_null: float
    neighbor_term_preferred: bool
    available: bool


def model_comparison(fit: MemberFit) -> ModelComparison:
    """Reduced chi-square of the two-parameter fit against the trend-only fit."""
    n = fit.n_samples
    if n < 3 or not fit.fitted:
        return ModelComparison(math.nan, math.nan, False, False)
    full = fit.chi2_full / (n - 2)
    null = fit.chi2_null / (n - 1)
    return ModelComparison(full, null, bool(full < null), True)


def compute_authority(
    fits: Mapping[int, MemberFit],
    graph: TemporalLayerGraph,
    at_year: Optional[int] = None,
) -> dict[int, tuple[float, float]]:
    """Sum (and per-coauthor mean) of the coauthors' projected neighbor susceptibility.

    Coauthors without a usable fit contribute zero. Isolated members get
    ``(0.0, 0.0)``.
    """
    def x_of(j: int) -> float:
        f = fits.get(j)
        if f is None or not f.fitted or not math.isfinite(f.x_proj[0]):
            return 0.0
        return f.x_proj[0]

    out = {}
    for i in range(graph.n_members):
        nbrs = graph.neighbors(i, at_year)
        a = math.fsum(x_of(j) for j in nbrs)
        out[i] = (a, a / len(nbrs) if nbrs else 0.0)
    return out


def success_index(registry: MemberRegistry) -> list[int]:
    return list(registry.n_papers)


@dataclass(frozen=True)
class Correlation:
    value: float
    defined: bool
    n: int = 0


def pearson(a: Iterable[float], b: Iterable[float]) -> Correlation:
    """Pearson correlation; zero variance (or fewer than two points) gives 0, undefined."""
    a = np.asarray(list(a), dtype=float)
    b = np.asarray(list(b), dtype=float)
    n = len(a)
    if n < 2:
        return Correlation(0.0, False, n)
    # test constancy directly: a rounded mean can leave tiny nonzero deviations
    if np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
        return Correlation(0.0, False, n)
    da, db = a - a.mean(), b - b.mean()
    # rescale so tiny spreads cannot underflow the variance product
    da, db = da / np.abs(da).max(), db / np.abs(db).max()
    saa, sbb = np.dot(da, da), np.dot(db, db)
    r = float(np.dot(da, db) / math.sqrt(saa * sbb))
    return Correlation(min(1.0, max(-1.0, r)), True, n)


def _fit_one(args):
    profiles, graph, trend, member, top_k = args
    return fit_member(build_transitions(profiles, graph, trend, member, top_k), member)


def fit_layer(
    profiles: ProfileSeries,
    graph: TemporalLayerGraph,
    trend: TrendSeries,
    registry: MemberRegistry,
    members: Iterable[int],
    top_k: Optional[int] = DEFAULT_TOP_K,
    at_year: Optional[int] = None,
    workers: int = 1,
) -> dict[int, MemberFit]:
    """Fit the given members, then attach authority, success and flags.

    ``at_year`` selects the neighborhood used for authority; by default the
    last year with any profile.
    """
    members = sorted(members)
    jobs = [(profiles, graph, trend, m, top_k) for m in members]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_fit_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_fit_one(j) for j in jobs]
    fits = {f.member_id: f for f in results}
    if at_year is None:
        at_year = max((y for (_, y) in profiles.vectors), default=None)
    authority = compute_authority(fits, graph, at_year)
    for m, f in fits.items():
        f.name = registry.names[m]
        f.authority, f.normalized_authority = authority[m]
        f.success = registry.n_papers[m]
        f.flagged = m in registry.flagged
        f.n_coauthors = graph.degree(m, at_year)
    return fits


@dataclass
class SuccessExport:
    rows: list[dict] = field(default_factory=list)
    authority_vs_success: Correlation = Correlation(0.0, False)
    trend_vs_success: Correlation = Correlation(0.0, False)


def success_export(fits: Mapping[int, MemberFit]) -> SuccessExport:
    good = [fits[m] for m in sorted(fits) if fits[m].fitted]
    rows = [
        {
            "member_id": f.member_id,
            "name": f.name,
            "authority": f.authority,
            "normalized_authority": f.normalized_authority,
            "x_is": f.x_proj[1],
            "success": f.success,
            "flagged": int(f.flagged),
        }
        for f in good
    ]
    return SuccessExport(
        rows,
        pearson([f.authority for f in good], [f.success for f in good]),
        pearson([f.x_proj[1] for f in good], [f.success for f in good]),
    )


def histogram2d(
    fits: Iterable[MemberFit], width: float = 0.05, use_raw: bool = False
) -> list[tuple[float, float, int]]:
    """Counts of fitted ``(x_i, x_is)`` pairs on a square grid of lower bin edges."""
    counts: dict[tuple[int, int], int] = {}
    for f in fits:
        if not f.fitted:
            continue
        x, s = f.x_raw if use_raw else f.x_proj
        if not (math.isfinite(x) and math.isfinite(s)):
            continue
        key = (math.floor(x / width + 1e-9), math.floor(s / width + 1e-9))
        counts[key] = counts.get(key, 0) + 1
    return [(round(i * width, 10), round(j * width, 10), c) for (i, j), c in sorted(counts.items())]


FIT_COLUMNS = [
    "member_id", "name", "x_i_raw", "x_is_raw", "x_i_proj", "x_is_proj",
    "chi2_full", "chi2_null", "dof", "status", "authority", "normalized_authority",
    "success", "flagged", "n_samples", "chi2_proj", "box_differs", "neighbor_term_preferred", "n_coauthors",
]


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_fits(fits: Mapping[int, MemberFit], path) -> str:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIT_COLUMNS)
        for m in sorted(fits):
            f = fits[m]
            cmp = model_comparison(f)
            w.writerow(
                _fmt(v)
                for v in (
                    f.member_id, f.name, f.x_raw[0], f.x_raw[1], f.x_proj[0], f.x_proj[1],
                    f.chi2_full, f.chi2_null, f.dof, f.status, f.authority,
                    f.normalized_authority, f.success, f.flagged, f.n_samples,
                    f.chi2_proj, f.box_differs, cmp.neighbor_term_preferred, f.n_coauthors,
                )
            )
    return str(path)


def read_fits(path) -> dict[int, MemberFit]:
    fits = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            m = int(row["member_id"])
            fits[m] = MemberFit(
                m,
                row["status"],
                n_samples=int(row["n_samples"]),
                x_raw=(float(row["x_i_raw"]), float(row["x_is_raw"])),
                x_proj=(float(row["x_i_proj"]), float(row["x_is_proj"])),
                chi2_full=float(row["chi2_full"]),
                chi2_proj=float(row["chi2_proj"]),
                chi2_null=float(row["chi2_null"]),
                box_differs=row["box_differs"] == "1",
                name=row["name"],
                authority=float(row["authority"]),
                normalized_authority=float(row["normalized_authority"]),
                success=int(row["success"]),
                flagged=row["flagged"] == "1",
                n_coauthors=int(row.get("n_coauthors") or 0),
            )
    return fits


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(_fmt(v) for v in row)
    return str(path)
