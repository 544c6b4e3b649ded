"""Forward simulation of interest diffusion and synthetic layer generation.

Each member's topic distribution moves toward the mean of its neighbors'
distributions and toward the global trend:

    L_i <- (1 - x_i - s_i) L_i + x_i M_i + s_i L_s

with ``M_i`` the plain mean of neighbor vectors. Members without neighbors
keep the mass ``1 - s_i`` on themselves. The continuous-time version is
integrated by explicit Euler, which is the same map with ``x = a dt``.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .graph import MemberRegistry, TemporalLayerGraph
from .lexicon import TrendSeries
from .profile import CUMULATIVE, ProfileSeries


class SimulationError(RuntimeError):
    pass


class InfeasibleParameters(ValueError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ParameterSet:
    """Per-member neighbor and trend susceptibilities.

    ``continuous=True`` marks the entries as rates (only nonnegativity is
    required); otherwise they are per-step weights in the feasible triangle.
    """

    neighbor: np.ndarray
    trend: np.ndarray
    continuous: bool = False

    def __post_init__(self):
        object.__setattr__(self, "neighbor", np.asarray(self.neighbor, dtype=float))
        object.__setattr__(self, "trend", np.asarray(self.trend, dtype=float))
        if self.neighbor.shape != self.trend.shape or self.neighbor.ndim != 1:
            raise ValueError("neighbor and trend susceptibilities must be 1-d and equal length")

    def __len__(self):
        return len(self.neighbor)

    def check(self) -> None:
        bad = ~np.isfinite(self.neighbor) | ~np.isfinite(self.trend)
        bad |= (self.neighbor < 0) | (self.trend < 0)
        if not self.continuous:
            bad |= self.neighbor + self.trend > 1.0
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise InfeasibleParameters(
                f"member {i}: neighbor={self.neighbor[i]!r}, trend={self.trend[i]!r} "
                "outside the feasible region"
            )


@dataclass(frozen=True)
class SimulationState:
    profiles: np.ndarray  # (n_members, n_topics)
    trend: np.ndarray  # (n_topics,)
    time: float = 0.0


class NeighborIndex:
    """CSR view of neighbor lists for vectorized neighbor means."""

    def __init__(self, neighbors: Sequence[Sequence[int]]):
        self.n = len(neighbors)
        self.degree = np.array([len(nb) for nb in neighbors], dtype=np.int64)
        self.indptr = np.concatenate([[0], np.cumsum(self.degree)])
        self.indices = (
            np.concatenate([np.asarray(nb, dtype=np.int64) for nb in neighbors])
            if self.indptr[-1]
            else np.zeros(0, dtype=np.int64)
        )
        self.owner = np.repeat(np.arange(self.n), self.degree)
        self.has = self.degree > 0

    def offsets(self, L: np.ndarray) -> np.ndarray:
        """``M_i - L_i`` as the mean of ``L_j - L_i``; zero rows for isolated members.

        Averaging differences (rather than subtracting a mean) makes the
        result exactly zero when all neighbors agree with the member.
        """
        out = np.zeros_like(L)
        if not self.has.any():
            return out
        diffs = L[self.indices] - L[self.owner]
        sums = np.add.reduceat(diffs, self.indptr[:-1][self.has], axis=0)
        out[self.has] = sums / self.degree[self.has, None]
        return out


def _as_index(neighbors) -> NeighborIndex:
    return neighbors if isinstance(neighbors, NeighborIndex) else NeighborIndex(neighbors)


def _check_finite(arr: np.ndarray, what: str) -> None:
    if not np.isfinite(arr).all():
        where = np.argwhere(~np.isfinite(arr))[0]
        loc = f"member {where[0]}, topic {where[1]}" if arr.ndim == 2 else f"topic {where[0]}"
        raise SimulationError(f"non-finite value in {what} at {loc}")


def _update(L, Ls, x, s, nbr: NeighborIndex) -> np.ndarray:
    D = nbr.offsets(L)
    x = np.where(nbr.has, x, 0.0)
    c = np.maximum(1.0 - x - s, 0.0)
    M = np.maximum(L + D, 0.0)
    xc, sc, cc = x[:, None], s[:, None], c[:, None]
    Lsb = np.broadcast_to(Ls, L.shape)
    # Expand around whichever term carries the largest weight; this keeps the
    # identity map, full trend adoption and the common fixed point exact.
    around_self = L + xc * D + sc * (Lsb - L)
    around_trend = Lsb + cc * (L - Lsb) + xc * (M - Lsb)
    around_nbrs = M + cc * (L - M) + sc * (Lsb - M)
    pick_trend = (s > c) & (s >= x)
    pick_nbrs = (x > c) & (x > s)
    out = np.where(pick_trend[:, None], around_trend, around_self)
    return np.where(pick_nbrs[:, None], around_nbrs, out)


def step_discrete(
    state: SimulationState,
    params: ParameterSet,
    neighbors,
    dt: float = 1.0,
) -> SimulationState:
    """One synchronous update of every member from the current state."""
    params.check()
    nbr = _as_index(neighbors)
    L = np.asarray(state.profiles, dtype=float)
    Ls = np.asarray(state.trend, dtype=float)
    if L.shape[0] != len(params) or nbr.n != len(params):
        raise ValueError("state, parameters and neighbor lists disagree on member count")
    _check_finite(L, "profiles")
    _check_finite(Ls, "trend")
    new = _update(L, Ls, params.neighbor, params.trend, nbr)
    _check_finite(new, "updated profiles")
    return SimulationState(new, Ls, state.time + dt)


TrendInput = Union[np.ndarray, Callable[[float], np.ndarray], None]


def integrate_continuous(
    state: SimulationState,
    rates: ParameterSet,
    neighbors,
    dt: float,
    horizon: float,
    trend: TrendInput = None,
) -> list[SimulationState]:
    """Explicit-Euler trajectory sampled every ``dt`` up to ``horizon``.

    ``trend`` may be a fixed vector or a function of time evaluated at the
    start of each step; by default the state's own trend is held fixed.
    Requires ``dt * (a_i + a_is) < 1`` for every member.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n_steps = int(round(horizon / dt))
    if not math.isclose(n_steps * dt, horizon, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"horizon {horizon} is not a multiple of dt {dt}")
    rates = replace(rates, continuous=True)
    rates.check()
    total = dt * (rates.neighbor + rates.trend)
    if (total >= 1.0).any():
        i = int(np.flatnonzero(total >= 1.0)[0])
        raise SimulationError(
            f"explicit step unstable for member {i}: dt*(a_i+a_is) = {total[i]!r} >= 1"
        )
    step_params = ParameterSet(rates.neighbor * dt, rates.trend * dt)
    nbr = _as_index(neighbors)
    traj = [state]
    for _ in range(n_steps):
        if callable(trend):
            state = replace(state, trend=np.asarray(trend(state.time), dtype=float))
        elif trend is not None:
            state = replace(state, trend=np.asarray(trend, dtype=float))
        state = step_discrete(state, step_params, nbr, dt)
        traj.append(state)
    return traj


# --- synthetic layers -----------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    kind: str = "uniform"
    low: float = 0.0
    high: float = 1.0
    a: float = 2.0
    b: float = 5.0

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> "Distribution":
        return cls(**(data or {}))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high, size)
        if self.kind == "beta":
            return self.low + (self.high - self.low) * rng.beta(self.a, self.b, size)
        if self.kind == "constant":
            return np.full(size, self.low)
        raise ConfigError(f"unknown distribution kind {self.kind!r}")


@dataclass(frozen=True)
class SyntheticConfig:
    n_members: int = 100
    n_topics: int = 20
    graph: str = "erdos_renyi"  # or "core_periphery"
    edge_density: float = 0.06
    core_fraction: float = 0.5
    isolated_fraction: float = 0.2
    neighbor_dist: Distribution = field(default_factory=lambda: Distribution("uniform", 0.0, 0.5))
    trend_dist: Distribution = field(default_factory=lambda: Distribution("uniform", 0.0, 0.3))
    max_total: float = 1.0
    profile_concentration: float = 1.0
    trend_concentration: float = 1.0
    trend_process: str = "static"  # static | random_walk | drifting_mixture
    trend_volatility: float = 0.1
    n_steps: int = 30
    missing_rate: float = 0.0
    noise_sigma: float = 0.0

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticConfig":
        kwargs = dict(data)
        for key in ("neighbor_dist", "trend_dist"):
            if key in kwargs:
                kwargs[key] = Distribution.from_dict(kwargs[key])
        unknown = set(kwargs) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown simulation keys: {sorted(unknown)}")
        return cls(**kwargs)

    def validate(self) -> None:
        if self.n_members < 1 or self.n_topics < 1 or self.n_steps < 1:
            raise ConfigError("n_members, n_topics and n_steps must be positive")
        for name in ("edge_density", "core_fraction", "isolated_fraction", "missing_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.core_fraction + self.isolated_fraction > 1.0:
            raise ConfigError("core_fraction + isolated_fraction exceeds 1")
        if not 0.0 < self.max_total <= 1.0:
            raise ConfigError("max_total must lie in (0, 1]")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be nonnegative")
        if self.graph not in ("erdos_renyi", "core_periphery"):
            raise ConfigError(f"unknown graph model {self.graph!r}")
        if self.trend_process not in ("static", "random_walk", "drifting_mixture"):
            raise ConfigError(f"unknown trend process {self.trend_process!r}")


@dataclass
class SyntheticLayer:
    registry: MemberRegistry
    graph: TemporalLayerGraph
    params: ParameterSet
    trajectory: np.ndarray  # (n_steps + 1, n_members, n_topics), noiseless
    trends: np.ndarray  # (n_steps + 1, n_topics)
    schedule: dict[int, list[int]]
    profiles: ProfileSeries  # observed
    trend_series: TrendSeries
    topic_ids: list[str]


def _erdos_renyi(rng, members: np.ndarray, p: float) -> list[tuple[int, int]]:
    n = len(members)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return [(int(members[i]), int(members[j])) for i, j in zip(iu[keep], ju[keep])]


def _random_graph(cfg: SyntheticConfig, rng) -> list[tuple[int, int]]:
    ids = np.arange(cfg.n_members)
    if cfg.graph == "erdos_renyi":
        return _erdos_renyi(rng, ids, cfg.edge_density)
    # a dense core, small stars around local hubs, and a crown of isolated members
    perm = rng.permutation(ids)
    n_core = int(round(cfg.core_fraction * cfg.n_members))
    n_iso = int(round(cfg.isolated_fraction * cfg.n_members))
    core, rest = perm[:n_core], perm[n_core : cfg.n_members - n_iso]
    edges = _erdos_renyi(rng, np.sort(core), cfg.edge_density)
    i = 0
    while i < len(rest):
        size = int(rng.integers(2, 7))
        group = rest[i : i + size]
        hub = int(group[0])
        edges += [(min(hub, int(l)), max(hub, int(l))) for l in group[1:]]
        i += size
    return sorted(edges)


def _trend_path(cfg: SyntheticConfig, rng) -> np.ndarray:
    k, T = cfg.n_topics, cfg.n_steps
    start = rng.dirichlet(np.full(k, cfg.trend_concentration))
    out = np.empty((T + 1, k))
    if cfg.trend_process == "static":
        out[:] = start
    elif cfg.trend_process == "random_walk":
        out[0] = start
        for t in range(T):
            w = out[t] * np.exp(cfg.trend_volatility * rng.standard_normal(k))
            out[t + 1] = w / w.sum()
    else:
        end = rng.dirichlet(np.full(k, cfg.trend_concentration))
        for t in range(T + 1):
            lam = t / T
            out[t] = (1.0 - lam) * start + lam * end
    return out


def _draw_params(cfg: SyntheticConfig, rng) -> ParameterSet:
    n = cfg.n_members
    x = np.empty(n)
    s = np.empty(n)
    filled = 0
    for _ in range(1000):
        xs = cfg.neighbor_dist.sample(rng, n)
        ss = cfg.trend_dist.sample(rng, n)
        ok = (xs >= 0) & (ss >= 0) & (xs + ss <= cfg.max_total)
        take = min(int(ok.sum()), n - filled)
        x[filled : filled + take] = xs[ok][:take]
        s[filled : filled + take] = ss[ok][:take]
        filled += take
        if filled == n:
            return ParameterSet(x, s)
    raise ConfigError("parameter distributions barely overlap the feasible triangle")


def generate_synthetic(cfg: SyntheticConfig, seed: int) -> SyntheticLayer:
    """Random layer, ground-truth susceptibilities and observed profiles.

    Time steps play the role of years (0..n_steps). All edges exist from
    step 0. Observed profiles may drop steps per member (``missing_rate``,
    never below two kept steps) and carry Gaussian noise that is clipped at
    zero and renormalized; the trend is observed exactly.
    """
    cfg.validate()
    rng = np.random.default_rng(seed)
    n, k, T = cfg.n_members, cfg.n_topics, cfg.n_steps
    edges = _random_graph(cfg, rng)
    params = _draw_params(cfg, rng)
    trends = _trend_path(cfg, rng)
    L0 = rng.dirichlet(np.full(k, cfg.profile_concentration), size=n)

    graph = TemporalLayerGraph("synthetic", n, [0] * n)
    for a, b in edges:
        graph.add_edge(a, b, 0)
    graph.freeze()
    nbr = NeighborIndex(graph.neighbor_lists())

    traj = np.empty((T + 1, n, k))
    traj[0] = L0
    state = SimulationState(L0, trends[0], 0.0)
    for t in range(T):
        state = step_discrete(replace(state, trend=trends[t]), params, nbr)
        traj[t + 1] = state.profiles

    topic_ids = [f"T{j:0{len(str(k - 1))}d}" for j in range(k)]
    schedule: dict[int, list[int]] = {}
    vectors: dict[tuple[int, int], dict[str, float]] = {}
    for i in range(n):
        steps = list(range(T + 1))
        if cfg.missing_rate > 0:
            keep = rng.random(T + 1) >= cfg.missing_rate
            if keep.sum() < 2:
                keep[rng.choice(T + 1, size=2, replace=False)] = True
            steps = [t for t in steps if keep[t]]
        schedule[i] = steps
        for t in steps:
            obs = traj[t, i]
            if cfg.noise_sigma > 0:
                noisy = np.maximum(obs + cfg.noise_sigma * rng.standard_normal(k), 0.0)
                if noisy.sum() > 0:
                    obs = noisy / noisy.sum()
            vectors[(i, t)] = {topic_ids[j]: float(obs[j]) for j in range(k) if obs[j] > 0}

    registry = MemberRegistry(
        layer="synthetic",
        names=[f"member{i:0{len(str(n - 1))}d}" for i in range(n)],
        years=[frozenset(schedule[i]) for i in range(n)],
        n_papers=[len(schedule[i]) for i in range(n)],
    )
    profiles = ProfileSeries(vectors, CUMULATIVE, None, {i: len(schedule[i]) for i in range(n)})
    trend_series = TrendSeries.from_rows(
        {t: {topic_ids[j]: float(trends[t, j]) for j in range(k)} for t in range(T + 1)}
    )
    return SyntheticLayer(
        registry, graph, params, traj, trends, schedule, profiles, trend_series, topic_ids
    )


def write_trajectory(layer: SyntheticLayer, out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    traj_path = os.path.join(out_dir, "trajectory.csv")
    truth_path = os.path.join(out_dir, "ground_truth.csv")
    with open(traj_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "member_id", "topic_id", "value"])
        T, n, k = layer.trajectory.shape
        for t in range(T):
            for i in range(n):
                for j in range(k):
                    w.writerow([t, i, layer.topic_ids[j], repr(float(layer.trajectory[t, i, j]))])
    with open(truth_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["member_id", "x_i", "x_is"])
        for i in range(len(layer.params)):
            w.writerow([i, repr(float(layer.params.neighbor[i])), repr(float(layer.params.trend[i]))])
    return [traj_path, truth_path]
