"""Trajectory objective: sand reward minus drilling cost.

A well earns h points per lateral meter drilled inside a sand of local
thickness h, doubled inside the sweet band just below the sand roof, and
pays a fixed cost per meter of arc length drilled. Segment reward uses
midpoint quadrature at 1 m lateral resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geomodel import Ensemble, LateralGrid, Realization

PERCENTILE_LEVELS = (10, 20, 30, 40, 50, 60, 70, 80, 90)


@dataclass(frozen=True)
class ScoringConfig:
    cost_per_meter: float = 0.086
    sweet_spot_top: float = 0.5
    sweet_spot_bottom: float = 1.5
    sweet_multiplier: float = 2.0

    def __post_init__(self):
        if not 0 <= self.sweet_spot_top < self.sweet_spot_bottom:
            raise ValueError("need 0 <= sweet_spot_top < sweet_spot_bottom")
        if self.cost_per_meter < 0:
            raise ValueError("cost_per_meter must be >= 0")
        if self.sweet_multiplier <= 0:
            raise ValueError("sweet_multiplier must be > 0")


@dataclass
class Trajectory:
    """Ordered well path. stopped_early marks wells ended before the last
    allowed decision; scoring just sums whatever segments exist."""

    points: np.ndarray
    stopped_early: bool = False

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError("points must have shape (n, 2)")
        if self.points.shape[0] < 1:
            raise ValueError("trajectory needs at least one point")
        if np.any(np.diff(self.points[:, 0]) <= 0):
            raise ValueError("x must be strictly increasing")

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]


def reward_rate(real: Realization, grid: LateralGrid, x: float, y: float, cfg: ScoringConfig) -> float:
    """Points per lateral meter at a single well point (before cost)."""
    b1, b2, b3, b4 = real.boundary_at(grid, x)
    if b1 <= y < b2:
        roof, h = b1, b2 - b1
    elif b3 <= y < b4:
        roof, h = b3, b4 - b3
    else:
        return 0.0
    if roof + cfg.sweet_spot_top <= y <= roof + cfg.sweet_spot_bottom:
        return cfg.sweet_multiplier * h
    return h


def score_segment(
    real: Realization,
    grid: LateralGrid,
    start: tuple[float, float],
    end: tuple[float, float],
    cfg: ScoringConfig,
) -> float:
    """Objective contribution of one straight segment.

    The op order here (sum rates, multiply by sub-width once, subtract cost)
    is load-bearing: the decision agent's compiled kernel mirrors it so both
    paths agree to float round-off.
    """
    (x0, y0), (x1, y1) = start, end
    dx = x1 - x0
    if dx <= 0:
        raise ValueError("segment must advance laterally (x1 > x0)")
    n = max(1, math.ceil(dx - 1e-12))
    w = dx / n
    total = 0.0
    for k in range(n):
        xm = x0 + (k + 0.5) * w
        ym = y0 + (xm - x0) / dx * (y1 - y0)
        total += reward_rate(real, grid, xm, ym, cfg)
    return total * w - cfg.cost_per_meter * math.hypot(dx, y1 - y0)


def score_trajectory(traj: Trajectory, real: Realization, grid: LateralGrid, cfg: ScoringConfig) -> float:
    if traj.points.shape[0] < 2:
        raise ValueError("trajectory needs at least 2 points to score")
    total = 0.0
    for i in range(traj.points.shape[0] - 1):
        total += score_segment(
            real, grid, tuple(traj.points[i]), tuple(traj.points[i + 1]), cfg
        )
    return total


@dataclass
class ScoreDistribution:
    """Per-member scores of one trajectory, index-stable, plus P10..P90."""

    entries: list[tuple[float, int]]
    percentiles: np.ndarray = field(init=False)

    def __post_init__(self):
        if not self.entries:
            raise ValueError("empty score distribution")
        scores = np.array([s for s, _ in self.entries])
        self.percentiles = np.percentile(scores, PERCENTILE_LEVELS, method="linear")

    @property
    def scores(self) -> np.ndarray:
        return np.array([s for s, _ in self.entries])

    def p(self, level: int) -> float:
        return float(self.percentiles[PERCENTILE_LEVELS.index(level)])

    def to_payload(self) -> list[dict]:
        return [{"score": float(s), "realization": int(i)} for s, i in self.entries]


def evaluate_on_ensemble(
    traj: Trajectory, ens: Ensemble, cfg: ScoringConfig
) -> ScoreDistribution:
    entries = [
        (score_trajectory(traj, m, ens.grid, cfg), i)
        for i, m in enumerate(ens.members)
    ]
    return ScoreDistribution(entries)


def select_percentile_band(dist: ScoreDistribution, band: int) -> list[int]:
    """Members whose scores fall in decile `band` (0 = lowest tenth).

    Decile edges come from the same linear-interpolation percentile rule.
    Bands above the first take the open-below/closed-above interval
    (edge_b, edge_b+1]; band 0 keeps its lower edge closed so the minimum
    member always belongs somewhere and the bands partition the ensemble.
    """
    if not 0 <= band <= 9:
        raise ValueError("band must be in 0..9")
    scores = dist.scores
    edges = np.percentile(scores, np.arange(0, 101, 10), method="linear")
    lo, hi = edges[band], edges[band + 1]
    if band == 0:
        mask = (scores >= lo) & (scores <= hi)
    else:
        mask = (scores > lo) & (scores <= hi)
    return [int(dist.entries[i][1]) for i in np.nonzero(mask)[0]]
