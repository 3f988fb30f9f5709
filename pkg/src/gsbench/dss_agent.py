"""Robust dynamic-programming decision agent.

For every ensemble member the agent solves a discounted backward induction
over (decision stage, y-lattice node, incoming dip class); the immediate
decision is then the alternative with the best ensemble mean of segment
value plus discounted continuation value. Stopping is always admissible and
worth exactly zero.

The dog-leg bound couples consecutive stands, so the DP state carries the
incoming dip discretized to lattice steps per stand. This stays exact
because committed moves always land on the lattice.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .geomodel import Ensemble, LateralGrid, PriorConfig, Realization
from .kinematics import (
    build_lattice,
    class_dip_deg,
    lattice_index,
    snap_down,
    snap_up,
    step_class_interval,
)
from .scoring import ScoringConfig, Trajectory, score_segment

_FORBIDDEN = -1e300


@dataclass(frozen=True)
class AgentConfig:
    gamma: float = 0.9
    y_spacing: float = 0.25
    lat_min: float = 2.0
    lat_max: float = 31.0

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if self.y_spacing <= 0:
            raise ValueError("y_spacing must be > 0")
        if self.lat_min >= self.lat_max:
            raise ValueError("lat_min must be < lat_max")

    @staticmethod
    def from_prior(
        prior: PriorConfig,
        y_spacing: float,
        gamma: float = 0.9,
        margin_sigmas: float = 4.0,
    ) -> "AgentConfig":
        """Lattice covering the prior boundary range plus a safety margin."""
        sigma = math.sqrt(prior.variogram_sill)
        lo = snap_down(min(prior.mean_depths) - margin_sigmas * sigma, y_spacing)
        hi = snap_up(max(prior.mean_depths) + margin_sigmas * sigma, y_spacing)
        return AgentConfig(gamma=gamma, y_spacing=y_spacing, lat_min=lo, lat_max=hi)


@dataclass(frozen=True)
class StateView:
    """What a decision agent is allowed to see mid-episode."""

    ensemble: Ensemble
    x: float
    y: float
    dip_deg: float
    decisions_remaining: int
    stand_length: float
    dogleg_limit_deg: float


@dataclass(frozen=True)
class Alternative:
    y: float | None          # None encodes stop
    mean_value: float
    dip_change_deg: float


@dataclass(frozen=True)
class DecideResult:
    stop: bool
    y: float | None
    alternatives: tuple[Alternative, ...]


@dataclass
class StageValues:
    d_lo: int
    values: np.ndarray  # (n_lattice, n_dip_classes)

    def value(self, i: int, d: int) -> float:
        return float(self.values[i, d - self.d_lo])


@dataclass
class ValueTable:
    """Per-stage continuation values for one realization."""

    lat: np.ndarray
    xs: np.ndarray
    gamma: float
    stages: list[StageValues]


@njit(cache=True)
def _fill_stage_scores(bmid, x0, w, dx, lat, d_lo, cost, top, bot, mult, S):
    """Segment scores for every (member, start node, lattice step) at one stage.

    Every float expression here (midpoint abscissa, interpolation fraction,
    rate accumulation, final combine) restates scoring.score_segment term by
    term so the two paths agree bitwise on identical inputs.
    """
    m = bmid.shape[0]
    nmid = bmid.shape[2]
    nl = lat.shape[0]
    nd = S.shape[2]
    for mi in range(m):
        for i in range(nl):
            y0 = lat[i]
            for dc in range(nd):
                j = i + d_lo + dc
                if j < 0 or j >= nl:
                    S[mi, i, dc] = _FORBIDDEN
                    continue
                dy = lat[j] - y0
                total = 0.0
                for k in range(nmid):
                    xm = x0 + (k + 0.5) * w
                    ym = y0 + (xm - x0) / dx * dy
                    b1 = bmid[mi, 0, k]
                    b2 = bmid[mi, 1, k]
                    b3 = bmid[mi, 2, k]
                    b4 = bmid[mi, 3, k]
                    if b1 <= ym < b2:
                        h = b2 - b1
                        if b1 + top <= ym <= b1 + bot:
                            total += mult * h
                        else:
                            total += h
                    elif b3 <= ym < b4:
                        h = b4 - b3
                        if b3 + top <= ym <= b3 + bot:
                            total += mult * h
                        else:
                            total += h
                S[mi, i, dc] = total * w - cost * math.hypot(dx, dy)


@njit(cache=True)
def _bellman_stage(S, v_next, d_next_lo, cone_lo, cone_hi, gamma, v_out):
    """v_out[mi, i, dc] = max(0, max over legal steps dd of S + gamma*v_next)."""
    m, nl, ndk = v_out.shape
    for mi in range(m):
        for i in range(nl):
            for dc in range(ndk):
                best = 0.0
                for dd in range(cone_lo[dc], cone_hi[dc] + 1):
                    j = i + dd
                    if 0 <= j < nl:
                        v = S[mi, i, dd - d_next_lo] + gamma * v_next[mi, j, dd - d_next_lo]
                        if v > best:
                            best = v
                v_out[mi, i, dc] = best


def _quadrature(length: float) -> tuple[int, float]:
    n = max(1, math.ceil(length - 1e-12))
    return n, length / n


def _boundary_midpoints(
    arr: np.ndarray, grid: LateralGrid, x0: float, n: int, w: float
) -> np.ndarray:
    """Boundaries interpolated at quadrature midpoints: (m, 4, n)."""
    xm = x0 + (np.arange(n) + 0.5) * w
    out = np.empty((arr.shape[0], 4, n))
    for mi in range(arr.shape[0]):
        for b in range(4):
            out[mi, b] = np.interp(xm, grid.x, arr[mi, b])
    return out


def _stage_class_ranges(
    d1: tuple[int, int], stages: int, spacing: float, length: float, limit_deg: float
) -> list[tuple[int, int]]:
    """Reachable incoming-dip class interval per stage, expanding one
    dog-leg cone per stand. Cone edges are monotone in the incoming class,
    so interval endpoints suffice."""
    ranges = [d1]
    for _ in range(1, stages):
        lo_prev, hi_prev = ranges[-1]
        lo = step_class_interval(
            class_dip_deg(lo_prev, spacing, length), spacing, length, limit_deg
        )[0]
        hi = step_class_interval(
            class_dip_deg(hi_prev, spacing, length), spacing, length, limit_deg
        )[1]
        ranges.append((lo, hi))
    return ranges


def _cone_tables(
    d_range: tuple[int, int],
    next_range: tuple[int, int],
    spacing: float,
    length: float,
    limit_deg: float,
):
    lo_arr = np.empty(d_range[1] - d_range[0] + 1, dtype=np.int64)
    hi_arr = np.empty_like(lo_arr)
    for idx, d in enumerate(range(d_range[0], d_range[1] + 1)):
        lo, hi = step_class_interval(
            class_dip_deg(d, spacing, length), spacing, length, limit_deg
        )
        lo_arr[idx] = max(lo, next_range[0])
        hi_arr[idx] = min(hi, next_range[1])
    return lo_arr, hi_arr


def _backward(
    arr: np.ndarray,
    grid: LateralGrid,
    lat: np.ndarray,
    xs: np.ndarray,
    ranges: list[tuple[int, int]],
    gamma: float,
    scoring: ScoringConfig,
    spacing: float,
    limit_deg: float,
    keep_all: bool,
):
    """Backward induction over the given stages for all members at once.

    xs[s] is the abscissa of stage s (aligned with ranges); the last stage
    is terminal with value zero. Returns the list of per-stage
    (d_lo, values (m, nl, nd)) when keep_all, else just the first stage's.
    """
    n_stage = len(ranges)
    m, nl = arr.shape[0], lat.size
    v = np.zeros((m, nl, ranges[-1][1] - ranges[-1][0] + 1))
    kept: list = [None] * n_stage
    kept[-1] = (ranges[-1][0], v)
    for s in range(n_stage - 2, -1, -1):
        length = float(xs[s + 1] - xs[s])
        dn = ranges[s + 1]
        dk = ranges[s]
        n_mid, w = _quadrature(length)
        bmid = _boundary_midpoints(arr, grid, float(xs[s]), n_mid, w)
        S = np.empty((m, nl, dn[1] - dn[0] + 1))
        _fill_stage_scores(
            bmid, float(xs[s]), w, length, lat, dn[0],
            scoring.cost_per_meter, scoring.sweet_spot_top,
            scoring.sweet_spot_bottom, scoring.sweet_multiplier, S,
        )
        cone_lo, cone_hi = _cone_tables(dk, dn, spacing, length, limit_deg)
        v_out = np.empty((m, nl, dk[1] - dk[0] + 1))
        _bellman_stage(S, v, dn[0], cone_lo, cone_hi, gamma, v_out)
        v = v_out
        if keep_all:
            kept[s] = (dk[0], v)
    if keep_all:
        return kept
    return ranges[0][0], v


def _dip_class(dip0_deg: float, spacing: float, length: float) -> int:
    d0 = math.tan(math.radians(dip0_deg)) * length / spacing
    if abs(d0 - round(d0)) > 1e-6:
        raise ValueError("incoming dip is not a lattice-step class")
    return int(round(d0))


def solve_realization(
    real: Realization,
    grid: LateralGrid,
    xs: np.ndarray,
    dip0_deg: float,
    dogleg_limit_deg: float,
    cfg: AgentConfig,
    scoring: ScoringConfig,
) -> ValueTable:
    """Full per-stage value tables for one realization.

    xs holds the decision abscissas including the current position; the
    incoming dip must sit exactly on a lattice-step class.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.size < 2:
        raise ValueError("need at least one stand")
    length = float(xs[1] - xs[0])
    spacing = cfg.y_spacing
    lat = build_lattice(cfg.lat_min, cfg.lat_max, spacing)
    stands = xs.size - 1
    d0 = _dip_class(dip0_deg, spacing, length)
    d1 = step_class_interval(
        class_dip_deg(d0, spacing, length), spacing, length, dogleg_limit_deg
    )
    ranges = [(d0, d0)] + _stage_class_ranges(d1, stands, spacing, length, dogleg_limit_deg)
    kept = _backward(
        real.boundaries[None], grid, lat, xs, ranges,
        cfg.gamma, scoring, spacing, dogleg_limit_deg, keep_all=True,
    )
    stages = [StageValues(d_lo, v[0]) for d_lo, v in kept]
    return ValueTable(lat=lat, xs=xs, gamma=cfg.gamma, stages=stages)


def decide(view: StateView, cfg: AgentConfig, scoring: ScoringConfig) -> DecideResult:
    """Pick the immediate decision by the robust ensemble-mean rule.

    Ties resolve toward stopping, then toward the smallest dip change, then
    toward the shallower target.
    """
    stop_alt = Alternative(None, 0.0, 0.0)
    if view.decisions_remaining <= 0:
        return DecideResult(True, None, (stop_alt,))

    length = view.stand_length
    spacing = cfg.y_spacing
    lat = build_lattice(
        min(cfg.lat_min, view.y), max(cfg.lat_max, view.y), spacing
    )
    i0 = lattice_index(lat, view.y)
    d1 = step_class_interval(view.dip_deg, spacing, length, view.dogleg_limit_deg)
    if d1[0] > d1[1]:
        return DecideResult(True, None, (stop_alt,))

    stands = view.decisions_remaining
    ranges = _stage_class_ranges(d1, stands, spacing, length, view.dogleg_limit_deg)
    xs = view.x + length * np.arange(1, stands + 1)
    arr = view.ensemble.as_array()
    v1_lo, v1 = _backward(
        arr, view.ensemble.grid, lat, xs, ranges,
        cfg.gamma, scoring, spacing, view.dogleg_limit_deg, keep_all=False,
    )

    grid = view.ensemble.grid
    x1 = view.x + length
    candidates = []
    for d in range(d1[0], d1[1] + 1):
        j = i0 + d
        if not 0 <= j < lat.size:
            continue
        yj = float(lat[j])
        imm = np.array(
            [
                score_segment(m, grid, (view.x, view.y), (x1, yj), scoring)
                for m in view.ensemble.members
            ]
        )
        val = float(np.mean(imm + cfg.gamma * v1[:, j, d - v1_lo]))
        chg = abs(class_dip_deg(d, spacing, length) - view.dip_deg)
        candidates.append(Alternative(yj, val, chg))

    candidates.sort(key=lambda a: (a.dip_change_deg, a.y))
    best = stop_alt
    for alt in candidates:
        if alt.mean_value > best.mean_value:
            best = alt
    alternatives = (stop_alt, *candidates)
    if best.y is None:
        return DecideResult(True, None, alternatives)
    return DecideResult(False, best.y, alternatives)


def extract_best_path(
    real: Realization,
    grid: LateralGrid,
    table: ValueTable,
    y0: float,
    dip0_deg: float,
    dogleg_limit_deg: float,
    scoring: ScoringConfig,
) -> list[tuple[float, float]]:
    """Walk the value table forward from (xs[0], y0), applying the same
    tie-breaking as decide. Returns the visited points including the start."""
    spacing = float(table.lat[1] - table.lat[0])
    length = float(table.xs[1] - table.xs[0])
    i = lattice_index(table.lat, y0)
    d = _dip_class(dip0_deg, spacing, length)
    points = [(float(table.xs[0]), float(table.lat[i]))]
    stands = table.xs.size - 1
    for k in range(stands):
        nxt = table.stages[k + 1]
        lo, hi = step_class_interval(
            class_dip_deg(d, spacing, length), spacing, length, dogleg_limit_deg
        )
        lo = max(lo, nxt.d_lo)
        hi = min(hi, nxt.d_lo + nxt.values.shape[1] - 1)
        cands = []
        for dd in range(lo, hi + 1):
            j = i + dd
            if not 0 <= j < table.lat.size:
                continue
            seg = score_segment(
                real, grid,
                (float(table.xs[k]), float(table.lat[i])),
                (float(table.xs[k + 1]), float(table.lat[j])),
                scoring,
            )
            val = seg + table.gamma * nxt.value(j, dd)
            chg = abs(class_dip_deg(dd, spacing, length) - class_dip_deg(d, spacing, length))
            cands.append((val, chg, float(table.lat[j]), j, dd))
        cands.sort(key=lambda c: (c[1], c[2]))
        best = None
        best_val = 0.0
        for val, chg, yj, j, dd in cands:
            if val > best_val:
                best_val = val
                best = (j, dd)
        if best is None:
            break
        i, d = best
        points.append((float(table.xs[k + 1]), float(table.lat[i])))
    return points


def validate_bellman(
    table: ValueTable,
    real: Realization,
    grid: LateralGrid,
    dogleg_limit_deg: float,
    scoring: ScoringConfig,
    atol: float = 1e-9,
) -> None:
    """Recompute every stage value from the next stage with the plain scorer
    and raise if any entry disagrees beyond atol."""
    spacing = float(table.lat[1] - table.lat[0])
    for k in range(len(table.stages) - 1):
        cur, nxt = table.stages[k], table.stages[k + 1]
        length = float(table.xs[k + 1] - table.xs[k])
        for dc in range(cur.values.shape[1]):
            d = cur.d_lo + dc
            lo, hi = step_class_interval(
                class_dip_deg(d, spacing, length), spacing, length, dogleg_limit_deg
            )
            lo = max(lo, nxt.d_lo)
            hi = min(hi, nxt.d_lo + nxt.values.shape[1] - 1)
            for i in range(table.lat.size):
                best = 0.0
                for dd in range(lo, hi + 1):
                    j = i + dd
                    if not 0 <= j < table.lat.size:
                        continue
                    seg = score_segment(
                        real, grid,
                        (float(table.xs[k]), float(table.lat[i])),
                        (float(table.xs[k + 1]), float(table.lat[j])),
                        scoring,
                    )
                    best = max(best, seg + table.gamma * nxt.value(j, dd))
                got = cur.value(i, d)
                if abs(got - best) > atol:
                    raise AssertionError(
                        f"Bellman mismatch at stage {k}, node {i}, class {d}: "
                        f"{got} vs {best}"
                    )


@dataclass
class EpisodeRun:
    points: np.ndarray
    final: dict
    decide_seconds: list[float]

    @property
    def trajectory(self) -> Trajectory:
        stopped = bool(self.final.get("stopped_early", False))
        return Trajectory(self.points, stopped_early=stopped)


def run_episode(handle, cfg: AgentConfig) -> EpisodeRun:
    """Drive one episode to completion through an episode handle.

    The handle abstracts local engine calls and the wire protocol behind the
    same five methods, so decisions are identical either way.
    """
    scoring = handle.scoring_config()
    times: list[float] = []
    while not handle.finished():
        view = handle.state_view()
        t0 = time.perf_counter()
        res = decide(view, cfg, scoring)
        times.append(time.perf_counter() - t0)
        if res.stop:
            handle.commit_stop()
        else:
            handle.commit_continue(res.y)
    return EpisodeRun(handle.trajectory(), handle.final(), times)
