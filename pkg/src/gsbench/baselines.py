"""Reference opponents for benchmarking the planning agent.

greedy: one-stand lookahead on the ensemble-mean immediate value, no
continuation term. random: uniform over the legal moves, stop included.
Both speak the same episode-handle protocol as the full agent.
"""

from __future__ import annotations

import time

import numpy as np

from .dss_agent import EpisodeRun, StateView
from .kinematics import dip_deg, step_class_interval
from .scoring import ScoringConfig, score_segment


def cone_targets(view: StateView, spacing: float) -> list[float]:
    """Lattice depths reachable this stand under the dog-leg bound."""
    if view.decisions_remaining <= 0:
        return []
    lo, hi = step_class_interval(
        view.dip_deg, spacing, view.stand_length, view.dogleg_limit_deg
    )
    return [view.y + d * spacing for d in range(lo, hi + 1)]


def greedy_pick(view: StateView, spacing: float, scoring: ScoringConfig) -> float | None:
    """Target depth maximizing the mean immediate segment value, or None
    to stop when no continuation is strictly positive. Ties resolve toward
    the smallest dip change, then the shallower target."""
    ens = view.ensemble
    x1 = view.x + view.stand_length
    order = sorted(
        cone_targets(view, spacing),
        key=lambda y: (abs(dip_deg(y - view.y, view.stand_length) - view.dip_deg), y),
    )
    best_y, best_v = None, 0.0
    for y in order:
        vals = [
            score_segment(m, ens.grid, (view.x, view.y), (x1, y), scoring)
            for m in ens.members
        ]
        v = float(np.mean(vals))
        if v > best_v:
            best_y, best_v = y, v
    return best_y


def random_pick(view: StateView, spacing: float, rng: np.random.Generator) -> float | None:
    options: list[float | None] = [None] + cone_targets(view, spacing)
    return options[int(rng.integers(len(options)))]


def _drive(handle, pick) -> EpisodeRun:
    times: list[float] = []
    while not handle.finished():
        view = handle.state_view()
        t0 = time.perf_counter()
        y = pick(view)
        times.append(time.perf_counter() - t0)
        if y is None:
            handle.commit_stop()
        else:
            handle.commit_continue(y)
    return EpisodeRun(handle.trajectory(), handle.final(), times)


def run_greedy_episode(handle, spacing: float = 0.25) -> EpisodeRun:
    scoring = handle.scoring_config()
    return _drive(handle, lambda v: greedy_pick(v, spacing, scoring))


def run_random_episode(handle, seed: int, spacing: float = 0.25) -> EpisodeRun:
    rng = np.random.default_rng([seed, 4])  # own stream, clear of engine draws
    return _drive(handle, lambda v: random_pick(v, spacing, rng))
