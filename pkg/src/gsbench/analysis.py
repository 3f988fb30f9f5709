"""Post-hoc experiment analytics.

Rankings over percent-of-optimal results, pooled comparative ratings for
the identical-round pair, between-trajectory distances with consistency
classification, the random-guess sanity baseline, and integrity-checked
playback of persisted episode logs through the engine.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .engine import Decision, EpisodeError, commit, config_from_payload, new_episode
from .scoring import Trajectory, reward_rate

DEFAULT_LATTICE_SPAN = 29.0  # default agent lattice extent, metres


class ConsistencyClass(str, Enum):
    absolutely_consistent = "absolutely_consistent"
    consistent = "consistent"
    relatively_consistent = "relatively_consistent"
    other = "other"


@dataclass
class RoundOutcome:
    score: float
    percent_of_optimal: float | None
    trajectory: np.ndarray
    reached_sand: bool = False
    cfg_digest: str | None = None

    def __post_init__(self):
        self.trajectory = np.asarray(self.trajectory, dtype=float)


@dataclass
class ParticipantResult:
    participant_id: str
    rounds: dict[str, RoundOutcome] = field(default_factory=dict)

    def qualified(self, round_ids) -> bool:
        """Completed every round and reached a sand at least once."""
        if any(rid not in self.rounds for rid in round_ids):
            return False
        return any(self.rounds[rid].reached_sand for rid in round_ids)


def _mean_percent(p: ParticipantResult, round_ids) -> float:
    vals = [
        p.rounds[rid].percent_of_optimal
        if p.rounds[rid].percent_of_optimal is not None
        else 0.0
        for rid in round_ids
    ]
    return float(np.mean(vals))


def simple_ranking(
    results: list[ParticipantResult], round_ids: list[str]
) -> tuple[list[dict], list[str]]:
    """Mean percent-of-optimal ranking over qualified participants.

    Returns (rows, excluded_ids); rows descend by mean percent and carry
    anonymized HP-n ids in rank order. Exact ties keep input order and are
    flagged on both rows.
    """
    excluded = [p.participant_id for p in results if not p.qualified(round_ids)]
    ranked = [p for p in results if p.qualified(round_ids)]
    decorated = [
        (-_mean_percent(p, round_ids), i, p) for i, p in enumerate(ranked)
    ]
    decorated.sort(key=lambda t: (t[0], t[1]))
    rows = []
    for rank, (neg_mean, _, p) in enumerate(decorated, start=1):
        rows.append(
            {
                "rank": rank,
                "id": f"HP-{rank:02d}",
                "participant_id": p.participant_id,
                "mean_percent": -neg_mean,
                "percents": [p.rounds[r].percent_of_optimal for r in round_ids],
                "tied": False,
            }
        )
    for a, b in zip(rows, rows[1:]):
        if a["mean_percent"] == b["mean_percent"]:
            a["tied"] = b["tied"] = True
    return rows, excluded


def comparative_ranking(
    results: list[ParticipantResult], identical_rounds: tuple[str, str]
) -> list[dict]:
    """Pooled rating over the two identical rounds.

    Both rounds' percents go into one pool (two entries per participant),
    the pool is ranked, and ranks are scaled by half so the table reads on
    the single-round scale (60 pooled entries -> max rank* 30.0). A
    participant's comparative rating is the mean of their two rank* values;
    the returned rows ascend by that rating.
    """
    ra, rb = identical_rounds
    if ra == rb:
        raise ValueError("identical_rounds must name two distinct rounds")
    pool = []
    for p in results:
        if ra not in p.rounds or rb not in p.rounds:
            raise ValueError(
                f"participant {p.participant_id!r} is missing one of the "
                f"identical rounds {identical_rounds}"
            )
        da, db = p.rounds[ra].cfg_digest, p.rounds[rb].cfg_digest
        if da is not None and db is not None and da != db:
            raise ValueError(
                f"rounds {identical_rounds} are not identical set-ups "
                f"(config digests differ for {p.participant_id!r})"
            )
        for rid in (ra, rb):
            pct = p.rounds[rid].percent_of_optimal
            pool.append((pct if pct is not None else -math.inf, p.participant_id, rid))
    pool.sort(key=lambda t: (-t[0], t[1], t[2]))
    scale = len(results) / len(pool) if pool else 0.0  # one-round scale: x0.5
    stars: dict[str, list[float]] = {}
    for rank0, (_, pid, _) in enumerate(pool):
        stars.setdefault(pid, []).append((rank0 + 1) * scale)
    rows = [
        {
            "participant_id": pid,
            "rank_stars": tuple(sorted(vals)),
            "rating": float(np.mean(vals)),
        }
        for pid, vals in stars.items()
    ]
    rows.sort(key=lambda r: (r["rating"], r["participant_id"]))
    return rows


def _points(t) -> np.ndarray:
    if isinstance(t, Trajectory):
        return t.points
    return np.asarray(t, dtype=float)


def trajectory_distance(t1, t2, lattice_span: float = DEFAULT_LATTICE_SPAN) -> float:
    """Mean |y1 - y2| at shared decision abscissas; each abscissa only one
    trajectory reached adds a fixed penalty of a quarter lattice span.

    Symmetric, zero on identical inputs, and bounded, so early stoppers
    stay comparable.
    """
    p1, p2 = _points(t1), _points(t2)
    y2_by_x = {round(float(x), 6): float(y) for x, y in p2}
    shared_err = 0.0
    shared = 0
    for x, y in p1:
        key = round(float(x), 6)
        if key in y2_by_x:
            shared_err += abs(float(y) - y2_by_x[key])
            shared += 1
    if shared == 0:
        raise ValueError("trajectories share no decision abscissas")
    missing = (p1.shape[0] - shared) + (p2.shape[0] - shared)
    penalty = lattice_span / 4.0
    return (shared_err + penalty * missing) / (shared + missing)


def classify_consistency(
    p: ParticipantResult,
    round_ids: tuple[str, str, str],
    lattice_span: float = DEFAULT_LATTICE_SPAN,
) -> ConsistencyClass:
    """Consistency across the three rounds, where the last two are the
    identical set-ups.

    Tiers, first match wins: distance zero between the identical rounds;
    below half a metre; below the other-round distances by two standard
    deviations (population std over the participant's three pairwise
    distances); otherwise other.
    """
    r1, r2, r3 = round_ids
    t1 = p.rounds[r1].trajectory
    t2 = p.rounds[r2].trajectory
    t3 = p.rounds[r3].trajectory
    d23 = trajectory_distance(t2, t3, lattice_span)
    d12 = trajectory_distance(t1, t2, lattice_span)
    d13 = trajectory_distance(t1, t3, lattice_span)
    if d23 == 0.0:
        return ConsistencyClass.absolutely_consistent
    if d23 < 0.5:
        return ConsistencyClass.consistent
    std = float(np.std([d12, d13, d23]))
    if d23 <= min(d12, d13) - 2.0 * std:
        return ConsistencyClass.relatively_consistent
    return ConsistencyClass.other


def random_guess_baseline(n_participants: int, n_rounds: int) -> float:
    """Expected number of participants picking the better of two candidate
    sands in every round by pure chance."""
    if n_participants < 0 or n_rounds < 0:
        raise ValueError("counts must be non-negative")
    return n_participants * 0.5 ** n_rounds


# ---------------------------------------------------------------------------
# playback


class IntegrityError(RuntimeError):
    def __init__(self, episode_id: str, step, detail: str):
        super().__init__(f"episode {episode_id!r} step {step}: {detail}")
        self.episode_id = episode_id
        self.step = step


@dataclass
class EpisodeReplay:
    episode_id: str
    participant_id: str
    round_id: str
    score: float
    percent_of_optimal: float | None
    trajectory: np.ndarray
    reached_sand: bool


def _reached_sand(state) -> bool:
    """Did the drilled path cross a sand in the truth? Checked at the same
    per-meter midpoints the scorer integrates over."""
    pts = state.drilled
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        dx = x1 - x0
        n = max(1, math.ceil(dx - 1e-12))
        w = dx / n
        for k in range(n):
            xm = x0 + (k + 0.5) * w
            ym = y0 + (xm - x0) / dx * (y1 - y0)
            if reward_rate(state.truth, state.grid, xm, ym, state.cfg.scoring) > 0:
                return True
    return False


def read_log(path: str | Path) -> list[dict]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [json.loads(line) for line in lines if line.strip()]


def playback(path: str | Path) -> list[EpisodeReplay]:
    """Re-run every episode in a log through the engine and verify it.

    Every decision is committed afresh; the logged post-decision ensemble
    generation and the logged final score must match the recomputation
    exactly, otherwise an IntegrityError names the episode and step.
    """
    by_episode: dict[str, list[dict]] = {}
    finish_pos: dict[str, int] = {}
    for pos, rec in enumerate(read_log(path)):
        by_episode.setdefault(rec["episode_id"], []).append(rec)
        if "score" in rec:
            finish_pos[rec["episode_id"]] = pos

    replays = []
    for episode_id, recs in by_episode.items():
        recs.sort(key=lambda r: r["seq"])
        header = recs[0]
        if "config" not in header:
            raise IntegrityError(episode_id, 0, "missing config header record")
        cfg = config_from_payload(header["config"])
        state = new_episode(cfg)
        final_rec = None
        for rec in recs[1:]:
            if "decision" in rec:
                if state.finished:
                    raise IntegrityError(
                        episode_id, rec["seq"], "decision after episode finished"
                    )
                try:
                    state = commit(state, Decision.from_payload(rec["decision"]))
                except EpisodeError as exc:
                    raise IntegrityError(episode_id, rec["seq"], str(exc)) from exc
                if state.ensemble.generation != rec["generation"]:
                    raise IntegrityError(
                        episode_id,
                        rec["seq"],
                        f"ensemble generation {state.ensemble.generation} != "
                        f"logged {rec['generation']}",
                    )
            elif "score" in rec:
                final_rec = rec
        if final_rec is None:
            raise IntegrityError(episode_id, len(recs), "missing final record")
        if not state.finished:
            raise IntegrityError(
                episode_id, final_rec["seq"], "log ends before the episode finished"
            )
        fr = state.final_result
        if fr.score != final_rec["score"]:
            raise IntegrityError(
                episode_id,
                final_rec["seq"],
                f"recomputed score {fr.score} != logged {final_rec['score']}",
            )
        if fr.percent_of_optimal != final_rec["percent_of_optimal"]:
            raise IntegrityError(
                episode_id,
                final_rec["seq"],
                f"recomputed percent {fr.percent_of_optimal} != "
                f"logged {final_rec['percent_of_optimal']}",
            )
        replays.append(
            EpisodeReplay(
                episode_id=episode_id,
                participant_id=header.get("participant_id", episode_id),
                round_id=header.get("round_id", Path(path).stem),
                score=fr.score,
                percent_of_optimal=fr.percent_of_optimal,
                trajectory=state.drilled.copy(),
                reached_sand=_reached_sand(state),
            )
        )
    replays.sort(key=lambda r: finish_pos[r.episode_id])  # finish order
    return replays


def load_results(log_dir: str | Path) -> tuple[list[ParticipantResult], list[str]]:
    """Playback of every round log in a directory, grouped by participant."""
    log_dir = Path(log_dir)
    participants: dict[str, ParticipantResult] = {}
    round_ids: list[str] = []
    for path in sorted(log_dir.glob("*.jsonl")):
        for rep in playback(path):
            if rep.round_id not in round_ids:
                round_ids.append(rep.round_id)
            pr = participants.setdefault(
                rep.participant_id, ParticipantResult(rep.participant_id)
            )
            if rep.round_id not in pr.rounds:  # first finish is the round result
                pr.rounds[rep.round_id] = RoundOutcome(
                    score=rep.score,
                    percent_of_optimal=rep.percent_of_optimal,
                    trajectory=rep.trajectory,
                    reached_sand=rep.reached_sand,
                )
    return list(participants.values()), round_ids


def trajectory_series(replays: list[EpisodeReplay]) -> list[dict]:
    """Plot-ready overlay data: one series per episode."""
    return [
        {
            "episode_id": r.episode_id,
            "participant_id": r.participant_id,
            "round_id": r.round_id,
            "x": [float(v) for v in r.trajectory[:, 0]],
            "y": [float(v) for v in r.trajectory[:, 1]],
            "score": r.score,
            "percent_of_optimal": r.percent_of_optimal,
        }
        for r in replays
    ]
