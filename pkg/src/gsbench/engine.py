"""Episode state machine.

An episode is a strictly serial decision sequence: at each decision point
the driller either commits the next 30 m stand to a lattice depth inside
the dog-leg cone (which triggers a measurement-and-assimilation step) or
stops. Stopping, or exhausting the decision budget, finishes the episode
and scores the drilled path against the hidden truth and against the
deterministic optimum computed on that truth.

Transitions are functional: commit returns a fresh state and never mutates
its input, so any prefix of an episode can be replayed from the record.
"""

from __future__ import annotations

import hashlib
import json
import math
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import numpy as np

from .assimilation import EnKFConfig, update_after_stand
from .dss_agent import AgentConfig, StateView, extract_best_path, solve_realization
from .geomodel import (
    Ensemble,
    LateralGrid,
    PriorConfig,
    Realization,
    sample_prior,
    sample_truth,
)
from .kinematics import dip_deg, is_on_lattice, snap_down, snap_up, step_class_interval
from .measurement import ToolConfig
from .scoring import ScoringConfig, Trajectory, score_trajectory

_PERCENT_SLACK = 1e-6


class EpisodeError(RuntimeError):
    """Transition attempted on a state that cannot accept it."""


class IllegalDecisionError(EpisodeError):
    """Decision outside the lattice or the dog-leg cone."""


@dataclass(frozen=True)
class EpisodeConfig:
    stand_length: float = 30.0
    max_decisions: int = 14
    dogleg_limit_deg: float = 2.0
    start: tuple[float, float] = (0.0, 4.5)
    initial_dip_deg: float = 0.0
    y_grid_spacing: float = 0.25
    ensemble_size: int = 120
    prior: PriorConfig = field(default_factory=PriorConfig)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    tool: ToolConfig = field(default_factory=ToolConfig)
    enkf: EnKFConfig = field(default_factory=EnKFConfig)
    truth_seed: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))
        if self.max_decisions < 1:
            raise ValueError("max_decisions must be >= 1")
        if self.dogleg_limit_deg <= 0:
            raise ValueError("dogleg_limit_deg must be > 0")
        if self.stand_length <= 0:
            raise ValueError("stand_length must be > 0")
        if self.y_grid_spacing <= 0:
            raise ValueError("y_grid_spacing must be > 0")
        if self.ensemble_size < 2:
            raise ValueError("ensemble_size must be >= 2")
        if not is_on_lattice(self.start[1], self.y_grid_spacing):
            raise ValueError("start depth must sit on the y lattice")
        if abs(self.tool.noise_std - self.enkf.obs_error_std) > 1e-12:
            raise ValueError(
                "tool.noise_std and enkf.obs_error_std must match for a "
                "consistent filter"
            )


def make_grid(cfg: EpisodeConfig) -> LateralGrid:
    """Lateral grid covering the drillable extent, one node per measurement
    sub-location."""
    x0 = cfg.start[0]
    x1 = x0 + cfg.stand_length * cfg.max_decisions
    n = cfg.max_decisions * cfg.tool.sub_locations_per_stand + 1
    return LateralGrid(np.linspace(x0, x1, n))


@dataclass(frozen=True)
class Decision:
    kind: str
    y: float | None = None

    def __post_init__(self):
        if self.kind not in ("continue", "stop"):
            raise ValueError(f"unknown decision kind {self.kind!r}")
        if self.kind == "continue":
            if self.y is None or not math.isfinite(self.y):
                raise ValueError("continue decision needs a finite target depth")
        elif self.y is not None:
            raise ValueError("stop decision carries no target depth")

    @staticmethod
    def stop() -> "Decision":
        return Decision("stop")

    @staticmethod
    def go(y: float) -> "Decision":
        return Decision("continue", float(y))

    def to_payload(self) -> dict:
        if self.kind == "stop":
            return {"kind": "stop"}
        return {"kind": "continue", "y": self.y}

    @staticmethod
    def from_payload(d: dict) -> "Decision":
        return Decision(d["kind"], d.get("y"))


@dataclass(frozen=True)
class FinalResult:
    score: float
    optimal_score: float
    percent_of_optimal: float | None
    stopped_early: bool

    def to_payload(self) -> dict:
        return {
            "score": self.score,
            "optimal_score": self.optimal_score,
            "percent_of_optimal": self.percent_of_optimal,
            "stopped_early": self.stopped_early,
        }


@dataclass(frozen=True)
class EpisodeState:
    cfg: EpisodeConfig
    grid: LateralGrid
    drilled: np.ndarray  # (k, 2)
    current_dip_deg: float
    decisions_taken: int
    ensemble: Ensemble
    truth: Realization  # never serialized to clients before the finish
    finished: bool = False
    final_result: FinalResult | None = None

    @property
    def position(self) -> tuple[float, float]:
        return float(self.drilled[-1, 0]), float(self.drilled[-1, 1])

    def view(self) -> StateView:
        """Client-safe slice of the state: everything except the truth."""
        x, y = self.position
        return StateView(
            ensemble=self.ensemble,
            x=x,
            y=y,
            dip_deg=self.current_dip_deg,
            decisions_remaining=self.cfg.max_decisions - self.decisions_taken,
            stand_length=self.cfg.stand_length,
            dogleg_limit_deg=self.cfg.dogleg_limit_deg,
        )


def new_episode(cfg: EpisodeConfig) -> EpisodeState:
    grid = make_grid(cfg)
    ensemble = sample_prior(cfg.prior, grid, cfg.ensemble_size)
    truth = sample_truth(cfg.prior, grid, cfg.truth_seed)
    return EpisodeState(
        cfg=cfg,
        grid=grid,
        drilled=np.array([cfg.start], dtype=float),
        current_dip_deg=cfg.initial_dip_deg,
        decisions_taken=0,
        ensemble=ensemble,
        truth=truth,
    )


def legal_moves(state: EpisodeState) -> list[Decision]:
    """Stop plus every lattice depth reachable inside the dog-leg cone."""
    if state.finished:
        raise EpisodeError("episode is finished")
    cfg = state.cfg
    if state.decisions_taken >= cfg.max_decisions:
        return [Decision.stop()]
    lo, hi = step_class_interval(
        state.current_dip_deg, cfg.y_grid_spacing, cfg.stand_length, cfg.dogleg_limit_deg
    )
    _, y_cur = state.position
    moves = [Decision.stop()]
    moves.extend(
        Decision.go(y_cur + d * cfg.y_grid_spacing) for d in range(lo, hi + 1)
    )
    return moves


def _check_continue(state: EpisodeState, y_next: float) -> float:
    """Validate a continue target; returns the new dip in degrees."""
    cfg = state.cfg
    if not math.isfinite(y_next):
        raise IllegalDecisionError("target depth must be finite")
    if not is_on_lattice(y_next, cfg.y_grid_spacing):
        raise IllegalDecisionError(
            f"target depth {y_next} is off the {cfg.y_grid_spacing} m lattice"
        )
    _, y_cur = state.position
    new_dip = dip_deg(y_next - y_cur, cfg.stand_length)
    change = new_dip - state.current_dip_deg
    tol = 1e-9
    if change > cfg.dogleg_limit_deg + tol:
        raise IllegalDecisionError(
            f"dip change {change:+.4f} deg exceeds the upper dog-leg bound "
            f"+{cfg.dogleg_limit_deg} deg"
        )
    if change < -cfg.dogleg_limit_deg - tol:
        raise IllegalDecisionError(
            f"dip change {change:+.4f} deg exceeds the lower dog-leg bound "
            f"-{cfg.dogleg_limit_deg} deg"
        )
    return new_dip


def _finish(state: EpisodeState, stopped_early: bool) -> EpisodeState:
    cfg = state.cfg
    if state.drilled.shape[0] >= 2:
        traj = Trajectory(state.drilled.copy(), stopped_early=stopped_early)
        score = float(score_trajectory(traj, state.truth, state.grid, cfg.scoring))
    else:
        score = 0.0
    _, optimal = optimal_on_truth(cfg, state.truth)
    return replace(
        state,
        finished=True,
        final_result=FinalResult(
            score=float(score),
            optimal_score=float(optimal),
            percent_of_optimal=percent_of_optimal(score, optimal),
            stopped_early=stopped_early,
        ),
    )


def commit(state: EpisodeState, decision: Decision) -> EpisodeState:
    """Apply one decision, returning the successor state.

    Continue appends the stand, runs the measurement-and-update cycle and
    spends one decision; the last allowed continue finishes automatically.
    Stop finishes without touching the ensemble.
    """
    if state.finished:
        raise EpisodeError("episode is finished")
    if decision.kind == "stop":
        return _finish(state, stopped_early=state.decisions_taken < state.cfg.max_decisions)

    cfg = state.cfg
    if state.decisions_taken >= cfg.max_decisions:
        raise IllegalDecisionError("decision budget exhausted; only stop is legal")
    new_dip = _check_continue(state, decision.y)
    x_cur, y_cur = state.position
    end = (x_cur + cfg.stand_length, float(decision.y))
    result, _ = update_after_stand(
        state.ensemble,
        state.truth,
        (x_cur, y_cur),
        end,
        cfg.tool,
        cfg.enkf,
        stand_index=state.decisions_taken,
        min_thickness=cfg.prior.min_thickness,
    )
    nxt = replace(
        state,
        drilled=np.vstack([state.drilled, [end]]),
        current_dip_deg=new_dip,
        decisions_taken=state.decisions_taken + 1,
        ensemble=result.ensemble,
    )
    if nxt.decisions_taken >= cfg.max_decisions:
        nxt = _finish(nxt, stopped_early=False)
    return nxt


def percent_of_optimal(score: float, optimal: float) -> float | None:
    """Score as a percentage of the truth optimum.

    The optimum is never negative (stopping scores zero), so the ratio is
    defined whenever it is positive. A zero optimum yields 100 for a zero
    score and None (undefined) for a negative one.
    """
    if optimal < 0:
        raise ValueError("optimal score cannot be negative")
    if optimal == 0:
        return 100.0 if score == 0 else None
    p = float(100.0 * score / optimal)
    if p > 100.0:
        if p > 100.0 + _PERCENT_SLACK:
            raise AssertionError(
                f"trajectory outscored the computed optimum ({p:.9f}%)"
            )
        p = 100.0
    return p


def optimal_on_truth(cfg: EpisodeConfig, truth: Realization) -> tuple[Trajectory, float]:
    """Best achievable trajectory on the (known) truth, by undiscounted
    backward induction over the same lattice and cone the players face."""
    grid = make_grid(cfg)
    acfg = AgentConfig.from_prior(cfg.prior, cfg.y_grid_spacing, gamma=1.0)
    y0 = cfg.start[1]
    lat_min = min(acfg.lat_min, snap_down(y0, cfg.y_grid_spacing))
    lat_max = max(acfg.lat_max, snap_up(y0, cfg.y_grid_spacing))
    acfg = replace(acfg, lat_min=lat_min, lat_max=lat_max)
    xs = cfg.start[0] + cfg.stand_length * np.arange(cfg.max_decisions + 1)
    table = solve_realization(
        truth, grid, xs, cfg.initial_dip_deg, cfg.dogleg_limit_deg, acfg, cfg.scoring
    )
    path = extract_best_path(
        truth, grid, table, y0, cfg.initial_dip_deg, cfg.dogleg_limit_deg, cfg.scoring
    )
    traj = Trajectory(
        np.array(path, dtype=float), stopped_early=len(path) - 1 < cfg.max_decisions
    )
    if traj.points.shape[0] < 2:
        return traj, 0.0
    return traj, float(score_trajectory(traj, truth, grid, cfg.scoring))


def random_legal_trajectory(cfg: EpisodeConfig, rng: np.random.Generator) -> Trajectory:
    """Uniformly random walk over legal moves (stop included), geometry only."""
    x, y = cfg.start
    dip = cfg.initial_dip_deg
    pts = [(x, y)]
    stopped = False
    for _ in range(cfg.max_decisions):
        lo, hi = step_class_interval(
            dip, cfg.y_grid_spacing, cfg.stand_length, cfg.dogleg_limit_deg
        )
        options: list[float | None] = [None]
        options.extend(y + d * cfg.y_grid_spacing for d in range(lo, hi + 1))
        pick = options[int(rng.integers(len(options)))]
        if pick is None:
            stopped = True
            break
        dip = dip_deg(pick - y, cfg.stand_length)
        x, y = x + cfg.stand_length, float(pick)
        pts.append((x, y))
    return Trajectory(np.array(pts, dtype=float), stopped_early=stopped)


# ---------------------------------------------------------------------------
# config wire form and episode records


def _dataclass_payload(obj) -> dict:
    out = {}
    for name in obj.__dataclass_fields__:
        val = getattr(obj, name)
        out[name] = list(val) if isinstance(val, tuple) else val
    return out


def config_to_payload(cfg: EpisodeConfig) -> dict:
    out = _dataclass_payload(cfg)
    out["prior"] = _dataclass_payload(cfg.prior)
    out["scoring"] = _dataclass_payload(cfg.scoring)
    out["tool"] = _dataclass_payload(cfg.tool)
    out["enkf"] = _dataclass_payload(cfg.enkf)
    return out


def config_from_payload(d: dict) -> EpisodeConfig:
    kw = dict(d)
    kw["start"] = tuple(kw["start"])
    kw["prior"] = PriorConfig(**{**kw["prior"], "mean_depths": tuple(kw["prior"]["mean_depths"])})
    kw["scoring"] = ScoringConfig(**kw["scoring"])
    kw["tool"] = ToolConfig(**kw["tool"])
    kw["enkf"] = EnKFConfig(**kw["enkf"])
    return EpisodeConfig(**kw)


def config_digest(cfg: EpisodeConfig) -> str:
    blob = json.dumps(config_to_payload(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class LocalEpisodeHandle:
    """In-process episode driver with an append-only decision record.

    Presents the same five-method surface as the remote client, so agents
    cannot tell (and need not care) which side of the wire they run on.
    """

    def __init__(self, cfg: EpisodeConfig, episode_id: str | None = None):
        self.cfg = cfg
        self.episode_id = episode_id or uuid.uuid4().hex
        self._digest = config_digest(cfg)
        self.state = new_episode(cfg)
        self._records: list[dict] = [
            {
                "episode_id": self.episode_id,
                "cfg_digest": self._digest,
                "seq": 0,
                "config": config_to_payload(cfg),
                "timestamp": _now(),
            }
        ]

    def _record(self, decision: Decision) -> None:
        self._records.append(
            {
                "episode_id": self.episode_id,
                "cfg_digest": self._digest,
                "seq": len(self._records),
                "decision": decision.to_payload(),
                "generation": self.state.ensemble.generation,
                "timestamp": _now(),
            }
        )
        if self.state.finished:
            fr = self.state.final_result
            self._records.append(
                {
                    "episode_id": self.episode_id,
                    "cfg_digest": self._digest,
                    "seq": len(self._records),
                    "score": fr.score,
                    "percent_of_optimal": fr.percent_of_optimal,
                    "timestamp": _now(),
                }
            )

    # agent-facing protocol -------------------------------------------------

    def scoring_config(self) -> ScoringConfig:
        return self.cfg.scoring

    def state_view(self) -> StateView:
        return self.state.view()

    def commit_continue(self, y: float) -> None:
        decision = Decision.go(y)
        self.state = commit(self.state, decision)
        self._record(decision)

    def commit_stop(self) -> None:
        decision = Decision.stop()
        self.state = commit(self.state, decision)
        self._record(decision)

    def finished(self) -> bool:
        return self.state.finished

    def final(self) -> dict:
        if not self.state.finished:
            raise EpisodeError("episode is not finished")
        return self.state.final_result.to_payload()

    def trajectory(self) -> np.ndarray:
        return self.state.drilled.copy()

    # persistence ------------------------------------------------------------

    def records(self) -> list[dict]:
        return [dict(r) for r in self._records]


def replay_decisions(cfg: EpisodeConfig, decisions: list[Decision]) -> EpisodeState:
    """Re-run a decision list against a fresh episode."""
    state = new_episode(cfg)
    for d in decisions:
        state = commit(state, d)
    if not state.finished:
        state = commit(state, Decision.stop())
    return state
