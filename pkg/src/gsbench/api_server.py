"""HTTP service exposing rounds to human GUIs and bots.

Each session owns one episode of the round's configuration, so every
participant in a round faces the identical starting ensemble and hidden
truth. Evaluate is a pure what-if scorer against the session's current
ensemble; commit is the only mutator and appends to the round's decision
log before the response leaves the server (write-ahead, so a served commit
is always recoverable). The truth never appears in any response body
before the episode is finished, and even then only as scores.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .dss_agent import AgentConfig
from .engine import (
    Decision,
    EpisodeConfig,
    EpisodeError,
    IllegalDecisionError,
    LocalEpisodeHandle,
    config_digest,
)
from .geomodel import ensemble_to_payload
from .scoring import Trajectory, evaluate_on_ensemble

_ABSCISSA_TOL = 1e-6


class SessionRequest(BaseModel):
    participant_id: str = Field(min_length=1)


class PointIn(BaseModel):
    x: float
    y: float


class EvaluateRequest(BaseModel):
    trajectory: list[PointIn]


class CommitRequest(BaseModel):
    action: Literal["continue", "stop"]
    y: float | None = None


@dataclass
class RoundSpec:
    round_id: str
    cfg: EpisodeConfig

    @property
    def digest(self) -> str:
        return config_digest(self.cfg)


@dataclass
class _Finisher:
    participant_id: str
    score: float
    percent: float | None
    order: int
    finished_at: str


@dataclass
class _SessionRec:
    session_id: str
    participant_id: str
    round_id: str
    handle: LocalEpisodeHandle
    created_at: str
    log_cursor: int = 0


@dataclass
class _ServerState:
    rounds: dict[str, RoundSpec]
    log_dir: Path | None
    sessions: dict[str, _SessionRec] = field(default_factory=dict)
    finishers: dict[str, list[_Finisher]] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _abscissas(cfg: EpisodeConfig) -> list[float]:
    return [cfg.start[0] + k * cfg.stand_length for k in range(cfg.max_decisions + 1)]


def _constraints(cfg: EpisodeConfig) -> dict:
    agent = AgentConfig.from_prior(cfg.prior, cfg.y_grid_spacing)
    return {
        "stand_length": cfg.stand_length,
        "dogleg_limit_deg": cfg.dogleg_limit_deg,
        "y_grid_spacing": cfg.y_grid_spacing,
        "max_decisions": cfg.max_decisions,
        "start": list(cfg.start),
        "initial_dip_deg": cfg.initial_dip_deg,
        "scoring": asdict(cfg.scoring),
        "lattice": {"y_min": agent.lat_min, "y_max": agent.lat_max},
    }


def _state_block(rec: _SessionRec) -> dict:
    state = rec.handle.state
    x, y = state.position
    return {
        "x": x,
        "y": y,
        "dip_deg": state.current_dip_deg,
        "decisions_taken": state.decisions_taken,
        "decisions_remaining": state.cfg.max_decisions - state.decisions_taken,
    }


def _write_ahead(gs: _ServerState, rec: _SessionRec) -> None:
    """Flush any unwritten episode records to the round log before replying."""
    records = rec.handle.records()
    fresh = records[rec.log_cursor:]
    rec.log_cursor = len(records)
    if gs.log_dir is None or not fresh:
        return
    gs.log_dir.mkdir(parents=True, exist_ok=True)
    path = gs.log_dir / f"{rec.round_id}.jsonl"
    with open(path, "a", encoding="utf-8") as fh:
        for r in fresh:
            line = dict(r)
            line["round_id"] = rec.round_id
            line["session_id"] = rec.session_id
            line["participant_id"] = rec.participant_id
            fh.write(json.dumps(line) + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def _rank_among(finishers: list[_Finisher], mine: _Finisher) -> int:
    """1-based rank: higher percent first, earlier finish breaks ties.
    Undefined percents sort after every defined one."""

    def beats(other: _Finisher) -> bool:
        if other.percent is None:
            return False
        if mine.percent is None:
            return True
        if other.percent != mine.percent:
            return other.percent > mine.percent
        return other.order < mine.order

    return 1 + sum(beats(f) for f in finishers if f is not mine)


def create_app(
    rounds: dict[str, EpisodeConfig],
    log_dir: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    """API over the configured rounds; optionally also serves the browser
    client from static_dir so participants need no installation."""
    app = FastAPI(title="geosteering benchmark server")
    gs = _ServerState(
        rounds={rid: RoundSpec(rid, cfg) for rid, cfg in rounds.items()},
        log_dir=Path(log_dir) if log_dir is not None else None,
    )
    app.state.gs = gs

    def _round_or_404(round_id: str) -> RoundSpec:
        spec = gs.rounds.get(round_id)
        if spec is None:
            raise HTTPException(404, f"unknown round {round_id!r}")
        return spec

    def _session_or_404(session_id: str) -> _SessionRec:
        rec = gs.sessions.get(session_id)
        if rec is None:
            raise HTTPException(404, f"unknown session {session_id!r}")
        return rec

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/rounds")
    def list_rounds() -> dict:
        return {
            "rounds": [
                {
                    "round_id": spec.round_id,
                    "cfg_digest": spec.digest,
                    "prior_seed": spec.cfg.prior.seed,
                    "max_decisions": spec.cfg.max_decisions,
                }
                for spec in gs.rounds.values()
            ]
        }

    @app.post("/rounds/{round_id}/sessions")
    def open_session(round_id: str, body: SessionRequest) -> dict:
        spec = _round_or_404(round_id)
        with gs.lock:
            for rec in gs.sessions.values():
                if (
                    rec.round_id == round_id
                    and rec.participant_id == body.participant_id
                    and not rec.handle.finished()
                ):
                    raise HTTPException(
                        409,
                        f"participant {body.participant_id!r} already has an "
                        f"open session in round {round_id!r}",
                    )
            session_id = uuid.uuid4().hex
            rec = _SessionRec(
                session_id=session_id,
                participant_id=body.participant_id,
                round_id=round_id,
                handle=LocalEpisodeHandle(spec.cfg, episode_id=session_id),
                created_at=_now(),
            )
            gs.sessions[session_id] = rec
            _write_ahead(gs, rec)  # header record with the round config
            return {
                "session_id": session_id,
                "round_id": round_id,
                "participant_id": body.participant_id,
                "cfg_digest": spec.digest,
                "abscissas": _abscissas(spec.cfg),
                "constraints": _constraints(spec.cfg),
                "realizations": ensemble_to_payload(rec.handle.state.ensemble),
                "state": _state_block(rec),
            }

    @app.post("/sessions/{session_id}/evaluate")
    def evaluate(session_id: str, body: EvaluateRequest) -> dict:
        rec = _session_or_404(session_id)
        with gs.lock:
            if rec.handle.finished():
                raise HTTPException(409, "session is finished")
            state = rec.handle.state
            cfg = state.cfg
            pts = [(p.x, p.y) for p in body.trajectory]
            if not pts:
                raise HTTPException(422, "trajectory must contain at least one point")
            xs = _abscissas(cfg)
            for i, (x, y) in enumerate(pts):
                if i and x <= pts[i - 1][0]:
                    raise HTTPException(
                        422, f"trajectory x must be ascending: point {i} has x={x}"
                    )
                if min(abs(x - a) for a in xs) > _ABSCISSA_TOL:
                    raise HTTPException(
                        422,
                        f"point {i} x={x} is not on a decision abscissa "
                        f"(multiples of {cfg.stand_length} m from {cfg.start[0]})",
                    )
            if len(pts) == 1:  # nothing beyond the start: zero for everyone
                scores = [
                    {"score": 0.0, "realization": i}
                    for i in range(state.ensemble.size)
                ]
            else:
                dist = evaluate_on_ensemble(Trajectory(pts), state.ensemble, cfg.scoring)
                scores = dist.to_payload()
            return {"generation": state.ensemble.generation, "scores": scores}

    @app.post("/sessions/{session_id}/commit")
    def commit_decision(session_id: str, body: CommitRequest) -> dict:
        rec = _session_or_404(session_id)
        with gs.lock:
            if rec.handle.finished():
                raise HTTPException(409, "session is finished")
            try:
                if body.action == "stop":
                    rec.handle.commit_stop()
                else:
                    if body.y is None:
                        raise HTTPException(422, "continue commit needs a target y")
                    rec.handle.commit_continue(body.y)
            except IllegalDecisionError as err:
                raise HTTPException(422, str(err)) from err
            except EpisodeError as err:
                raise HTTPException(409, str(err)) from err
            _write_ahead(gs, rec)

            if not rec.handle.finished():
                state = rec.handle.state
                return {
                    "finished": False,
                    "realizations": ensemble_to_payload(state.ensemble),
                    "generation": state.ensemble.generation,
                    "state": _state_block(rec),
                }

            final = rec.handle.final()
            board = gs.finishers.setdefault(rec.round_id, [])
            mine = next(
                (f for f in board if f.participant_id == rec.participant_id), None
            )
            if mine is None:  # first finish is the participant's round result
                mine = _Finisher(
                    participant_id=rec.participant_id,
                    score=final["score"],
                    percent=final["percent_of_optimal"],
                    order=len(board),
                    finished_at=_now(),
                )
                board.append(mine)
            return {
                "finished": True,
                "score": final["score"],
                "percent": final["percent_of_optimal"],
                "rank": int(_rank_among(board, mine)),
                "finishers": len(board),
                "stopped_early": final["stopped_early"],
            }

    @app.get("/rounds/{round_id}/scoreboard")
    def scoreboard(round_id: str) -> dict:
        _round_or_404(round_id)
        board = list(gs.finishers.get(round_id, []))
        board.sort(
            key=lambda f: (
                f.percent is None,
                -(f.percent if f.percent is not None else 0.0),
                f.order,
            )
        )
        return {
            "round_id": round_id,
            "scoreboard": [
                {
                    "participant_id": f.participant_id,
                    "score": f.score,
                    "percent": f.percent,
                    "finished_at": f.finished_at,
                }
                for f in board
            ],
        }

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        if not Path(static_dir).is_dir():
            raise ValueError(f"static directory not found: {static_dir}")
        # registered last: the API routes above keep precedence
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="gui")

    return app


def load_round_file(path: str | Path) -> dict[str, EpisodeConfig]:
    """Round definitions from a JSON file.

    Shape: {"rounds": [{"round_id": str, "config": {partial EpisodeConfig
    fields, nested sections as dicts}}]}. Omitted fields keep defaults.
    """
    from .engine import config_to_payload, config_from_payload

    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    rounds: dict[str, EpisodeConfig] = {}
    for entry in doc["rounds"]:
        rid = entry["round_id"]
        if rid in rounds:
            raise ValueError(f"duplicate round_id {rid!r}")
        base = config_to_payload(EpisodeConfig())
        override = entry.get("config", {})
        for key, val in override.items():
            if isinstance(val, dict):
                base[key] = {**base[key], **val}
            else:
                base[key] = val
        rounds[rid] = config_from_payload(base)
    return rounds
