"""HTTP client presenting a remote session as an episode handle.

RemoteEpisodeHandle mirrors LocalEpisodeHandle's five-method protocol, so
the decision agent runs unchanged against a live server: same views in,
same commits out. Client-side state (position, dip, budget) is tracked
from the constraint block served at session open plus the committed moves.
"""

from __future__ import annotations

import numpy as np

from .geomodel import Ensemble, ensemble_from_payload
from .kinematics import dip_deg
from .scoring import ScoringConfig
from .dss_agent import StateView


class ServerError(RuntimeError):
    def __init__(self, status_code: int, detail: str):
        super().__init__(f"server returned {status_code}: {detail}")
        self.status_code = status_code
        self.detail = detail


def _check(resp):
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise ServerError(resp.status_code, str(detail))
    return resp.json()


class RemoteEpisodeHandle:
    """One live session against an api_server instance.

    `http` is any httpx-compatible client (httpx.Client(base_url=...) or a
    test client); the handle never builds its own transport.
    """

    def __init__(self, http, round_id: str, participant_id: str):
        self.http = http
        self.round_id = round_id
        self.participant_id = participant_id
        doc = _check(
            http.post(f"/rounds/{round_id}/sessions", json={"participant_id": participant_id})
        )
        self.session_id: str = doc["session_id"]
        self.constraints: dict = doc["constraints"]
        self.abscissas: list[float] = doc["abscissas"]
        self._scoring = ScoringConfig(**self.constraints["scoring"])
        self._ensemble: Ensemble = ensemble_from_payload(doc["realizations"])
        x0, y0 = self.constraints["start"]
        self._pts: list[tuple[float, float]] = [(float(x0), float(y0))]
        self._dip = float(self.constraints["initial_dip_deg"])
        self._decisions_taken = 0
        self._final: dict | None = None

    # agent-facing protocol -------------------------------------------------

    def scoring_config(self) -> ScoringConfig:
        return self._scoring

    def finished(self) -> bool:
        return self._final is not None

    def state_view(self) -> StateView:
        if self.finished():
            raise RuntimeError("session is finished")
        x, y = self._pts[-1]
        return StateView(
            ensemble=self._ensemble,
            x=x,
            y=y,
            dip_deg=self._dip,
            decisions_remaining=self.constraints["max_decisions"] - self._decisions_taken,
            stand_length=self.constraints["stand_length"],
            dogleg_limit_deg=self.constraints["dogleg_limit_deg"],
        )

    def _absorb_final(self, doc: dict) -> None:
        self._final = {
            "score": doc["score"],
            "percent_of_optimal": doc["percent"],
            "stopped_early": doc["stopped_early"],
            "rank": doc["rank"],
            "finishers": doc["finishers"],
        }

    def commit_continue(self, y: float) -> None:
        doc = _check(
            self.http.post(
                f"/sessions/{self.session_id}/commit",
                json={"action": "continue", "y": float(y)},
            )
        )
        x0, y0 = self._pts[-1]
        self._dip = dip_deg(float(y) - y0, self.constraints["stand_length"])
        self._pts.append((x0 + self.constraints["stand_length"], float(y)))
        self._decisions_taken += 1
        if doc["finished"]:
            self._absorb_final(doc)
        else:
            self._ensemble = ensemble_from_payload(doc["realizations"])

    def commit_stop(self) -> None:
        doc = _check(
            self.http.post(f"/sessions/{self.session_id}/commit", json={"action": "stop"})
        )
        self._absorb_final(doc)

    def trajectory(self) -> np.ndarray:
        return np.array(self._pts, dtype=float)

    def final(self) -> dict:
        if self._final is None:
            raise RuntimeError("session is not finished")
        return dict(self._final)

    # extras ----------------------------------------------------------------

    def evaluate(self, points) -> list[tuple[float, int]]:
        """What-if scores of a full trajectory on the current ensemble."""
        doc = _check(
            self.http.post(
                f"/sessions/{self.session_id}/evaluate",
                json={"trajectory": [{"x": float(x), "y": float(y)} for x, y in points]},
            )
        )
        return [(e["score"], e["realization"]) for e in doc["scores"]]

    @property
    def generation(self) -> int:
        return self._ensemble.generation
