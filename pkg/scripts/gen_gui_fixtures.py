"""Regenerate the JSON fixtures behind the browser client's contract tests.

Every number in these files comes from the engine itself: legal moves and
dog-leg intervals from the episode engine, percentile-band member subsets
from the scoring module, and ensemble payloads from a real prior-and-update
pair. The TypeScript suite replays the same inputs through its ports and
must reproduce these outputs exactly.

Usage: python3 scripts/gen_gui_fixtures.py
Writes frontend/tests/fixtures/*.json (checked in, so the frontend tests
run without a Python environment).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from gsbench.engine import Decision, EpisodeConfig, commit, legal_moves, new_episode
from gsbench.geomodel import PriorConfig, ensemble_to_payload
from gsbench.kinematics import step_class_interval
from gsbench.scoring import (
    PERCENTILE_LEVELS,
    ScoreDistribution,
    Trajectory,
    evaluate_on_ensemble,
    select_percentile_band,
)

OUT_DIR = Path(__file__).resolve().parents[1] / "frontend" / "tests" / "fixtures"


def _clamp_oracle(y: float, spacing: float, lo: int, hi: int, desired: float) -> float:
    """Nearest legal lattice target for a desired depth; mirrors the editor."""
    k = math.floor((desired - y) / spacing + 0.5)
    k = min(max(k, lo), hi)
    return y + k * spacing


def cone_fixture() -> dict:
    rng = np.random.default_rng(20240817)
    cfg = EpisodeConfig(
        ensemble_size=2,
        max_decisions=10,
        prior=PriorConfig(seed=5),
        truth_seed=99,
    )
    states = []
    state = new_episode(cfg)
    while True:
        moves = legal_moves(state)
        targets = [m.y for m in moves if m.kind == "continue"]
        if not targets:
            break
        x, y = state.position
        lo, hi = step_class_interval(
            state.current_dip_deg, cfg.y_grid_spacing, cfg.stand_length, cfg.dogleg_limit_deg
        )
        clamps = []
        for desired in [
            y + float(rng.uniform(-3.0, 3.0)),
            y + float(rng.uniform(-3.0, 3.0)),
            y - 50.0,
            y + 50.0,
            float(rng.choice(targets)),
        ]:
            clamped = _clamp_oracle(y, cfg.y_grid_spacing, lo, hi, desired)
            assert clamped in targets, "clamp oracle left the engine's move set"
            clamps.append({"desired": desired, "clamped": clamped})
        states.append(
            {
                "y": y,
                "dip_deg": state.current_dip_deg,
                "lo": lo,
                "hi": hi,
                "targets": targets,
                "clamps": clamps,
            }
        )
        # bias the walk downward so later states carry sizable dips
        pick = targets[-1] if rng.uniform() < 0.5 else float(rng.choice(targets))
        state = commit(state, Decision.go(pick))
        if state.finished:
            break

    intervals = []
    for spacing, stand, limit in [(0.25, 30.0, 2.0), (0.5, 30.0, 2.0), (0.1, 20.0, 1.5), (0.25, 30.0, 3.0)]:
        for dip0 in rng.uniform(-25.0, 25.0, size=12):
            lo, hi = step_class_interval(float(dip0), spacing, stand, limit)
            intervals.append(
                {
                    "dip0_deg": float(dip0),
                    "spacing": spacing,
                    "stand_length": stand,
                    "limit_deg": limit,
                    "lo": lo,
                    "hi": hi,
                }
            )

    return {
        "constraints": {
            "stand_length": cfg.stand_length,
            "dogleg_limit_deg": cfg.dogleg_limit_deg,
            "y_grid_spacing": cfg.y_grid_spacing,
        },
        "states": states,
        "intervals": intervals,
    }


def _band_case(scores: list[float]) -> dict:
    dist = ScoreDistribution([(float(s), i) for i, s in enumerate(scores)])
    edges = np.percentile(np.asarray(scores), np.arange(0, 101, 10), method="linear")
    return {
        "scores": [float(s) for s in scores],
        "edges": [float(e) for e in edges],
        "percentiles": {str(lv): float(dist.p(lv)) for lv in PERCENTILE_LEVELS},
        "bands": {str(b): select_percentile_band(dist, b) for b in range(10)},
    }


def band_fixture() -> dict:
    rng = np.random.default_rng(77)
    distinct = rng.normal(100.0, 25.0, size=120)
    assert np.unique(distinct).size == 120
    cases = {
        "distinct_120": _band_case(list(distinct)),
        "ties": _band_case(list(rng.integers(0, 4, size=60) * 7.5)),
        "all_equal": _band_case([3.25] * 24),
        "single": _band_case([42.0]),
        "tiny": _band_case(list(rng.normal(0.0, 1.0, size=7))),
    }
    # the decile between P60 and P70 on 120 distinct scores holds 12 members
    assert len(cases["distinct_120"]["bands"]["6"]) == 12

    cfg = EpisodeConfig(max_decisions=6, prior=PriorConfig(seed=3), truth_seed=404)
    state = new_episode(cfg)
    plan = Trajectory([(0.0, 4.5), (30.0, 5.5), (60.0, 6.5), (90.0, 7.5)])
    dist = evaluate_on_ensemble(plan, state.ensemble, cfg.scoring)
    cases["episode_evaluate"] = _band_case([float(s) for s, _ in dist.entries])
    return {"cases": cases}


def overprint_fixture() -> dict:
    cfg = EpisodeConfig(
        ensemble_size=24,
        max_decisions=6,
        prior=PriorConfig(seed=11),
        truth_seed=2024,
    )
    state = new_episode(cfg)
    prior_payload = ensemble_to_payload(state.ensemble)
    deepest = max(m.y for m in legal_moves(state) if m.kind == "continue")
    state = commit(state, Decision.go(deepest))
    post_payload = ensemble_to_payload(state.ensemble)

    # the update must actually contract b1 over the drilled stand
    xs = np.asarray(prior_payload["x"])
    window = (xs >= 0.0) & (xs <= 30.0)
    b1_prior = np.array([r["boundaries"][0] for r in prior_payload["realizations"]])
    b1_post = np.array([r["boundaries"][0] for r in post_payload["realizations"]])
    assert b1_post[:, window].std(axis=0).mean() < b1_prior[:, window].std(axis=0).mean()

    return {"prior": prior_payload, "posterior": post_payload, "observed_x": [0.0, 30.0]}


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, doc in [
        ("cone_cases.json", cone_fixture()),
        ("band_cases.json", band_fixture()),
        ("overprint_payloads.json", overprint_fixture()),
    ]:
        path = OUT_DIR / name
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
