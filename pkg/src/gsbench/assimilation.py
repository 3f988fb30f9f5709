"""Ensemble Kalman filter update from one stand's look-around observations.

Stochastic EnKF with perturbed observations. The predicted-observation
operator reuses the tool's censoring so ensemble and truth readings stay
comparable near the sensitivity horizon. After the Gaussian algebra, any
(member, node) column violating layer ordering or minimum sand thickness
is projected back onto the constraint set by an isotonic (pool-adjacent)
repair, which shifts offending boundaries apart symmetrically.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .geomodel import Ensemble, LateralGrid, Realization
from .measurement import Observation, ToolConfig, stand_observations

_PERTURB_STREAM = 3


@dataclass(frozen=True)
class EnKFConfig:
    obs_error_std: float = 0.1
    perturb_obs: bool = True
    inflation: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.obs_error_std <= 0:
            raise ValueError("obs_error_std must be > 0")
        if self.inflation < 1.0:
            raise ValueError("inflation must be >= 1")


@dataclass
class AnalysisResult:
    ensemble: Ensemble
    updated: bool
    message: str | None = None


def state_vector(real: Realization) -> np.ndarray:
    """Boundary-major flattening of one realization."""
    return real.boundaries.ravel().copy()


def realization_from_state(vec: np.ndarray, grid: LateralGrid) -> Realization:
    return Realization(np.asarray(vec, dtype=float).reshape(4, grid.n).copy())


def _interp_index(grid: LateralGrid, x: float) -> tuple[int, float]:
    i = int(np.searchsorted(grid.x, x, side="right")) - 1
    i = min(max(i, 0), grid.n - 2)
    w = (x - grid.x[i]) / (grid.x[i + 1] - grid.x[i])
    return i, w


def _predicted_observations(
    arr: np.ndarray, grid: LateralGrid, obs: list[Observation], tool: ToolConfig
) -> np.ndarray:
    """Noise-free censored readings of every member at every obs location.

    Output shape (n_members, 4 * len(obs)), observation-major like the truth
    vector built by _truth_vector.
    """
    cols = []
    for o in obs:
        i, w = _interp_index(grid, o.x)
        depths = arr[:, :, i] * (1.0 - w) + arr[:, :, i + 1] * w
        cols.append(np.clip(depths - o.y, -tool.look_around, tool.look_around))
    return np.concatenate(cols, axis=1)


def _truth_vector(obs: list[Observation]) -> np.ndarray:
    return np.concatenate([o.distances for o in obs])


# ordering and min-thickness constraints become plain monotonicity after
# subtracting these multiples of min_thickness from b1..b4
_SHIFT = np.array([0.0, 1.0, 1.0, 2.0])


def _isotonic4(z: np.ndarray) -> np.ndarray:
    """L2 projection of rows of z (shape (m, 4)) onto non-decreasing order,
    via the max-min interval-mean characterization."""
    means = {}
    for j in range(4):
        acc = z[:, j].astype(float).copy()
        means[(j, j)] = acc.copy()
        for k in range(j + 1, 4):
            acc += z[:, k]
            means[(j, k)] = acc / (k - j + 1)
    out = np.empty_like(z, dtype=float)
    for i in range(4):
        best = None
        for j in range(i + 1):
            inner = means[(j, i)]
            for k in range(i + 1, 4):
                inner = np.minimum(inner, means[(j, k)])
            best = inner if best is None else np.maximum(best, inner)
        out[:, i] = best
    return out


def _clamp_gap(lo: np.ndarray, hi: np.ndarray, gap: float) -> np.ndarray:
    """Smallest hi' >= hi with hi' - lo >= gap as floats. `lo + gap` can
    round below the true sum across an exponent boundary, so escalate by
    ulps until the subtraction itself satisfies the bound."""
    hi = np.maximum(hi, lo + gap)
    short = hi - lo < gap
    while np.any(short):
        hi = np.where(short, np.nextafter(hi, np.inf), hi)
        short = hi - lo < gap
    return hi


def repair(arr: np.ndarray, min_thickness: float) -> np.ndarray:
    """Restore ordering/thickness invariants on violating columns only.

    Valid (member, node) columns pass through bitwise untouched. Violating
    columns get the minimal symmetric adjustment (isotonic projection in
    shifted coordinates), then a forward clamp to absorb float round-off.
    """
    squeeze = arr.ndim == 2
    b = arr[None] if squeeze else arr
    off = (_SHIFT * min_thickness)[None, :, None]
    z = b - off
    bad = np.nonzero(~np.all(np.diff(z, axis=1) >= 0, axis=1))
    if bad[0].size == 0:
        return arr
    out = b.copy()
    zcols = z[bad[0], :, bad[1]]
    cols = _isotonic4(zcols) + _SHIFT * min_thickness
    m = min_thickness
    cols[:, 1] = _clamp_gap(cols[:, 0], cols[:, 1], m)
    cols[:, 2] = np.maximum(cols[:, 2], cols[:, 1])
    cols[:, 3] = _clamp_gap(cols[:, 2], cols[:, 3], m)
    out[bad[0], :, bad[1]] = cols
    return out[0] if squeeze else out


def analysis_step(
    ens: Ensemble,
    truth_obs: list[Observation],
    cfg: EnKFConfig,
    tool: ToolConfig,
    min_thickness: float = 0.5,
) -> AnalysisResult:
    """One stochastic-EnKF analysis. Increments the generation counter even
    when the update is skipped for lack of ensemble spread."""
    if not truth_obs:
        raise ValueError("need at least one observation")
    for o in truth_obs:
        if not ens.grid.contains(o.x):
            raise ValueError(f"observation at x={o.x} outside grid span")

    arr = ens.as_array()
    n = ens.size
    Y = _predicted_observations(arr, ens.grid, truth_obs, tool)
    spread = Y.max(axis=0) - Y.min(axis=0)
    if np.all(spread < 1e-12):
        msg = "no ensemble spread at any observed component; update skipped"
        warnings.warn(msg)
        return AnalysisResult(
            Ensemble.from_array(arr, ens.grid, ens.generation + 1), False, msg
        )

    X = arr.reshape(n, -1)
    xm = X.mean(axis=0)
    Xc = X - xm
    if cfg.inflation > 1.0:
        Xc = Xc * cfg.inflation
        X = xm + Xc
    ym = Y.mean(axis=0)
    Yc = Y - ym

    Cxy = Xc.T @ Yc / (n - 1)
    S = Yc.T @ Yc / (n - 1) + cfg.obs_error_std**2 * np.eye(Y.shape[1])
    K = np.linalg.solve(S, Cxy.T).T

    d = _truth_vector(truth_obs)
    if cfg.perturb_obs:
        rng = np.random.default_rng([cfg.seed, _PERTURB_STREAM, ens.generation])
        D = d + rng.normal(0.0, cfg.obs_error_std, size=Y.shape)
    else:
        D = np.broadcast_to(d, Y.shape)

    Xnew = X + (D - Y) @ K.T
    posterior = repair(Xnew.reshape(arr.shape), min_thickness)
    return AnalysisResult(
        Ensemble.from_array(posterior, ens.grid, ens.generation + 1), True
    )


def update_after_stand(
    ens: Ensemble,
    truth: Realization,
    start: tuple[float, float],
    end: tuple[float, float],
    tool: ToolConfig,
    cfg: EnKFConfig,
    stand_index: int,
    min_thickness: float = 0.5,
) -> tuple[AnalysisResult, list[Observation]]:
    """Observe the truth along the just-committed stand, then assimilate."""
    if abs(tool.noise_std - cfg.obs_error_std) > 1e-12:
        raise ValueError("obs_error_std must equal the tool noise_std used on truth")
    obs = stand_observations(
        truth, ens.grid, start, end, tool, noisy=True, stand_index=stand_index
    )
    return analysis_step(ens, obs, cfg, tool, min_thickness), obs
