"""Prior geology model: layered 2D earth sampled from a variogram-based Gaussian field.

The subsurface is a 5-layer stack (shale-sand-shale-sand-shale) described by
four boundary depth curves on a shared lateral grid.  Depth increases downward.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SHALE_ABOVE = 1
TOP_SAND = 2
SHALE_MID = 3
BOTTOM_SAND = 4
SHALE_BELOW = 5

SAND_LAYERS = (TOP_SAND, BOTTOM_SAND)


class RejectionBudgetError(RuntimeError):
    """Raised when a prior config keeps producing invalid realizations."""


@dataclass(frozen=True)
class LateralGrid:
    """Uniform, strictly ascending grid of lateral positions (m)."""

    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "x", x)
        if x.ndim != 1 or x.size < 2:
            raise ValueError("grid needs at least two nodes")
        dx = np.diff(x)
        if np.any(dx <= 0):
            raise ValueError("grid positions must be strictly ascending")
        if not np.allclose(dx, dx[0], rtol=1e-9, atol=1e-9):
            raise ValueError("grid spacing must be uniform")

    @property
    def spacing(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def n(self) -> int:
        return int(self.x.size)

    def contains(self, x: float) -> bool:
        return self.x[0] <= x <= self.x[-1]


@dataclass(eq=False)
class Realization:
    """One earth-model sample: four boundary depth curves over a grid.

    boundaries has shape (4, n_nodes); boundary k separates layer k+1 from
    layer k+2 (0-based row index).  Rows are ordered top to bottom.
    """

    boundaries: np.ndarray

    def __post_init__(self):
        self.boundaries = np.asarray(self.boundaries, dtype=float)
        if self.boundaries.ndim != 2 or self.boundaries.shape[0] != 4:
            raise ValueError("boundaries must have shape (4, n_nodes)")

    def copy(self) -> "Realization":
        return Realization(self.boundaries.copy())

    def boundary_at(self, grid: LateralGrid, x: float) -> np.ndarray:
        """Linearly interpolated depths of all four boundaries at x."""
        if not grid.contains(x):
            raise ValueError(f"x={x} outside grid span [{grid.x[0]}, {grid.x[-1]}]")
        return np.array([np.interp(x, grid.x, b) for b in self.boundaries])


@dataclass(eq=False)
class Ensemble:
    """A fixed-size set of realizations sharing one lateral grid."""

    members: list[Realization]
    grid: LateralGrid
    generation: int = 0

    @property
    def size(self) -> int:
        return len(self.members)

    def as_array(self) -> np.ndarray:
        """Stack members into shape (n_members, 4, n_nodes)."""
        return np.stack([m.boundaries for m in self.members])

    @staticmethod
    def from_array(arr: np.ndarray, grid: LateralGrid, generation: int) -> "Ensemble":
        return Ensemble([Realization(a.copy()) for a in arr], grid, generation)


@dataclass(frozen=True)
class PriorConfig:
    """Stationary Gaussian-field prior for the four boundary depths."""

    mean_depths: tuple[float, float, float, float] = (10.0, 13.0, 20.0, 23.0)
    variogram_range: float = 200.0
    variogram_sill: float = 4.0
    variogram_kind: str = "gaussian"
    min_thickness: float = 0.5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mean_depths", tuple(float(m) for m in self.mean_depths))
        if len(self.mean_depths) != 4:
            raise ValueError("mean_depths must have 4 entries")
        if list(self.mean_depths) != sorted(self.mean_depths):
            raise ValueError("mean depths must be ordered ascending (downward)")
        if self.variogram_range <= 0:
            raise ValueError("variogram_range must be > 0")
        if self.variogram_sill <= 0:
            raise ValueError("variogram_sill must be > 0")
        if self.min_thickness <= 0:
            raise ValueError("min_thickness must be > 0")
        if self.variogram_kind not in ("gaussian", "exponential"):
            raise ValueError(f"unknown variogram kind {self.variogram_kind!r}")


def correlation(cfg: PriorConfig, lag: np.ndarray) -> np.ndarray:
    """Two-point correlation at the given lag distance.

    `variogram_range` is the practical range: correlation drops to exp(-3)
    there for both supported kinds.
    """
    lag = np.abs(np.asarray(lag, dtype=float))
    if cfg.variogram_kind == "gaussian":
        return np.exp(-3.0 * (lag / cfg.variogram_range) ** 2)
    return np.exp(-3.0 * lag / cfg.variogram_range)


def _field_factor(cfg: PriorConfig, grid: LateralGrid) -> np.ndarray:
    """Square root of the node covariance matrix (eigen-based, PSD-safe)."""
    lags = grid.x[:, None] - grid.x[None, :]
    cov = cfg.variogram_sill * correlation(cfg, lags)
    w, v = np.linalg.eigh(cov)
    w = np.clip(w, 0.0, None)
    return v * np.sqrt(w)[None, :]


def _satisfies_constraints(boundaries: np.ndarray, min_thickness: float) -> bool:
    b1, b2, b3, b4 = boundaries
    return bool(
        np.all(b2 - b1 >= min_thickness)
        and np.all(b3 >= b2)
        and np.all(b4 - b3 >= min_thickness)
    )


_REJECTION_BUDGET = 1000


def _draw_realization(
    cfg: PriorConfig, grid: LateralGrid, factor: np.ndarray, rng: np.random.Generator
) -> Realization:
    """Draw boundary curves independently, rejecting draws that violate
    ordering or minimum sand thickness."""
    means = np.asarray(cfg.mean_depths)
    for _ in range(_REJECTION_BUDGET):
        z = rng.standard_normal((4, grid.n))
        boundaries = means[:, None] + z @ factor.T
        if _satisfies_constraints(boundaries, cfg.min_thickness):
            return Realization(boundaries)
    raise RejectionBudgetError(
        "prior rejection budget exhausted: sill/min_thickness/mean_depths are "
        "incompatible (ordering almost never satisfied)"
    )


# distinct stream tags so truth stays independent of the ensemble even when
# the caller reuses one integer seed for both
_PRIOR_STREAM = 0
_TRUTH_STREAM = 1


def sample_prior(cfg: PriorConfig, grid: LateralGrid, count: int) -> Ensemble:
    """Sample `count` realizations from the prior. Deterministic given cfg.seed."""
    if count < 2:
        raise ValueError("ensemble needs at least 2 members")
    rng = np.random.default_rng([cfg.seed, _PRIOR_STREAM])
    factor = _field_factor(cfg, grid)
    members = [_draw_realization(cfg, grid, factor, rng) for _ in range(count)]
    return Ensemble(members, grid, generation=0)


def sample_truth(cfg: PriorConfig, grid: LateralGrid, seed: int) -> Realization:
    """One realization from the same prior, on its own seed (independent of
    any ensemble drawn with cfg.seed)."""
    rng = np.random.default_rng([seed, _TRUTH_STREAM])
    factor = _field_factor(cfg, grid)
    return _draw_realization(cfg, grid, factor, rng)


@dataclass(frozen=True)
class LayerInfo:
    layer: int
    sand_roof: float | None = None
    thickness: float | None = None

    @property
    def in_sand(self) -> bool:
        return self.layer in SAND_LAYERS


def layer_at(real: Realization, grid: LateralGrid, x: float, y: float) -> LayerInfo:
    """Layer id (1..5) at (x, y) plus sand roof depth and thickness when in sand.

    A point exactly on a boundary belongs to the deeper layer.
    """
    b1, b2, b3, b4 = real.boundary_at(grid, x)
    if y < b1:
        return LayerInfo(SHALE_ABOVE)
    if y < b2:
        return LayerInfo(TOP_SAND, sand_roof=b1, thickness=b2 - b1)
    if y < b3:
        return LayerInfo(SHALE_MID)
    if y < b4:
        return LayerInfo(BOTTOM_SAND, sand_roof=b3, thickness=b4 - b3)
    return LayerInfo(SHALE_BELOW)


# --- wire serialization (shared with the API server) ---------------------


def ensemble_to_payload(ens: Ensemble) -> dict:
    """JSON-ready realization payload: {"generation", "x", "realizations"}."""
    return {
        "generation": ens.generation,
        "x": [float(v) for v in ens.grid.x],
        "realizations": [
            {"boundaries": [[float(v) for v in row] for row in m.boundaries]}
            for m in ens.members
        ],
    }


def ensemble_from_payload(payload: dict) -> Ensemble:
    grid = LateralGrid(np.asarray(payload["x"], dtype=float))
    members = [
        Realization(np.asarray(r["boundaries"], dtype=float))
        for r in payload["realizations"]
    ]
    return Ensemble(members, grid, generation=int(payload["generation"]))
