"""Synthetic look-around tool at the drill bit.

The tool reads signed vertical distances to the four layer boundaries,
censored to its sensitivity horizon. Truth observations carry Gaussian
noise (applied before censoring); ensemble members are forward-modeled
noise-free with the same operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geomodel import LateralGrid, Realization

_NOISE_STREAM = 2


@dataclass(frozen=True)
class ToolConfig:
    look_around: float = 4.8
    noise_std: float = 0.1
    sub_locations_per_stand: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.look_around <= 0:
            raise ValueError("look_around must be > 0")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.sub_locations_per_stand < 1:
            raise ValueError("sub_locations_per_stand must be >= 1")


@dataclass(frozen=True)
class Observation:
    """Censored boundary distances (positive means boundary lies below tool)."""

    x: float
    y: float
    distances: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "distances", np.asarray(self.distances, dtype=float)
        )


def observe(
    real: Realization,
    grid: LateralGrid,
    x: float,
    y: float,
    cfg: ToolConfig,
    noisy: bool = False,
    call_index: int = 0,
) -> Observation:
    """Forward-model one tool reading at (x, y).

    Noise is drawn from a stream keyed by (cfg.seed, call_index), so repeated
    calls with the same index reproduce the same reading.
    """
    d = real.boundary_at(grid, x) - y
    if noisy and cfg.noise_std > 0:
        rng = np.random.default_rng([cfg.seed, _NOISE_STREAM, call_index])
        d = d + rng.normal(0.0, cfg.noise_std, size=4)
    d = np.clip(d, -cfg.look_around, cfg.look_around)
    return Observation(x=float(x), y=float(y), distances=d)


def stand_observations(
    real: Realization,
    grid: LateralGrid,
    start: tuple[float, float],
    end: tuple[float, float],
    cfg: ToolConfig,
    noisy: bool = False,
    stand_index: int = 0,
) -> list[Observation]:
    """Observations at s equally spaced sub-locations along one drilled stand.

    Sub-locations exclude the segment start and include its end; y follows
    the straight segment. stand_index keys the noise stream so each stand of
    an episode gets fresh, reproducible noise.
    """
    (x0, y0), (x1, y1) = start, end
    if x1 <= x0:
        raise ValueError("segment must advance laterally (x1 > x0)")
    s = cfg.sub_locations_per_stand
    out = []
    for i in range(1, s + 1):
        x = x0 + i * (x1 - x0) / s
        y = y0 + (x - x0) / (x1 - x0) * (y1 - y0)
        out.append(
            observe(real, grid, x, y, cfg, noisy, call_index=stand_index * s + i - 1)
        )
    return out
