"""Shared move geometry: dip angles, the dog-leg cone, and the y-lattice.

Both the episode engine (move legality) and the decision agents (reachable
sets) call these, so there is exactly one definition of what a legal step is.
"""

from __future__ import annotations

import math

import numpy as np

# slack in lattice-step units when intersecting the dog-leg cone with the
# lattice; keeps exact-boundary steps stable under float round-off
_CLASS_EPS = 1e-9


def dip_deg(dy: float, stand_length: float) -> float:
    """Dip of a stand with vertical change dy, degrees from horizontal
    (positive downward)."""
    return math.degrees(math.atan(dy / stand_length))


def step_class_interval(
    dip0_deg: float, spacing: float, stand_length: float, limit_deg: float
) -> tuple[int, int]:
    """Integer interval [lo, hi] of legal lattice steps for one stand.

    A step of k lattice units changes y by k * spacing; it is legal when the
    resulting dip differs from dip0_deg by at most limit_deg.
    """
    lo_ang = math.radians(dip0_deg - limit_deg)
    hi_ang = math.radians(dip0_deg + limit_deg)
    # dips stay well inside ±90 degrees for any sane config; clamp anyway
    lo_ang = max(lo_ang, -math.pi / 2 + 1e-6)
    hi_ang = min(hi_ang, math.pi / 2 - 1e-6)
    lo = math.ceil(math.tan(lo_ang) * stand_length / spacing - _CLASS_EPS)
    hi = math.floor(math.tan(hi_ang) * stand_length / spacing + _CLASS_EPS)
    return lo, hi


def class_dip_deg(k: int, spacing: float, stand_length: float) -> float:
    return dip_deg(k * spacing, stand_length)


def is_on_lattice(y: float, spacing: float, tol: float = 1e-6) -> bool:
    r = y / spacing
    return abs(r - round(r)) <= tol


def snap_down(v: float, spacing: float) -> float:
    return math.floor(v / spacing + _CLASS_EPS) * spacing


def snap_up(v: float, spacing: float) -> float:
    return math.ceil(v / spacing - _CLASS_EPS) * spacing


def build_lattice(y_min: float, y_max: float, spacing: float) -> np.ndarray:
    """Ascending absolute lattice (multiples of spacing) covering [y_min, y_max]."""
    lo = snap_down(y_min, spacing)
    hi = snap_up(y_max, spacing)
    n = int(round((hi - lo) / spacing)) + 1
    return lo + spacing * np.arange(n)


def lattice_index(lat: np.ndarray, y: float) -> int:
    spacing = lat[1] - lat[0]
    i = int(round((y - lat[0]) / spacing))
    if not (0 <= i < lat.size) or abs(lat[i] - y) > 1e-6:
        raise ValueError(f"y={y} is not a node of the lattice")
    return i
