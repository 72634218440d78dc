"""Collision-free point-to-grid assignment along a Hilbert curve.

Embedded points are quantized onto a 2^r x 2^r grid, ordered by their
Hilbert index, and pushed forward along the curve (wrapping at the end)
until every item owns a distinct cell. Curve orientation is pinned: the
order-r curve starts at (0, 0), steps first to (0, 1), and ends at
(2^r - 1, 0).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .embed import Layout2D

CURVE_NAME = "hilbert"
COLLISION_POLICY = "forward-wrap"


class GridCapacityError(ValueError):
    pass


def hilbert_d2xy(r: int, d: int) -> tuple[int, int]:
    """Position of step d on the order-r Hilbert curve."""
    if r < 0:
        raise ValueError("level must be >= 0")
    if not 0 <= d < 4**r:
        raise ValueError(f"index {d} out of range for level {r}")
    x = y = 0
    t = d
    s = 1
    n = 1 << r
    while s < n:
        rx = 1 & (t // 2)
        ry = 1 & (t ^ rx)
        if ry == 0:
            if rx == 1:
                x = s - 1 - x
                y = s - 1 - y
            x, y = y, x
        x += s * rx
        y += s * ry
        t //= 4
        s *= 2
    return x, y


def hilbert_xy2d(r: int, x: int, y: int) -> int:
    """Curve index of cell (x, y); exact inverse of hilbert_d2xy."""
    if r < 0:
        raise ValueError("level must be >= 0")
    n = 1 << r
    if not (0 <= x < n and 0 <= y < n):
        raise ValueError(f"cell ({x}, {y}) out of range for level {r}")
    d = 0
    s = n // 2
    while s > 0:
        rx = 1 if (x & s) > 0 else 0
        ry = 1 if (y & s) > 0 else 0
        d += s * s * ((3 * rx) ^ ry)
        if ry == 0:
            if rx == 1:
                x = s - 1 - x
                y = s - 1 - y
            x, y = y, x
        s //= 2
    return d


def choose_level(n: int, occupancy: float = 1.0) -> int:
    """Minimal level r with occupancy * 4^r >= n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < occupancy <= 1.0:
        raise ValueError("occupancy must be in (0, 1]")
    r = 0
    while occupancy * 4**r < n:
        r += 1
    return r


def quantize_points(layout: Layout2D, r: int) -> dict[str, tuple[int, int]]:
    """Min-max scale each axis onto [0, 2^r) and floor to integer cells.

    A zero-range axis maps every item to coordinate 0.
    """
    coords = layout.coordinates
    span = float(2**r) - 1e-9
    cells = np.zeros_like(coords)
    for axis in range(2):
        lo = coords[:, axis].min()
        hi = coords[:, axis].max()
        if hi > lo:
            cells[:, axis] = (coords[:, axis] - lo) / (hi - lo) * span
    quantized = np.floor(cells).astype(np.int64)
    return {
        item_id: (int(gx), int(gy))
        for item_id, (gx, gy) in zip(layout.ids, quantized)
    }


@dataclass(frozen=True)
class GridAssignment:
    level: int
    curve: str
    cells: Mapping[str, tuple[int, int]]

    def __post_init__(self):
        side = 2**self.level
        if 4**self.level < len(self.cells):
            raise ValueError("grid capacity below item count")
        seen = set()
        for item_id, (gx, gy) in self.cells.items():
            if not (0 <= gx < side and 0 <= gy < side):
                raise ValueError(f"cell for {item_id!r} out of range")
            if (gx, gy) in seen:
                raise ValueError(f"duplicate cell {(gx, gy)}")
            seen.add((gx, gy))


def assign_cells(layout: Layout2D, r: int) -> GridAssignment:
    """Give every item its own grid cell by scanning forward on the curve.

    Items are sorted by (target curve index, id) and each takes the first
    free index at or after its target, wrapping to 0 when the tail is
    exhausted. Capacity 4^r must cover the item count.
    """
    n = len(layout.ids)
    total = 4**r
    if total < n:
        raise GridCapacityError(f"4^{r} = {total} cells < {n} items")
    quantized = quantize_points(layout, r)
    targets = sorted(
        (hilbert_xy2d(r, gx, gy), item_id) for item_id, (gx, gy) in quantized.items()
    )
    # next_free[d] points toward the smallest free index >= d (with path
    # compression), so dense collision runs stay near-linear.
    next_free = list(range(total + 1))

    def claim(start: int) -> int:
        d = start
        chain = []
        while next_free[d] != d:
            chain.append(d)
            d = next_free[d]
        for c in chain:
            next_free[c] = d
        return d

    cells: dict[str, tuple[int, int]] = {}
    for target, item_id in targets:
        slot = claim(target)
        if slot == total:
            slot = claim(0)
            if slot == total:
                raise GridCapacityError("grid is full")  # unreachable given capacity check
        next_free[slot] = slot + 1
        cells[item_id] = hilbert_d2xy(r, slot)
    return GridAssignment(level=r, curve=CURVE_NAME, cells=dict(sorted(cells.items())))
