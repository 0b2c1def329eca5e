"""Digital pheromone grid with synchronous diffusion and evaporation.

Each tick every cell keeps ``(1 - delta)`` of its intensity and hands
``delta / 8`` to each of its eight neighbours; the bracketed sum (plus any
fresh deposits) is then scaled by the retention factor ``epsilon``.
Shares that would land off-grid or on an obstacle cell are destroyed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Optional

import numpy as np
from numpy.typing import NDArray

from .params import SimParams

Cell = tuple[int, int]

# (dx, dy) of the Moore neighbourhood, fixed order
NEIGHBOURS: tuple[Cell, ...] = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


@dataclass(frozen=True)
class FieldParams:
    """Diffusion rate, retention factor and per-deposit release intensity."""

    diffusion_rate: float = 0.85
    evaporation_factor: float = 0.95
    release_intensity: float = 40_000.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.diffusion_rate <= 1.0:
            raise ValueError(f"diffusion_rate {self.diffusion_rate} not in [0, 1]")
        if not 0.0 <= self.evaporation_factor <= 1.0:
            raise ValueError(f"evaporation_factor {self.evaporation_factor} not in [0, 1]")
        if not self.release_intensity > 0:
            raise ValueError("release_intensity must be positive")

    @classmethod
    def from_sim(cls, params: SimParams) -> FieldParams:
        return cls(params.stig_diffusion, params.evaporation_factor, params.stig_intensity)


class PheromoneField:
    """Dense ``width x height`` intensity grid indexed ``[x, y]``.

    Deposits made between two updates are held in a pending buffer (the
    fresh-deposit term of the update) and are not diffused until the
    following tick.  ``intensity`` and ``total_mass`` include pending
    deposits.
    """

    def __init__(self, width: int, height: int | None = None,
                 obstacles: Optional[NDArray[np.bool_]] = None) -> None:
        height = width if height is None else height
        if width <= 0 or height <= 0:
            raise ValueError("field dimensions must be positive")
        self.width = int(width)
        self.height = int(height)
        self.values = np.zeros((self.width, self.height), dtype=np.float64)
        self.pending = np.zeros_like(self.values)
        self._has_pending = False
        self._next = np.zeros_like(self.values)
        self._pad = np.zeros((self.width + 2, self.height + 2), dtype=np.float64)
        self._inflow = np.zeros_like(self.values)
        if obstacles is not None:
            obstacles = np.asarray(obstacles, dtype=bool)
            if obstacles.shape != self.values.shape:
                raise ValueError("obstacle mask shape does not match field")
            if not obstacles.any():
                obstacles = None
        self.obstacles = obstacles

    @classmethod
    def from_array(cls, values: NDArray[np.float64],
                   obstacles: Optional[NDArray[np.bool_]] = None) -> PheromoneField:
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("expected a 2-D array")
        if (values < 0).any():
            raise ValueError("intensities must be nonnegative")
        field = cls(values.shape[0], values.shape[1], obstacles)
        field.values[...] = values
        return field

    def copy(self) -> PheromoneField:
        other = PheromoneField(self.width, self.height, self.obstacles)
        other.values[...] = self.values
        other.pending[...] = self.pending
        other._has_pending = self._has_pending
        return other

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def intensity(self, x: int, y: int) -> float:
        if not self.in_bounds(x, y):
            raise IndexError(f"cell ({x}, {y}) outside {self.width}x{self.height} field")
        return float(self.values[x, y] + self.pending[x, y])

    def snapshot(self) -> NDArray[np.float64]:
        """Current intensities including pending deposits (a copy)."""
        return self.values + self.pending

    def deposit(self, cell: Cell, amount: float) -> None:
        x, y = cell
        if not self.in_bounds(x, y):
            raise IndexError(f"deposit at ({x}, {y}) outside {self.width}x{self.height} field")
        if amount < 0 or math.isnan(amount):
            raise ValueError(f"deposit amount must be >= 0, got {amount}")
        if amount == 0:
            return
        self.pending[x, y] += amount
        self._has_pending = True

    def step(self, params: FieldParams) -> None:
        """Advance one tick in place using a double buffer."""
        delta = params.diffusion_rate
        eps = params.evaporation_factor
        p = self.values
        pad = self._pad
        pad[1:-1, 1:-1] = p
        inflow = self._inflow
        np.add(pad[:-2, :-2], pad[:-2, 1:-1], out=inflow)
        inflow += pad[:-2, 2:]
        inflow += pad[1:-1, :-2]
        inflow += pad[1:-1, 2:]
        inflow += pad[2:, :-2]
        inflow += pad[2:, 1:-1]
        inflow += pad[2:, 2:]
        inflow *= delta / 8.0
        out = self._next
        np.multiply(p, 1.0 - delta, out=out)
        if self._has_pending:
            out += self.pending
            self.pending.fill(0.0)
            self._has_pending = False
        out += inflow
        out *= eps
        if self.obstacles is not None:
            out[self.obstacles] = 0.0
        self.values, self._next = out, p

    def total_mass(self) -> float:
        return float(self.values.sum() + self.pending.sum())

    def peak_within(self, center: tuple[float, float], radius: float,
                    threshold: float = 1.0) -> Optional[Cell]:
        """Strongest cell whose centre lies within ``radius`` of ``center``.

        Returns None unless that maximum exceeds ``threshold``.  Ties go to
        the lower x, then the lower y.
        """
        found, px, py = self.peaks_within(np.array([center], dtype=np.float64), radius, threshold)
        if not found[0]:
            return None
        return int(px[0]), int(py[0])

    def peaks_within(self, positions: NDArray[np.float64], radius: float,
                     threshold: float = 1.0) -> tuple[NDArray[np.bool_], NDArray[np.int64], NDArray[np.int64]]:
        """Vectorized :meth:`peak_within` over an ``(n, 2)`` array of positions."""
        if not radius > 0:
            raise ValueError("radius must be positive")
        offsets = _disk_offsets(radius)
        positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
        base = np.floor(positions).astype(np.int64)
        cx = base[:, 0:1] + offsets[:, 0]
        cy = base[:, 1:2] + offsets[:, 1]
        dx = cx + 0.5 - positions[:, 0:1]
        dy = cy + 0.5 - positions[:, 1:2]
        valid = (dx * dx + dy * dy <= radius * radius)
        valid &= (cx >= 0) & (cx < self.width) & (cy >= 0) & (cy < self.height)
        xs = np.clip(cx, 0, self.width - 1)
        ys = np.clip(cy, 0, self.height - 1)
        vals = self.values[xs, ys]
        if self._has_pending:
            vals = vals + self.pending[xs, ys]
        vals = np.where(valid, vals, -np.inf)
        # offsets are sorted by (dx, dy) so argmax picks lower x, then lower y
        best = np.argmax(vals, axis=1)
        rows = np.arange(len(positions))
        found = vals[rows, best] > threshold
        return found, cx[rows, best], cy[rows, best]

    def dump(self, out: IO[str] | str | Path, tick: int | None = None) -> None:
        """Write intensities as a CSV matrix, one line per grid row (y)."""
        if isinstance(out, (str, Path)):
            with open(out, "w", encoding="utf-8") as fh:
                self.dump(fh, tick)
            return
        if tick is not None:
            out.write(f"# tick {tick}\n")
        for row in self.snapshot().T:
            out.write(",".join(repr(float(v)) for v in row))
            out.write("\n")


_OFFSET_CACHE: dict[float, NDArray[np.int64]] = {}


def _disk_offsets(radius: float) -> NDArray[np.int64]:
    # every cell offset whose centre can fall within radius of a point in the base cell
    offs = _OFFSET_CACHE.get(radius)
    if offs is None:
        r = int(math.ceil(radius)) + 1
        grid = [(dx, dy) for dx in range(-r, r + 1) for dy in range(-r, r + 1)]
        offs = np.array(sorted(grid), dtype=np.int64)
        _OFFSET_CACHE[radius] = offs
    return offs
