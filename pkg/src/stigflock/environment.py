"""Static world, imperfect target sensing and redundancy confirmation."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numpy.typing import NDArray

Cell = tuple[int, int]


class Confirmation(enum.Enum):
    IGNORED = "ignored"
    COUNTED = "counted"
    NEWLY_CONFIRMED = "newly_confirmed"


@dataclass(frozen=True)
class SensorModel:
    """Error probability of one drone's detector and the fleet-wide redundancy."""

    error_probability: float = 0.0
    redundancy: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.error_probability <= 1.0:
            raise ValueError(f"error_probability {self.error_probability} not in [0, 1]")
        if int(self.redundancy) != self.redundancy or self.redundancy < 1:
            raise ValueError("redundancy must be a positive integer")


@dataclass(frozen=True)
class SensorReading:
    positive: bool
    cell: Cell


class GridEnvironment:
    """Obstacles, targets and the detection bookkeeping of one trial.

    ``confirmers`` maps each target cell that has received at least one
    genuine positive to the set of distinct drone ids that reported it.
    A target enters ``confirmed`` once that set reaches the redundancy.
    """

    def __init__(self, width: int, height: int, obstacles: Iterable[Cell],
                 targets: Iterable[Cell]) -> None:
        self.width = int(width)
        self.height = int(height)
        self.obstacle_mask = np.zeros((self.width, self.height), dtype=bool)
        self.target_mask = np.zeros_like(self.obstacle_mask)
        for x, y in obstacles:
            self._check(x, y)
            self.obstacle_mask[x, y] = True
        self.targets: list[Cell] = []
        for x, y in targets:
            self._check(x, y)
            if self.obstacle_mask[x, y]:
                raise ValueError(f"target ({x}, {y}) lies on an obstacle")
            if not self.target_mask[x, y]:
                self.targets.append((int(x), int(y)))
            self.target_mask[x, y] = True
        self.near_mask = _dilate(self.target_mask)
        self.confirmed_mask = np.zeros_like(self.obstacle_mask)
        self.confirmers: dict[Cell, set[int]] = {}
        self.confirmed: list[Cell] = []

    @classmethod
    def from_scenario(cls, scenario) -> GridEnvironment:
        return cls(scenario.grid_size, scenario.grid_size,
                   [(x, y) for x, y, _ in scenario.obstacles],
                   [(x, y) for x, y, _ in scenario.targets])

    def _check(self, x: int, y: int) -> None:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise IndexError(f"cell ({x}, {y}) outside {self.width}x{self.height} grid")

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def is_target(self, cell: Cell) -> bool:
        return bool(self.target_mask[cell])

    def is_near_target(self, cell: Cell) -> bool:
        return bool(self.near_mask[cell])

    def blocked(self, x: int, y: int) -> bool:
        """True for off-grid cells and obstacles."""
        return not self.in_bounds(x, y) or bool(self.obstacle_mask[x, y])

    def pheromone_active(self, cell: Cell) -> bool:
        self._check(*cell)
        return not self.confirmed_mask[cell]

    def found_fraction(self) -> float:
        if not self.targets:
            raise ValueError("environment has no targets")
        return len(self.confirmed) / len(self.targets)

    def record_detection(self, model: SensorModel, drone_id: int, cell: Cell) -> Confirmation:
        """Book a positive reading; only real targets accrue confirmations."""
        cell = (int(cell[0]), int(cell[1]))
        if not self.target_mask[cell] or self.confirmed_mask[cell]:
            return Confirmation.IGNORED
        seen = self.confirmers.setdefault(cell, set())
        if drone_id in seen:
            return Confirmation.IGNORED
        seen.add(drone_id)
        if len(seen) >= model.redundancy:
            self.confirmed_mask[cell] = True
            self.confirmed.append(cell)
            return Confirmation.NEWLY_CONFIRMED
        return Confirmation.COUNTED


def sense_with_draw(env: GridEnvironment, error_probability: float, cell: Cell,
                    u: float) -> SensorReading:
    """Sensor reading given a uniform draw ``u`` in [0, 1).

    Near a target (the target itself or a Moore neighbour) the true
    reading flips when ``u < error_probability``; elsewhere it is exact.
    """
    env._check(*cell)
    truth = env.is_target(cell)
    if env.is_near_target(cell) and u < error_probability:
        return SensorReading(not truth, cell)
    return SensorReading(truth, cell)


def sense(env: GridEnvironment, model: SensorModel, drone_id: int, cell: Cell,
          rng: np.random.Generator) -> SensorReading:
    """Read the detector of ``drone_id`` over ``cell``; consumes one draw."""
    return sense_with_draw(env, model.error_probability, cell, float(rng.random()))


def sense_many(env: GridEnvironment, xs: NDArray[np.int64], ys: NDArray[np.int64],
               error_probability: NDArray[np.float64], u: NDArray[np.float64]) -> NDArray[np.bool_]:
    """Vectorized :func:`sense_with_draw`; returns the positive flags."""
    truth = env.target_mask[xs, ys]
    flip = env.near_mask[xs, ys] & (u < error_probability)
    return truth ^ flip


def _dilate(mask: NDArray[np.bool_]) -> NDArray[np.bool_]:
    out = mask.copy()
    w, h = mask.shape
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            src = mask[max(0, -dx):w - max(0, dx), max(0, -dy):h - max(0, dy)]
            out[max(0, dx):w - max(0, -dx), max(0, dy):h - max(0, -dy)] |= src
    return out
