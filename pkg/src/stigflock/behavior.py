"""Per-drone decision logic: sensing, the prioritized role cascade and motion.

Headings are in degrees, counter-clockwise from the +x axis.  Positions
are continuous metres with one cell per metre, so the drone at ``(x, y)``
occupies cell ``(floor(x), floor(y))``.

This module is the scalar reference; :mod:`stigflock.swarm` runs the same
rules vectorized over the whole fleet.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .environment import Confirmation, GridEnvironment, SensorModel, sense_with_draw
from .field import PheromoneField
from .params import SimParams

# sample spacing along a vision ray, metres
RAY_STEP = 0.25

# avoidance candidates: straight ahead, then alternating left/right in 10 degree steps
AVOID_OFFSETS: tuple[float, ...] = (0.0,) + tuple(
    s * k for k in range(10, 180, 10) for s in (1.0, -1.0)) + (180.0,)


class Role(enum.IntEnum):
    OBSTACLE_AVOIDER = 0
    TRACKER = 1
    FLOCKMATE = 2
    EXPLORER = 3


@dataclass(frozen=True)
class Drone:
    id: int
    x: float
    y: float
    heading: float
    flock: int = 0
    role: Optional[Role] = None

    @property
    def cell(self) -> tuple[int, int]:
        return int(math.floor(self.x)), int(math.floor(self.y))


@dataclass(frozen=True)
class FlockTurn:
    """Heading after flocking plus the signed change of each sub-behaviour."""

    heading: float
    separate: float = 0.0
    align: float = 0.0
    cohere: float = 0.0


@dataclass(frozen=True)
class TickOutcome:
    drone: Drone
    role: Role
    positive: bool
    cell: tuple[int, int]
    turn: Optional[FlockTurn] = None


def normalize(heading: float) -> float:
    h = heading % 360.0
    return 0.0 if h == 360.0 else h


def heading_delta(target: float, current: float) -> float:
    """Signed smallest rotation from ``current`` to ``target``, in (-180, 180]."""
    d = (target - current) % 360.0
    return d - 360.0 if d > 180.0 else d


def turn_toward(current: float, target: float, max_turn: float) -> tuple[float, float]:
    d = heading_delta(target, current)
    d = min(max(d, -max_turn), max_turn)
    return normalize(current + d), d


def bearing(dx: float, dy: float) -> float:
    return normalize(float(np.degrees(np.arctan2(dy, dx))))


def ray_blocked(env: GridEnvironment, x: float, y: float, heading: float, length: float) -> bool:
    """Whether the straight segment of ``length`` ahead meets a wall or obstacle."""
    rad = np.deg2rad(heading)
    c, s = float(np.cos(rad)), float(np.sin(rad))
    n = max(1, int(math.ceil(length / RAY_STEP - 1e-9)))
    for k in range(1, n + 1):
        d = min(k * RAY_STEP, length)
        if env.blocked(int(math.floor(x + d * c)), int(math.floor(y + d * s))):
            return True
    return False


def avoid_obstacle(drone: Drone, env: GridEnvironment, params: SimParams) -> float:
    for offset in AVOID_OFFSETS:
        h = normalize(drone.heading + offset)
        if not ray_blocked(env, drone.x, drone.y, h, params.obstacle_vision):
            return h
    return normalize(drone.heading + 180.0)


def track(drone: Drone, field: PheromoneField, params: SimParams) -> Optional[float]:
    """Heading toward the pheromone peak in olfaction range, or None to decline."""
    peak = field.peak_within((drone.x, drone.y), params.olfaction, params.peak_threshold)
    if peak is None:
        return None
    if peak == drone.cell:
        return drone.heading
    return bearing(peak[0] + 0.5 - drone.x, peak[1] + 0.5 - drone.y)


def flock(drone: Drone, others: Sequence[Drone], params: SimParams) -> Optional[FlockTurn]:
    """Boids turn against the flockmates in view, or None when nobody is in view."""
    mates = []
    for o in others:
        if o.id == drone.id:
            continue
        d = float(np.hypot(o.x - drone.x, o.y - drone.y))
        if d <= params.flock_vision:
            mates.append((d, o))
    if not mates:
        return None
    nearest_d, nearest = min(mates, key=lambda m: (m[0], m[1].id))
    h = drone.heading
    if nearest_d < params.minimum_separation:
        if nearest_d == 0.0:
            return FlockTurn(h)
        away = bearing(drone.x - nearest.x, drone.y - nearest.y)
        h, d_sep = turn_toward(h, away, params.max_separate_turn)
        return FlockTurn(h, separate=d_sep)
    rads = np.deg2rad(np.array([o.heading for _, o in mates]))
    sc, ss = float(np.cos(rads).sum()), float(np.sin(rads).sum())
    d_align = 0.0
    if math.hypot(sc, ss) > 1e-9:
        h, d_align = turn_toward(h, bearing(sc, ss), params.max_align_turn)
    bx = float(np.mean([o.x for _, o in mates]))
    by = float(np.mean([o.y for _, o in mates]))
    d_cohere = 0.0
    if math.hypot(bx - drone.x, by - drone.y) > 1e-9:
        h, d_cohere = turn_toward(h, bearing(bx - drone.x, by - drone.y), params.max_cohere_turn)
    return FlockTurn(h, align=d_align, cohere=d_cohere)


def wiggle(drone: Drone, params: SimParams, u: float) -> float:
    """Random turn uniform on [-wiggle_var/2, wiggle_var/2) from a uniform draw ``u``."""
    return normalize(drone.heading + (u - 0.5) * params.wiggle_var)


def move(drone: Drone, heading: float, env: GridEnvironment, params: SimParams) -> tuple[float, float]:
    rad = np.deg2rad(heading)
    nx = drone.x + params.drone_vel * float(np.cos(rad))
    ny = drone.y + params.drone_vel * float(np.sin(rad))
    if env.blocked(int(math.floor(nx)), int(math.floor(ny))):
        return drone.x, drone.y
    return nx, ny


def select_role(drone: Drone, env: GridEnvironment, field: PheromoneField,
                others: Sequence[Drone], params: SimParams,
                turn_u: float) -> tuple[Role, float, Optional[FlockTurn]]:
    """Run the cascade; exactly one role fires."""
    if ray_blocked(env, drone.x, drone.y, drone.heading, params.obstacle_vision):
        return Role.OBSTACLE_AVOIDER, avoid_obstacle(drone, env, params), None
    algo = params.algorithm
    if algo.uses_pheromone:
        h = track(drone, field, params)
        if h is not None:
            return Role.TRACKER, h, None
    if algo.uses_flocking:
        turn = flock(drone, others, params)
        if turn is not None:
            return Role.FLOCKMATE, turn.heading, turn
    return Role.EXPLORER, wiggle(drone, params, turn_u), None


def tick(drone: Drone, env: GridEnvironment, field: PheromoneField, others: Sequence[Drone],
         params: SimParams, error_probability: float, sense_u: float, turn_u: float) -> TickOutcome:
    """Decide one drone's tick against the frozen previous-tick world.

    ``sense_u`` and ``turn_u`` are this drone's pre-assigned uniform draws.
    Deposits and detections are not applied here; see :func:`apply_effects`.
    """
    cell = drone.cell
    reading = sense_with_draw(env, error_probability, cell, sense_u)
    role, heading, turn = select_role(drone, env, field, others, params, turn_u)
    x, y = move(drone, heading, env, params)
    moved = replace(drone, x=x, y=y, heading=heading, role=role)
    return TickOutcome(moved, role, reading.positive, cell, turn)


def apply_effects(outcomes: Sequence[TickOutcome], env: GridEnvironment, field: PheromoneField,
                  params: SimParams, model: SensorModel) -> list[tuple[int, tuple[int, int], Confirmation]]:
    """Apply deposits and detections in drone-id order; returns the confirmation events."""
    events = []
    for out in sorted(outcomes, key=lambda o: o.drone.id):
        if not out.positive or not env.pheromone_active(out.cell):
            continue
        if params.algorithm.uses_pheromone:
            field.deposit(out.cell, params.stig_intensity)
        events.append((out.drone.id, out.cell, env.record_detection(model, out.drone.id, out.cell)))
    return events
