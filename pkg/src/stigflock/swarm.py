"""Fleet-wide vectorized tick, numerically equivalent to :mod:`stigflock.behavior`."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .behavior import AVOID_OFFSETS, RAY_STEP, Drone, Role
from .environment import Confirmation, GridEnvironment, SensorModel, sense_many
from .field import PheromoneField
from .params import SimParams

_AVOID = np.array(AVOID_OFFSETS)


@dataclass
class TickRecord:
    """Per-drone diagnostics of one tick."""

    roles: NDArray[np.int8]
    positive: NDArray[np.bool_]
    cells: NDArray[np.int64]
    separate: NDArray[np.float64]
    align: NDArray[np.float64]
    cohere: NDArray[np.float64]


class Swarm:
    """Struct-of-arrays fleet state.  Drone ids are the row indices."""

    def __init__(self, x, y, heading, flock=None) -> None:
        self.x = np.asarray(x, dtype=np.float64).copy()
        self.y = np.asarray(y, dtype=np.float64).copy()
        self.heading = np.asarray(heading, dtype=np.float64) % 360.0
        n = len(self.x)
        self.flock = np.zeros(n, dtype=np.int64) if flock is None else np.asarray(flock, dtype=np.int64)
        self.roles = np.full(n, -1, dtype=np.int8)

    @classmethod
    def from_drones(cls, drones: Sequence[Drone]) -> Swarm:
        drones = sorted(drones, key=lambda d: d.id)
        if [d.id for d in drones] != list(range(len(drones))):
            raise ValueError("drone ids must be 0..n-1")
        return cls([d.x for d in drones], [d.y for d in drones],
                   [d.heading for d in drones], [d.flock for d in drones])

    def __len__(self) -> int:
        return len(self.x)

    def drones(self) -> list[Drone]:
        return [Drone(i, float(self.x[i]), float(self.y[i]), float(self.heading[i]), int(self.flock[i]),
                      None if self.roles[i] < 0 else Role(int(self.roles[i])))
                for i in range(len(self))]

    def cells(self) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
        return np.floor(self.x).astype(np.int64), np.floor(self.y).astype(np.int64)

    def step(self, env: GridEnvironment, field: PheromoneField, params: SimParams,
             error_probability: NDArray[np.float64], sense_u: NDArray[np.float64],
             turn_u: NDArray[np.float64]) -> TickRecord:
        """Decide every drone against the current snapshot, then move them all."""
        n = len(self)
        ix, iy = self.cells()
        positive = sense_many(env, ix, iy, error_probability, sense_u)
        h = self.heading
        new_h = h.copy()
        roles = np.full(n, int(Role.EXPLORER), dtype=np.int8)
        zeros = np.zeros(n)
        sep, ali, coh = zeros.copy(), zeros.copy(), zeros.copy()

        avoid = _rays_blocked(env, self.x, self.y, h[:, None], params.obstacle_vision)[:, 0]
        if avoid.any():
            idx = np.flatnonzero(avoid)
            cand = (h[idx, None] + _AVOID[None, :]) % 360.0
            blocked = _rays_blocked(env, self.x[idx], self.y[idx], cand, params.obstacle_vision)
            free = ~blocked
            first = np.argmax(free, axis=1)
            chosen = cand[np.arange(len(idx)), first]
            chosen = np.where(free.any(axis=1), chosen, (h[idx] + 180.0) % 360.0)
            new_h[idx] = chosen
            roles[idx] = Role.OBSTACLE_AVOIDER
        undecided = ~avoid

        algo = params.algorithm
        if algo.uses_pheromone and undecided.any():
            idx = np.flatnonzero(undecided)
            pos = np.stack([self.x[idx], self.y[idx]], axis=1)
            found, px, py = field.peaks_within(pos, params.olfaction, params.peak_threshold)
            idx, px, py = idx[found], px[found], py[found]
            if len(idx):
                on_peak = (px == ix[idx]) & (py == iy[idx])
                b = _bearing(px + 0.5 - self.x[idx], py + 0.5 - self.y[idx])
                new_h[idx] = np.where(on_peak, h[idx], b)
                roles[idx] = Role.TRACKER
                undecided[idx] = False

        if algo.uses_flocking and undecided.any():
            self._flock(params, undecided, new_h, roles, sep, ali, coh)

        explore = roles == Role.EXPLORER
        new_h[explore] = (h[explore] + (turn_u[explore] - 0.5) * params.wiggle_var) % 360.0
        new_h[new_h == 360.0] = 0.0

        rad = np.deg2rad(new_h)
        nx = self.x + params.drone_vel * np.cos(rad)
        ny = self.y + params.drone_vel * np.sin(rad)
        stay = _points_blocked(env, nx, ny)
        self.x = np.where(stay, self.x, nx)
        self.y = np.where(stay, self.y, ny)
        self.heading = new_h
        self.roles = roles
        return TickRecord(roles, positive, np.stack([ix, iy], axis=1), sep, ali, coh)

    def _flock(self, params: SimParams, undecided, new_h, roles, sep, ali, coh) -> None:
        x, y, h = self.x, self.y, self.heading
        dx = x[None, :] - x[:, None]
        dy = y[None, :] - y[:, None]
        dist = np.hypot(dx, dy)
        mates = dist <= params.flock_vision
        np.fill_diagonal(mates, False)
        mates &= undecided[:, None]
        count = mates.sum(axis=1)
        active = count > 0
        if not active.any():
            return
        idx = np.flatnonzero(active)
        m = mates[idx]
        d = np.where(m, dist[idx], np.inf)
        near = np.argmin(d, axis=1)
        rows = np.arange(len(idx))
        dmin = d[rows, near]

        hh = h[idx].copy()
        separating = dmin < params.minimum_separation
        s_idx = np.flatnonzero(separating & (dmin > 0.0))
        if len(s_idx):
            away = _bearing(-dx[idx[s_idx], near[s_idx]], -dy[idx[s_idx], near[s_idx]])
            hh[s_idx], sep[idx[s_idx]] = _turn_toward(hh[s_idx], away, params.max_separate_turn)

        a_idx = np.flatnonzero(~separating)
        if len(a_idx):
            ma = m[a_idx]
            rad = np.deg2rad(h)
            sc = np.where(ma, np.cos(rad)[None, :], 0.0).sum(axis=1)
            ss = np.where(ma, np.sin(rad)[None, :], 0.0).sum(axis=1)
            ok = np.hypot(sc, ss) > 1e-9
            t, dlt = _turn_toward(hh[a_idx], _bearing(sc, ss), params.max_align_turn)
            hh[a_idx] = np.where(ok, t, hh[a_idx])
            ali[idx[a_idx]] = np.where(ok, dlt, 0.0)

            cnt = count[idx[a_idx]]
            bx = np.where(ma, x[None, :], 0.0).sum(axis=1) / cnt
            by = np.where(ma, y[None, :], 0.0).sum(axis=1) / cnt
            me = idx[a_idx]
            ok = np.hypot(bx - x[me], by - y[me]) > 1e-9
            t, dlt = _turn_toward(hh[a_idx], _bearing(bx - x[me], by - y[me]), params.max_cohere_turn)
            hh[a_idx] = np.where(ok, t, hh[a_idx])
            coh[me] = np.where(ok, dlt, 0.0)

        new_h[idx] = hh
        roles[idx] = Role.FLOCKMATE


def apply_effects(swarm_record: TickRecord, env: GridEnvironment, field: PheromoneField,
                  params: SimParams, model: SensorModel) -> list[tuple[int, tuple[int, int], Confirmation]]:
    """Deposits and detections of one tick, in drone-id order."""
    events = []
    for i in np.flatnonzero(swarm_record.positive):
        cell = (int(swarm_record.cells[i, 0]), int(swarm_record.cells[i, 1]))
        if env.confirmed_mask[cell]:
            continue
        if params.algorithm.uses_pheromone:
            field.deposit(cell, params.stig_intensity)
        events.append((int(i), cell, env.record_detection(model, int(i), cell)))
    return events


def _bearing(dx, dy):
    b = np.degrees(np.arctan2(dy, dx)) % 360.0
    return np.where(b == 360.0, 0.0, b)


def _turn_toward(current, target, max_turn):
    d = (target - current) % 360.0
    d = np.where(d > 180.0, d - 360.0, d)
    d = np.clip(d, -max_turn, max_turn)
    out = (current + d) % 360.0
    return np.where(out == 360.0, 0.0, out), d


def _points_blocked(env: GridEnvironment, px, py):
    cx = np.floor(px).astype(np.int64)
    cy = np.floor(py).astype(np.int64)
    inside = (cx >= 0) & (cx < env.width) & (cy >= 0) & (cy < env.height)
    hit = env.obstacle_mask[np.clip(cx, 0, env.width - 1), np.clip(cy, 0, env.height - 1)]
    return ~inside | hit


def _rays_blocked(env: GridEnvironment, x, y, headings, length: float):
    """``headings`` is ``(n, k)``; returns ``(n, k)`` blocked flags."""
    steps = max(1, int(math.ceil(length / RAY_STEP - 1e-9)))
    dist = np.minimum(np.arange(1, steps + 1) * RAY_STEP, length)
    rad = np.deg2rad(headings)
    c, s = np.cos(rad), np.sin(rad)
    px = x[:, None, None] + dist[None, None, :] * c[:, :, None]
    py = y[:, None, None] + dist[None, None, :] * s[:, :, None]
    return _points_blocked(env, px, py).any(axis=2)
