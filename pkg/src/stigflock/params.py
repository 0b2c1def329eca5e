"""Simulation parameters with their published defaults and admissible ranges."""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Any


class Algorithm(str, enum.Enum):
    """Coordination variant compared in the benchmark."""

    RANDOM_FLY = "r"
    STIGMERGY = "s"
    STIGMERGY_FLOCKING = "sf"

    @property
    def label(self) -> str:
        return {"r": "R", "s": "S", "sf": "S+F"}[self.value]

    @property
    def uses_pheromone(self) -> bool:
        return self is not Algorithm.RANDOM_FLY

    @property
    def uses_flocking(self) -> bool:
        return self is Algorithm.STIGMERGY_FLOCKING

    @classmethod
    def parse(cls, text: str | Algorithm) -> Algorithm:
        if isinstance(text, Algorithm):
            return text
        key = text.strip().lower().replace("+", "")
        aliases = {"random": "r", "randomfly": "r", "stigmergy": "s", "stigmergyflocking": "sf"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown algorithm {text!r}; expected one of r, s, sf") from None


@dataclass(frozen=True)
class Range:
    """Numeric interval with per-end openness."""

    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def __contains__(self, value: float) -> bool:
        if self.lo_open and not value > self.lo:
            return False
        if not self.lo_open and not value >= self.lo:
            return False
        if self.hi_open and not value < self.hi:
            return False
        if not self.hi_open and not value <= self.hi:
            return False
        return True

    def __str__(self) -> str:
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


# tunable name -> (field name, admissible range in user-facing units)
TUNABLES: dict[str, tuple[str, Range]] = {
    "DroneVel": ("drone_vel", Range(0, 15, True, True)),
    "WiggleVar": ("wiggle_var", Range(0, 180, True, True)),
    "ObstacleVision": ("obstacle_vision", Range(0, 5, True, True)),
    "FlockVision": ("flock_vision", Range(0, 50)),
    "MinimumSeparation": ("minimum_separation", Range(0, 5)),
    "MaxSeparateTurn": ("max_separate_turn", Range(0, 180, True, True)),
    "MaxAlignTurn": ("max_align_turn", Range(0, 180, True, True)),
    "MaxCohereTurn": ("max_cohere_turn", Range(0, 180, True, True)),
    "Olfaction": ("olfaction", Range(0, math.inf, True, True)),
    "StigIntensity": ("stig_intensity", Range(0, math.inf, True, True)),
    "StigDiffusion": ("stig_diffusion", Range(0, 1)),
    "StigEvaporation": ("stig_evaporation", Range(0, 1)),
    "SensingError": ("sensing_error", Range(0, 100, True, True)),
    "Redundancy": ("redundancy", Range(0, math.inf, True, True)),
}

_LOOKUP = {name.lower(): name for name in TUNABLES}


@dataclass(frozen=True)
class SimParams:
    """All behavioral and structural knobs of a run.

    Units follow the simulator's normalization: one cell is 1 m and one
    tick is 1 s, so ``drone_vel`` is cells per tick.  ``stig_evaporation``
    is the fraction of pheromone lost per tick; the retention factor used
    by the field update is ``1 - stig_evaporation``.  ``sensing_error`` is
    a (low, high) interval of per-drone error probabilities (fractions,
    not percent); a degenerate interval fixes the error.
    """

    drone_vel: float = 1.0
    wiggle_var: float = 150.0
    obstacle_vision: float = 2.0
    flock_vision: float = 7.0
    minimum_separation: float = 3.0
    max_separate_turn: float = 30.0
    max_align_turn: float = 20.0
    max_cohere_turn: float = 5.0
    olfaction: float = 1.0
    stig_intensity: float = 40_000.0
    stig_diffusion: float = 0.85
    stig_evaporation: float = 0.05
    sensing_error: tuple[float, float] = (0.001, 0.01)
    redundancy: int = 1
    algorithm: Algorithm = Algorithm.STIGMERGY_FLOCKING
    peak_threshold: float = 1.0
    tick_cap: int = 50_000

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithm", Algorithm.parse(self.algorithm))
        object.__setattr__(self, "sensing_error", tuple(float(v) for v in self.sensing_error))
        if self.drone_vel <= 0:
            raise ValueError("drone_vel must be positive")
        if not 0.0 <= self.stig_diffusion <= 1.0:
            raise ValueError("stig_diffusion must lie in [0, 1]")
        if not 0.0 <= self.stig_evaporation <= 1.0:
            raise ValueError("stig_evaporation must lie in [0, 1]")
        if self.stig_intensity <= 0:
            raise ValueError("stig_intensity must be positive")
        lo, hi = self.sensing_error
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError(f"sensing_error interval {self.sensing_error} must satisfy 0 <= lo <= hi <= 1")
        if int(self.redundancy) != self.redundancy or self.redundancy < 1:
            raise ValueError("redundancy must be a positive integer")
        if self.tick_cap <= 0:
            raise ValueError("tick_cap must be positive")
        for name in ("obstacle_vision", "flock_vision", "minimum_separation", "olfaction"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def evaporation_factor(self) -> float:
        """Per-tick retention multiplier applied by the field update."""
        return 1.0 - self.stig_evaporation

    def replace(self, **changes: Any) -> SimParams:
        return dataclasses.replace(self, **changes)

    def with_named(self, name: str, value: Any) -> SimParams:
        """Return a copy with one parameter set by its tunable name.

        ``value`` is in user-facing units: ``SensingError`` is in percent and
        accepts either one number or a ``lo:hi`` interval.
        """
        canonical = _LOOKUP.get(name.strip().lower())
        if canonical is None:
            known = ", ".join(TUNABLES)
            raise KeyError(f"unknown parameter {name!r}; known parameters: {known}")
        field, rng = TUNABLES[canonical]
        if canonical == "SensingError":
            text = str(value)
            parts = [float(p) for p in text.split(":")] if ":" in text else [float(value)] * 2
            for p in parts:
                if p not in rng:
                    raise ValueError(f"{canonical}={p:g} outside admissible range {rng}")
            lo, hi = parts
            if lo > hi:
                raise ValueError(f"{canonical} interval {text!r} is reversed")
            return self.replace(sensing_error=(lo / 100.0, hi / 100.0))
        number = float(value)
        if number not in rng:
            raise ValueError(f"{canonical}={number:g} outside admissible range {rng}")
        if canonical == "Redundancy":
            if number != int(number):
                raise ValueError("Redundancy must be an integer")
            return self.replace(redundancy=int(number))
        return self.replace(**{field: number})

    def named_value(self, name: str) -> Any:
        canonical = _LOOKUP.get(name.strip().lower())
        if canonical is None:
            raise KeyError(f"unknown parameter {name!r}")
        field, _ = TUNABLES[canonical]
        value = getattr(self, field)
        if canonical == "SensingError":
            return tuple(100.0 * v for v in value)
        return value


def canonical_name(name: str) -> str:
    """Map a case-insensitive tunable name to its canonical spelling."""
    canonical = _LOOKUP.get(name.strip().lower())
    if canonical is None:
        raise KeyError(f"unknown parameter {name!r}")
    return canonical
