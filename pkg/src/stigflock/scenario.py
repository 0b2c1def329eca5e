"""Benchmark worlds: file format, validation and procedural generation.

A scenario file is a UTF-8 JSON document::

    {
      "name": "field",
      "grid_size": 200,
      "counts": {"targets": 50, "clusters": 5, "trees": 0, "buildings": 0, "drones": 80},
      "targets": [[x, y, cluster], ...],
      "obstacles": [[x, y, "tree" | "building"], ...],
      "spawns": [[x, y, heading, flock], ...]
    }

Cells are integer ``[x, y]`` pairs in ``[0, grid_size)``; spawn positions
and headings are decimals (metres and degrees).  ``counts`` is optional on
input and, when present, must agree with the lists.  A target may be given
as ``[x, y]``, in which case it forms its own cluster.  Building count is
the number of 4-connected components of building cells.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy import ndimage

SCENARIO_NAMES = ("field", "dumps", "urban", "urbanmines")
OBSTACLE_KINDS = ("tree", "building")

# benchmark census per scenario
CENSUS: dict[str, dict[str, int]] = {
    "field": {"targets": 50, "clusters": 5, "trees": 0, "buildings": 0, "drones": 80},
    "dumps": {"targets": 30, "clusters": 3, "trees": 100, "buildings": 0, "drones": 80},
    "urban": {"targets": 110, "clusters": 2, "trees": 0, "buildings": 7, "drones": 40},
    "urbanmines": {"targets": 40, "clusters": 40, "trees": 54, "buildings": 28, "drones": 25},
}
GRID_SIZE = {"field": 200, "dumps": 200, "urban": 200, "urbanmines": 400}

CLUSTER_RADIUS = 8
MIN_CLUSTER_SPACING = 40
MIN_MINE_SPACING = 10
FLOCK_RADIUS = 10
CORNER_OFFSET = 12


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario document."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Scenario:
    name: str
    grid_size: int
    targets: tuple[tuple[int, int, int], ...]
    obstacles: tuple[tuple[int, int, str], ...] = ()
    spawns: tuple[tuple[float, float, float, int], ...] = ()
    counts: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", census(self))
        validate(self)

    @property
    def n_drones(self) -> int:
        return len(self.spawns)

    def obstacle_mask(self) -> np.ndarray:
        mask = np.zeros((self.grid_size, self.grid_size), dtype=bool)
        for x, y, _ in self.obstacles:
            mask[x, y] = True
        return mask


def census(s: Scenario) -> dict[str, int]:
    return {
        "targets": len(s.targets),
        "clusters": len({c for _, _, c in s.targets}),
        "trees": sum(1 for *_, k in s.obstacles if k == "tree"),
        "buildings": count_buildings(s.obstacles, s.grid_size),
        "drones": len(s.spawns),
    }


def count_buildings(obstacles, grid_size: int) -> int:
    mask = np.zeros((grid_size, grid_size), dtype=bool)
    for x, y, kind in obstacles:
        if kind == "building" and 0 <= x < grid_size and 0 <= y < grid_size:
            mask[x, y] = True
    if not mask.any():
        return 0
    return int(ndimage.label(mask)[1])


def validate(s: Scenario) -> None:
    c = s.grid_size
    if c <= 0:
        raise ScenarioError(f"grid_size must be positive, got {c}")
    seen_obstacles: set[tuple[int, int]] = set()
    for x, y, kind in s.obstacles:
        if kind not in OBSTACLE_KINDS:
            raise ScenarioError(f"obstacle ({x}, {y}) has unknown kind {kind!r}")
        if not (0 <= x < c and 0 <= y < c):
            raise ScenarioError(f"obstacle ({x}, {y}) outside the {c}x{c} grid")
        if (x, y) in seen_obstacles:
            raise ScenarioError(f"obstacle ({x}, {y}) listed twice")
        seen_obstacles.add((x, y))
    seen_targets: set[tuple[int, int]] = set()
    for x, y, _ in s.targets:
        if not (0 <= x < c and 0 <= y < c):
            raise ScenarioError(f"target ({x}, {y}) outside the {c}x{c} grid")
        if (x, y) in seen_obstacles:
            raise ScenarioError(f"target ({x}, {y}) lies on an obstacle cell")
        if (x, y) in seen_targets:
            raise ScenarioError(f"target ({x}, {y}) listed twice")
        seen_targets.add((x, y))
    for x, y, heading, _ in s.spawns:
        if not (0 <= x < c and 0 <= y < c):
            raise ScenarioError(f"spawn ({x}, {y}) outside the {c}x{c} grid")
        if (math.floor(x), math.floor(y)) in seen_obstacles:
            raise ScenarioError(f"spawn ({x}, {y}) lies inside an obstacle")
        if not 0 <= heading < 360:
            raise ScenarioError(f"spawn ({x}, {y}) heading {heading} not in [0, 360)")


def serialize(s: Scenario) -> str:
    def rows(items) -> str:
        if not items:
            return "[]"
        return "[\n" + ",\n".join("    " + json.dumps(list(it)) for it in items) + "\n  ]"

    return (
        "{\n"
        f'  "name": {json.dumps(s.name)},\n'
        f'  "grid_size": {s.grid_size},\n'
        f'  "counts": {json.dumps(s.counts)},\n'
        f'  "targets": {rows(s.targets)},\n'
        f'  "obstacles": {rows(s.obstacles)},\n'
        f'  "spawns": {rows(s.spawns)}\n'
        "}\n"
    )


def parse(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ScenarioError("top level must be an object")
    for key in ("name", "grid_size", "targets"):
        if key not in doc:
            raise ScenarioError(f"missing required key {key!r}")
    unknown = set(doc) - {"name", "grid_size", "counts", "targets", "obstacles", "spawns"}
    if unknown:
        raise ScenarioError(f"unknown keys: {', '.join(sorted(unknown))}")
    grid = _int(doc["grid_size"], "grid_size")
    targets = []
    for i, t in enumerate(_list(doc["targets"], "targets")):
        if not isinstance(t, list) or len(t) not in (2, 3):
            raise ScenarioError(f"targets[{i}] must be [x, y] or [x, y, cluster]")
        x, y = _int(t[0], f"targets[{i}].x"), _int(t[1], f"targets[{i}].y")
        cluster = _int(t[2], f"targets[{i}].cluster") if len(t) == 3 else -(i + 1)
        targets.append((x, y, cluster))
    obstacles = []
    for i, o in enumerate(_list(doc.get("obstacles", []), "obstacles")):
        if not isinstance(o, list) or len(o) != 3 or not isinstance(o[2], str):
            raise ScenarioError(f"obstacles[{i}] must be [x, y, kind]")
        obstacles.append((_int(o[0], f"obstacles[{i}].x"), _int(o[1], f"obstacles[{i}].y"), o[2]))
    spawns = []
    for i, p in enumerate(_list(doc.get("spawns", []), "spawns")):
        if not isinstance(p, list) or len(p) != 4:
            raise ScenarioError(f"spawns[{i}] must be [x, y, heading, flock]")
        spawns.append((_num(p[0], f"spawns[{i}].x"), _num(p[1], f"spawns[{i}].y"),
                       _num(p[2], f"spawns[{i}].heading"), _int(p[3], f"spawns[{i}].flock")))
    s = Scenario(str(doc["name"]), grid, tuple(targets), tuple(obstacles), tuple(spawns))
    declared = doc.get("counts")
    if declared is not None:
        if not isinstance(declared, dict):
            raise ScenarioError("counts must be an object")
        for key, value in declared.items():
            if key not in s.counts:
                raise ScenarioError(f"unknown count {key!r}")
            if value != s.counts[key]:
                raise ScenarioError(f"counts.{key} = {value} but the document has {s.counts[key]}")
    return s


def load(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc.strerror}") from None
    return parse(text)


def save(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(serialize(s), encoding="utf-8")


def _list(v: Any, what: str) -> list:
    if not isinstance(v, list):
        raise ScenarioError(f"{what} must be a list")
    return v


def _int(v: Any, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{what} must be an integer, got {v!r}")
    return v


def _num(v: Any, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{what} must be a number, got {v!r}")
    return float(v)


# --- procedural generation -------------------------------------------------

def generate(name: str, seed: int) -> Scenario:
    key = name.strip().lower().replace("_", "").replace(" ", "").replace("-", "")
    if key not in SCENARIO_NAMES:
        raise ValueError(f"unknown scenario {name!r}; expected one of {', '.join(SCENARIO_NAMES)}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), SCENARIO_NAMES.index(key)]))
    builder = {"field": _field, "dumps": _dumps, "urban": _urban, "urbanmines": _urban_mines}[key]
    return builder(rng)


def _corner_centres(c: int) -> list[tuple[float, float]]:
    lo, hi = CORNER_OFFSET, c - CORNER_OFFSET
    return [(lo, lo), (hi, lo), (lo, hi), (hi, hi)]


def _corner_flocks(rng: np.random.Generator, c: int, n_drones: int) -> list[tuple[float, float, float, int]]:
    spawns = []
    per = n_drones // 4
    for flock, (cx, cy) in enumerate(_corner_centres(c)):
        count = per + (1 if flock < n_drones - 4 * per else 0)
        for _ in range(count):
            r = FLOCK_RADIUS * math.sqrt(rng.random())
            a = 2 * math.pi * rng.random()
            heading = float(rng.uniform(0.0, 360.0))
            spawns.append((cx + r * math.cos(a), cy + r * math.sin(a), heading, flock))
    return spawns


def _disk_cells(radius: int) -> list[tuple[int, int]]:
    return [(dx, dy) for dx in range(-radius, radius + 1) for dy in range(-radius, radius + 1)
            if dx * dx + dy * dy <= radius * radius]


def _clusters(rng: np.random.Generator, c: int, n_clusters: int, per_cluster: int) -> list[tuple[int, int, int]]:
    """Targets scattered in disks of CLUSTER_RADIUS around well-separated centroids."""
    margin = CLUSTER_RADIUS + 4
    keep_clear = _corner_centres(c)
    centres: list[tuple[int, int]] = []
    while len(centres) < n_clusters:
        p = (int(rng.integers(margin, c - margin)), int(rng.integers(margin, c - margin)))
        if any(math.dist(p, q) < MIN_CLUSTER_SPACING for q in centres):
            continue
        if any(math.dist(p, q) < FLOCK_RADIUS + CLUSTER_RADIUS + 20 for q in keep_clear):
            continue
        centres.append(p)
    disk = _disk_cells(CLUSTER_RADIUS)
    targets = []
    for k, (cx, cy) in enumerate(centres):
        while True:
            picks = sorted(rng.choice(len(disk), size=per_cluster, replace=False))
            cells = [(cx + disk[i][0], cy + disk[i][1]) for i in picks]
            # the bound holds against the empirical centroid, not just the drawn centre
            mx, my = np.mean(cells, axis=0)
            if max(math.dist(p, (mx, my)) for p in cells) <= CLUSTER_RADIUS:
                break
        targets.extend((x, y, k) for x, y in cells)
    return targets


def _scatter_trees(rng: np.random.Generator, c: int, n: int, forbidden: set[tuple[int, int]],
                   spawn_clear: list[tuple[float, float]], clear_radius: float) -> list[tuple[int, int, str]]:
    trees: list[tuple[int, int, str]] = []
    taken = set(forbidden)
    while len(trees) < n:
        p = (int(rng.integers(0, c)), int(rng.integers(0, c)))
        if p in taken:
            continue
        if any(math.dist((p[0] + 0.5, p[1] + 0.5), q) < clear_radius for q in spawn_clear):
            continue
        taken.add(p)
        trees.append((p[0], p[1], "tree"))
    return trees


def _rect_cells(x0: int, y0: int, w: int, h: int) -> list[tuple[int, int]]:
    return [(x, y) for x in range(x0, x0 + w) for y in range(y0, y0 + h)]


def _rect_clear(rect, others, gap: int) -> bool:
    x0, y0, w, h = rect
    for ox, oy, ow, oh in others:
        if x0 - gap < ox + ow and ox < x0 + w + gap and y0 - gap < oy + oh and oy < y0 + h + gap:
            return False
    return True


def _field(rng: np.random.Generator) -> Scenario:
    c = GRID_SIZE["field"]
    targets = _clusters(rng, c, 5, 10)
    spawns = _corner_flocks(rng, c, 80)
    return Scenario("field", c, tuple(targets), (), tuple(spawns))


def _dumps(rng: np.random.Generator) -> Scenario:
    c = GRID_SIZE["dumps"]
    targets = _clusters(rng, c, 3, 10)
    spawns = _corner_flocks(rng, c, 80)
    trees = _scatter_trees(rng, c, 100, {(x, y) for x, y, _ in targets},
                           _corner_centres(c), FLOCK_RADIUS + 2)
    return Scenario("dumps", c, tuple(targets), tuple(trees), tuple(spawns))


STRIP_DEPTH = 4
STRIP_LENGTH = 14


def _urban(rng: np.random.Generator) -> Scenario:
    """Seven block buildings; two target strips flush against opposite faces of two of them."""
    c = GRID_SIZE["urban"]
    per_cluster = CENSUS["urban"]["targets"] // 2
    spawn_zone = [(cx - FLOCK_RADIUS - 4, cy - FLOCK_RADIUS - 4, 2 * FLOCK_RADIUS + 8, 2 * FLOCK_RADIUS + 8)
                  for cx, cy in _corner_centres(c)]
    spawn_zone = [(int(x), int(y), w, h) for x, y, w, h in spawn_zone]
    rects: list[tuple[int, int, int, int]] = []
    strips: list[tuple[int, int, int, int]] = []
    targets: list[tuple[int, int, int]] = []
    while len(rects) < 7:
        w = int(rng.integers(10, 31))
        h = int(rng.integers(STRIP_LENGTH if len(rects) < 2 else 10, 31))
        x0 = int(rng.integers(STRIP_DEPTH + 2, c - w - STRIP_DEPTH - 2))
        y0 = int(rng.integers(2, c - h - 2))
        rect = (x0, y0, w, h)
        strip = None
        if len(rects) < 2:
            sy = y0 + (h - STRIP_LENGTH) // 2
            sx = x0 - STRIP_DEPTH if len(rects) == 0 else x0 + w
            strip = (sx, sy, STRIP_DEPTH, STRIP_LENGTH)
        if not _rect_clear(rect, rects + spawn_zone, 4) or not _rect_clear(rect, strips, 3):
            continue
        if strip is not None and not _rect_clear(strip, rects + spawn_zone, 3):
            continue
        rects.append(rect)
        if strip is not None:
            strips.append(strip)
            cells = _rect_cells(*strip)
            picks = rng.choice(len(cells), size=per_cluster, replace=False)
            targets.extend((cells[i][0], cells[i][1], len(strips) - 1) for i in sorted(picks))
    obstacles = [(x, y, "building") for r in rects for x, y in _rect_cells(*r)]
    spawns = _corner_flocks(rng, c, CENSUS["urban"]["drones"])
    return Scenario("urban", c, tuple(targets), tuple(obstacles), tuple(spawns))


MINEFIELD_MARGIN = 120


def _urban_mines(rng: np.random.Generator) -> Scenario:
    """Isolated mines in a central field, trees and small buildings around, drones on the border."""
    c = GRID_SIZE["urbanmines"]
    census_ = CENSUS["urbanmines"]
    lo, hi = MINEFIELD_MARGIN, c - MINEFIELD_MARGIN
    mines: list[tuple[int, int]] = []
    while len(mines) < census_["targets"]:
        p = (int(rng.integers(lo, hi)), int(rng.integers(lo, hi)))
        if all(math.dist(p, q) >= MIN_MINE_SPACING for q in mines):
            mines.append(p)
    targets = [(x, y, k) for k, (x, y) in enumerate(mines)]

    n = census_["drones"]
    spawns = []
    perimeter = 4 * (c - 4)
    for i in range(n):
        s = (i + 0.5) * perimeter / n
        side, t = divmod(s, c - 4)
        t += 2.0
        x, y = [(t, 2.0), (c - 2.0, t), (c - t, c - 2.0), (2.0, c - t)][int(side)]
        heading = math.degrees(math.atan2(c / 2 - y, c / 2 - x)) % 360.0
        spawns.append((x, y, heading, int(side)))

    mine_zone = [(x - 2, y - 2, 5, 5) for x, y in mines]
    border = 8
    rects: list[tuple[int, int, int, int]] = []
    while len(rects) < census_["buildings"]:
        w, h = int(rng.integers(4, 13)), int(rng.integers(4, 13))
        rect = (int(rng.integers(border, c - w - border)), int(rng.integers(border, c - h - border)), w, h)
        if _rect_clear(rect, rects, 3) and _rect_clear(rect, mine_zone, 1):
            rects.append(rect)
    building_cells = {p for r in rects for p in _rect_cells(*r)}
    forbidden = building_cells | set(mines)
    # keep trees off building margins so building components stay separate from nothing but themselves
    for x, y, w, h in rects:
        forbidden |= set(_rect_cells(x - 1, y - 1, w + 2, h + 2))
    trees = _scatter_trees(rng, c, census_["trees"], forbidden,
                           [(x, y) for x, y, _, _ in spawns], 4.0)
    obstacles = [(x, y, "building") for x, y in sorted(building_cells)] + trees
    return Scenario("urbanmines", c, tuple(targets), tuple(obstacles), tuple(spawns))
