import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stigflock.scenario import (
    CENSUS,
    CLUSTER_RADIUS,
    GRID_SIZE,
    MIN_MINE_SPACING,
    Scenario,
    ScenarioError,
    generate,
    load,
    parse,
    save,
    serialize,
)

MINIMAL = """{
  "name": "tiny",
  "grid_size": 10,
  "targets": [[3, 4]],
  "spawns": [[1.5, 1.5, 45.0, 0]]
}"""


def test_minimal_document():
    s = parse(MINIMAL)
    assert s.grid_size == 10
    assert [(x, y) for x, y, _ in s.targets] == [(3, 4)]
    assert s.n_drones == 1
    assert s.counts == {"targets": 1, "clusters": 1, "trees": 0, "buildings": 0, "drones": 1}


def test_target_on_obstacle_is_semantic_error():
    doc = MINIMAL.replace('"targets": [[3, 4]]', '"targets": [[3, 4]], "obstacles": [[3, 4, "tree"]]')
    with pytest.raises(ScenarioError, match=r"\(3, 4\)"):
        parse(doc)


def test_syntax_error_reports_position():
    with pytest.raises(ScenarioError) as info:
        parse('{\n  "name": "x",\n  "grid_size": 10,,\n}')
    assert info.value.line == 3
    assert "line 3" in str(info.value)


@pytest.mark.parametrize("doc, needle", [
    ('{"name": "a", "grid_size": 5, "targets": [[5, 0]]}', "outside"),
    ('{"name": "a", "grid_size": 5, "targets": [[1, 1]], "spawns": [[1.5, 1.5, 400, 0]]}', "heading"),
    ('{"name": "a", "grid_size": 5, "targets": [[1, 1]], "obstacles": [[2, 2, "lake"]]}', "kind"),
    ('{"name": "a", "grid_size": 5, "targets": [[1, 1]], "spawns": [[2.5, 2.5, 0, 0]], '
     '"obstacles": [[2, 2, "tree"]]}', "inside an obstacle"),
    ('{"name": "a", "grid_size": 5, "targets": [[1, 1]], "counts": {"targets": 2}}', "counts.targets"),
    ('{"name": "a", "grid_size": 5}', "targets"),
    ('{"name": "a", "grid_size": 5.5, "targets": []}', "integer"),
    ('{"name": "a", "grid_size": 5, "targets": [], "extra": 1}', "unknown keys"),
])
def test_semantic_errors(doc, needle):
    with pytest.raises(ScenarioError, match=needle):
        parse(doc)


@pytest.mark.parametrize("name", list(CENSUS))
def test_round_trip(name, tmp_path):
    s = generate(name, 5)
    assert parse(serialize(s)) == s
    save(s, tmp_path / "x.scn")
    assert load(tmp_path / "x.scn") == s


def test_load_missing_file(tmp_path):
    with pytest.raises(ScenarioError, match="cannot read"):
        load(tmp_path / "nope.scn")


@pytest.mark.parametrize("name", list(CENSUS))
def test_census(name):
    s = generate(name, 11)
    assert s.counts == CENSUS[name]
    assert s.grid_size == GRID_SIZE[name]


def test_field_census_example():
    s = generate("field", 3)
    assert len(s.targets) == 50 and not s.obstacles and len(s.spawns) == 80


def test_urbanmines_example():
    s = generate("urbanmines", 3)
    assert s.grid_size == 400
    assert s.counts["trees"] == 54 and s.counts["buildings"] == 28


def test_generate_is_deterministic():
    assert generate("field", 9) == generate("field", 9)
    assert generate("field", 9) != generate("field", 10)


def test_unknown_name():
    with pytest.raises(ValueError, match="unknown scenario"):
        generate("moon", 1)


def test_name_aliases():
    assert generate("Urban_Mines", 1) == generate("urbanmines", 1)


def _clusters(s: Scenario):
    groups = {}
    for x, y, c in s.targets:
        groups.setdefault(c, []).append((x, y))
    return groups


@pytest.mark.parametrize("name", ["field", "dumps", "urban"])
@pytest.mark.parametrize("seed", range(5))
def test_cluster_radius(name, seed):
    for cells in _clusters(generate(name, seed)).values():
        cx, cy = np.mean(cells, axis=0)
        assert max(math.dist(p, (cx, cy)) for p in cells) <= CLUSTER_RADIUS


@pytest.mark.parametrize("seed", range(5))
def test_mines_are_isolated(seed):
    mines = [(x, y) for x, y, _ in generate("urbanmines", seed).targets]
    for i, p in enumerate(mines):
        for q in mines[i + 1:]:
            assert math.dist(p, q) >= MIN_MINE_SPACING


@pytest.mark.parametrize("seed", range(3))
def test_urban_targets_flush_against_buildings(seed):
    s = generate("urban", seed)
    mask = s.obstacle_mask()
    for cells in _clusters(s).values():
        touching = sum(
            any(0 <= x + dx < s.grid_size and mask[x + dx, y] for dx in (-1, 1)) for x, y in cells)
        assert touching > 0


def test_field_flocks_in_corners():
    s = generate("field", 2)
    c = s.grid_size
    for x, y, _, flock in s.spawns:
        near_x = x < c / 2 if flock in (0, 2) else x > c / 2
        near_y = y < c / 2 if flock in (0, 1) else y > c / 2
        assert near_x and near_y
        assert min(x, c - x) < 25 and min(y, c - y) < 25


def test_urbanmines_spawns_on_boundary():
    s = generate("urbanmines", 2)
    for x, y, _, _ in s.spawns:
        assert min(x, y, s.grid_size - x, s.grid_size - y) <= 2.0 + 1e-9


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(list(CENSUS)), st.integers(0, 2**31 - 1))
def test_spawns_free_and_in_bounds(name, seed):
    s = generate(name, seed)
    mask = s.obstacle_mask()
    for x, y, h, _ in s.spawns:
        assert 0 <= x < s.grid_size and 0 <= y < s.grid_size
        assert not mask[int(x), int(y)]
        assert 0 <= h < 360
