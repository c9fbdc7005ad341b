import json
import math

import pytest

from bugnav.geom import Point2, dist, point_in_polygon, point_polygon_distance, signed_area
from bugnav.world import (
    DEFAULT_SPEED,
    UNITS,
    Bounds,
    Environment,
    IssueCode,
    ParseError,
    ValidationError,
    builtin_names,
    builtin_scenarios,
    get_builtin,
    load_scenario,
    random_environment,
    render_scenario,
)

SQUARE = [[4, -1], [6, -1], [6, 1], [4, 1]]


def doc(**overrides):
    base = {
        "name": "t",
        "bounds": {"min": [-10, -10], "max": [20, 10]},
        "start": [0, 0],
        "goal": [10, 0],
        "obstacles": [SQUARE],
    }
    base.update(overrides)
    return json.dumps(base)


def test_baseline_document():
    env = load_scenario(
        json.dumps(
            {
                "name": "baseline",
                "bounds": {"min": [-1, -1], "max": [173, 1]},
                "start": [0, 0],
                "goal": [172, 0],
                "speed": 172 / 120,
                "obstacles": [],
            }
        )
    )
    assert dist(env.start, env.goal) == 172.0
    assert env.speed == pytest.approx(1.4333, abs=1e-4)
    assert env.units == UNITS


def test_speed_defaults_to_baseline():
    assert load_scenario(doc()).speed == DEFAULT_SPEED == 172.0 / 120.0


def test_obstacles_normalized_ccw():
    env = load_scenario(doc(obstacles=[list(reversed(SQUARE))]))
    assert signed_area(env.obstacles[0].vertices) > 0


@pytest.mark.parametrize(
    "overrides, code",
    [
        ({"start": [5, 0]}, IssueCode.StartInsideObstacle),
        ({"goal": [5, 0]}, IssueCode.GoalInsideObstacle),
        ({"goal": [50, 0]}, IssueCode.OutOfBounds),
        ({"obstacles": [[[1, 1], [2, 2]]]}, IssueCode.BadPolygon),
        ({"speed": 0}, IssueCode.NonPositiveSpeed),
    ],
    ids=lambda v: v.value if isinstance(v, IssueCode) else None,
)
def test_one_broken_document_per_issue_code(overrides, code):
    with pytest.raises(ValidationError) as info:
        load_scenario(doc(**overrides))
    assert info.value.codes == {code}


def test_issue_codes_are_exhaustive_for_suite():
    # every enumerated code is produced by the suite above and nothing else exists
    assert {c.name for c in IssueCode} == {
        "StartInsideObstacle",
        "GoalInsideObstacle",
        "OutOfBounds",
        "BadPolygon",
        "NonPositiveSpeed",
    }


def test_multiple_issues_collected():
    with pytest.raises(ValidationError) as info:
        load_scenario(doc(start=[5, 0], speed=-1))
    assert info.value.codes == {IssueCode.StartInsideObstacle, IssueCode.NonPositiveSpeed}


def test_obstacle_outside_bounds():
    with pytest.raises(ValidationError) as info:
        load_scenario(doc(obstacles=[[[15, 0], [25, 0], [25, 5]]]))
    assert IssueCode.OutOfBounds in info.value.codes


@pytest.mark.parametrize(
    "text",
    [
        "{not json",
        "[]",
        doc(extra=1),
        json.dumps({"name": "x"}),
        doc(start=[0]),
        doc(start=["a", 0]),
        doc(bounds=[0, 0]),
        doc(obstacles={}),
        doc(name=3),
        doc(speed=True),
    ],
    ids=[
        "malformed",
        "not-object",
        "unknown-key",
        "missing-keys",
        "short-pair",
        "string-coord",
        "bounds-shape",
        "obstacles-type",
        "name-type",
        "bool-speed",
    ],
)
def test_parse_errors(text):
    with pytest.raises(ParseError):
        load_scenario(text)


def _env_close(a: Environment, b: Environment, tol=1e-9):
    assert a.name == b.name and a.units == b.units
    assert a.speed == pytest.approx(b.speed, abs=tol)
    for p, q in ((a.start, b.start), (a.goal, b.goal), (a.bounds.min, b.bounds.min), (a.bounds.max, b.bounds.max)):
        assert dist(p, q) <= tol
    assert len(a.obstacles) == len(b.obstacles)
    for pa, pb in zip(a.obstacles, b.obstacles):
        assert len(pa.vertices) == len(pb.vertices)
        assert all(dist(u, v) <= tol for u, v in zip(pa.vertices, pb.vertices))


@pytest.mark.parametrize("env", builtin_scenarios() + [random_environment(s) for s in range(5)], ids=lambda e: e.name)
def test_round_trip(env):
    _env_close(load_scenario(render_scenario(env)), env)


def test_builtins_present_and_valid():
    names = builtin_names()
    assert {"open-field", "block", "two-blocks", "enclosed-goal"} <= set(names)
    for env in builtin_scenarios():
        # re-validates through the constructor
        Environment(env.name, env.bounds, env.start, env.goal, env.obstacles, env.speed)


def test_open_field_and_block_geometry():
    of = get_builtin("open-field")
    assert dist(of.start, of.goal) == 172.0 and not of.obstacles
    block = get_builtin("block")
    assert tuple(block.start) == (0, 0) and tuple(block.goal) == (10, 0)
    assert len(block.obstacles) == 1
    assert block.obstacles[0].bbox == (4.0, -1.0, 6.0, 1.0)


def test_enclosed_goal_is_sealed():
    env = get_builtin("enclosed-goal")
    # every ray from the goal hits the ring before the bounds
    from bugnav.sense import cast_ray

    for k in range(360):
        r = cast_ray(env, env.goal, math.radians(k), 100.0)
        assert r < 5.0


def test_unknown_builtin():
    with pytest.raises(KeyError):
        get_builtin("nope")


def test_units_fixed():
    with pytest.raises(ValueError):
        Environment("u", Bounds(Point2(0, 0), Point2(1, 1)), Point2(0.1, 0.1), Point2(0.9, 0.9), units="m/s")


@pytest.mark.parametrize("seed", range(40))
def test_random_environment_is_valid(seed):
    env = random_environment(seed)
    assert 1 <= len(env.obstacles) <= 5
    for poly in env.obstacles:
        assert not point_in_polygon(env.start, poly)
        assert point_polygon_distance(env.goal, poly) >= 0.5
    assert random_environment(seed) == env
