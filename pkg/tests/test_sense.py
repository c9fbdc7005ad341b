import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bugnav.geom import Point2, Polygon, Segment2, dist, point_in_polygon, segment_polygon_hit
from bugnav.nav import Pose
from bugnav.sense import (
    OriginInsideObstacle,
    SensorConfig,
    beam_headings,
    cast_ray,
    goal_visible,
    take_scan,
)
from bugnav.world import Bounds, Environment, get_builtin

SQUARE = Polygon.rectangle(4, -1, 6, 1)


def square_env(dx=0.0, dy=0.0, half=200.0):
    poly = Polygon.rectangle(4 + dx, -1 + dy, 6 + dx, 1 + dy)
    bounds = Bounds(Point2(-half + dx, -half + dy), Point2(half + dx, half + dy))
    return Environment("sq", bounds, Point2(dx, dy), Point2(10 + dx, dy), (poly,))


ENV = square_env()


def test_cast_ray_examples():
    assert cast_ray(ENV, Point2(0, 0), 0.0, 100.0) == pytest.approx(4.0)
    assert cast_ray(ENV, Point2(0, 0), math.pi / 2, 100.0) == 100.0
    assert cast_ray(ENV, Point2(5.5, 2), -math.pi / 2, 100.0) == pytest.approx(1.0)


def test_cast_ray_sees_bounds_walls():
    env = get_builtin("block")
    # block bounds reach y = 8
    assert cast_ray(env, Point2(0, 0), math.pi / 2, 100.0) == pytest.approx(8.0)


def test_cast_ray_from_inside_raises():
    with pytest.raises(OriginInsideObstacle):
        cast_ray(ENV, Point2(5, 0), 0.0, 10.0)


def test_cast_ray_from_boundary_is_allowed():
    assert cast_ray(ENV, Point2(4, 0), 0.0, 10.0) == pytest.approx(0.0, abs=1e-9)


def test_beam_headings_even_spacing():
    cfg = SensorConfig(max_range=10, beam_count=3, fov=math.pi)
    assert beam_headings(0.0, cfg) == pytest.approx([-math.pi / 2, 0.0, math.pi / 2])


def test_scan_open_field_all_max_range():
    env = get_builtin("open-field")
    cfg = SensorConfig()
    for x in (0.0, 50.0, 120.0):
        scan = take_scan(env, Pose(Point2(x, 0.0), 0.3), cfg)
        assert len(scan.ranges) == cfg.beam_count == len(scan.headings)
        assert np.all(scan.ranges == cfg.max_range)
        assert scan.nearest_return() is None


def test_scan_center_beam_near_block():
    env = get_builtin("block")
    scan = take_scan(env, Pose(Point2(3.9, 0.0), 0.0), SensorConfig())
    center = len(scan.ranges) // 2
    assert scan.headings[center] == pytest.approx(0.0)
    assert scan.ranges[center] == pytest.approx(0.1)


def test_scan_ranges_positive_and_clamped():
    env = get_builtin("block")
    scan = take_scan(env, Pose(Point2(2.0, 3.0), 1.0), SensorConfig(max_range=5.0))
    assert np.all(scan.ranges > 0) and np.all(scan.ranges <= 5.0)
    assert len(scan.hit_points()) == int(scan.hits().sum())


def test_sensor_config_validation():
    for bad in (dict(max_range=0), dict(beam_count=2), dict(fov=0.0), dict(fov=7.0)):
        with pytest.raises(ValueError):
            SensorConfig(**bad)


@settings(max_examples=100, deadline=None)
@given(
    st.tuples(st.floats(-20, 20), st.floats(-20, 20)),
    st.floats(-math.pi, math.pi),
    st.floats(0.1, 50),
    st.floats(0.1, 50),
)
def test_cast_ray_monotone_in_max_range(origin, heading, r1, r2):
    p = Point2(*origin)
    if point_in_polygon(p, SQUARE):
        return
    lo, hi = sorted((r1, r2))
    a = cast_ray(ENV, p, heading, lo)
    b = cast_ray(ENV, p, heading, hi)
    assert a <= b + 1e-12
    assert a == pytest.approx(min(b, lo), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(-50, 50),
    st.floats(-50, 50),
    st.tuples(st.floats(-3, 3), st.floats(-3, 3)),
    st.floats(-math.pi, math.pi),
)
def test_scan_translation_invariant(dx, dy, pos, heading):
    p = Point2(*pos)
    if point_in_polygon(p, SQUARE):
        return
    cfg = SensorConfig(max_range=8.0, beam_count=61)
    a = take_scan(ENV, Pose(p, heading), cfg)
    b = take_scan(square_env(dx, dy), Pose(Point2(p.x + dx, p.y + dy), heading), cfg)
    assert np.allclose(a.ranges, b.ranges, atol=1e-7)


def test_goal_visible_examples():
    goal = Point2(10, 0)
    assert goal_visible(ENV, Point2(6, 1), goal, 0.0)
    assert not goal_visible(ENV, Point2(4, 1), goal, 0.0)
    assert goal_visible(ENV, goal, goal, 0.0)


def test_goal_visible_with_clearance():
    goal = Point2(10, 0)
    # the segment from just above the corner keeps only ~0.03 ft
    p = Point2(6.0, 1.0 + 0.03)
    assert goal_visible(ENV, p, goal, 0.0)
    assert not goal_visible(ENV, p, goal, 0.05)
    assert goal_visible(ENV, Point2(6.0, 1.5), goal, 0.05)


def test_goal_visible_sensor_limit():
    far_goal = Point2(100, 0)
    env = Environment("far", Bounds(Point2(-10, -10), Point2(110, 10)), Point2(0, 0), far_goal, (SQUARE,))
    p = Point2(0, 0)
    assert not goal_visible(env, p, far_goal, 0.0)
    # a 3 ft horizon stops short of the block
    assert goal_visible(env, p, far_goal, 0.0, limit=3.0)


@settings(max_examples=200, deadline=None)
@given(st.tuples(st.floats(-3, 13), st.floats(-4, 4)), st.tuples(st.floats(-3, 13), st.floats(-4, 4)))
def test_goal_visible_zero_clearance_matches_hit(pa, pb):
    p, g = Point2(*pa), Point2(*pb)
    if point_in_polygon(p, SQUARE) or point_in_polygon(g, SQUARE) or dist(p, g) < 1e-6:
        return
    seg = Segment2(p, g)
    hit = segment_polygon_hit(seg, SQUARE)
    visible = goal_visible(ENV, p, g, 0.0)
    if hit is None:
        assert visible
    if not visible:
        assert hit is not None
    if hit is not None and visible:
        # only a graze is allowed: no sample of the segment is interior
        assert not any(_in_square_interior(seg.at(k / 200)) for k in range(201))


def _in_square_interior(q):
    return 4 + 1e-9 < q.x < 6 - 1e-9 and -1 + 1e-9 < q.y < 1 - 1e-9
