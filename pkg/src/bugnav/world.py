"""Environment model, scenario files and the builtin benchmark scenarios."""

from __future__ import annotations

import enum
import json
import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .geom import (
    EPS_GEO,
    GeometryError,
    Point2,
    Polygon,
    convex_hull,
    dist,
    point_in_polygon,
    point_polygon_distance,
    segments_intersect,
)

DEFAULT_SPEED = 172.0 / 120.0  # ft/s: 172 ft covered in 120 s
UNITS = "feet/seconds"


class ScenarioError(ValueError):
    pass


class ParseError(ScenarioError):
    """The scenario document is not well-formed."""


class IssueCode(enum.Enum):
    StartInsideObstacle = "StartInsideObstacle"
    GoalInsideObstacle = "GoalInsideObstacle"
    OutOfBounds = "OutOfBounds"
    BadPolygon = "BadPolygon"
    NonPositiveSpeed = "NonPositiveSpeed"


@dataclass(frozen=True)
class ScenarioIssue:
    code: IssueCode
    detail: str


class ValidationError(ScenarioError):
    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(f"{i.code.value}: {i.detail}" for i in self.issues))

    @property
    def codes(self) -> set:
        return {i.code for i in self.issues}


@dataclass(frozen=True)
class Bounds:
    min: Point2
    max: Point2

    def contains(self, p: Point2) -> bool:
        return (
            self.min.x - EPS_GEO <= p.x <= self.max.x + EPS_GEO
            and self.min.y - EPS_GEO <= p.y <= self.max.y + EPS_GEO
        )

    @property
    def width(self) -> float:
        return self.max.x - self.min.x

    @property
    def height(self) -> float:
        return self.max.y - self.min.y

    def corners(self) -> list:
        x0, y0, x1, y1 = self.min.x, self.min.y, self.max.x, self.max.y
        return [Point2(x0, y0), Point2(x1, y0), Point2(x1, y1), Point2(x0, y1)]


def check_environment(bounds, start, goal, obstacles, speed) -> list:
    """Return every ScenarioIssue found; an empty list means valid."""
    issues = []
    if not (bounds.max.x > bounds.min.x and bounds.max.y > bounds.min.y):
        issues.append(ScenarioIssue(IssueCode.OutOfBounds, "bounds rectangle is empty"))
    if not (isinstance(speed, (int, float)) and speed > 0 and math.isfinite(speed)):
        issues.append(ScenarioIssue(IssueCode.NonPositiveSpeed, f"speed must be > 0, got {speed}"))
    for label, p in (("start", start), ("goal", goal)):
        if not bounds.contains(p):
            issues.append(ScenarioIssue(IssueCode.OutOfBounds, f"{label} {tuple(p)} outside bounds"))
    for k, poly in enumerate(obstacles):
        if any(not bounds.contains(v) for v in poly.vertices):
            issues.append(ScenarioIssue(IssueCode.OutOfBounds, f"obstacle {k} leaves the bounds"))
        if point_in_polygon(start, poly):
            issues.append(ScenarioIssue(IssueCode.StartInsideObstacle, f"start inside obstacle {k}"))
        if point_in_polygon(goal, poly):
            issues.append(ScenarioIssue(IssueCode.GoalInsideObstacle, f"goal inside obstacle {k}"))
    return issues


@dataclass(frozen=True)
class Environment:
    name: str
    bounds: Bounds
    start: Point2
    goal: Point2
    obstacles: tuple = ()
    speed: float = DEFAULT_SPEED
    units: str = field(default=UNITS)

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if self.units != UNITS:
            raise ValueError(f"units are fixed to {UNITS!r}")
        issues = check_environment(self.bounds, self.start, self.goal, self.obstacles, self.speed)
        if issues:
            raise ValidationError(issues)

    @cached_property
    def obstacle_edges(self) -> tuple:
        """Stacked (A, B) edge arrays over all obstacles."""
        if not self.obstacles:
            empty = np.zeros((0, 2))
            return empty, empty
        pairs = [poly.edge_arrays for poly in self.obstacles]
        return np.vstack([a for a, _ in pairs]), np.vstack([b for _, b in pairs])

    @cached_property
    def wall_edges(self) -> tuple:
        """Obstacle edges plus the four bounds walls."""
        c = np.array([[p.x, p.y] for p in self.bounds.corners()])
        A, B = self.obstacle_edges
        return np.vstack([A, c]), np.vstack([B, np.roll(c, -1, axis=0)])

    def obstacles_near(self, p: Point2, radius: float, walls: bool = True) -> bool:
        """Cheap test for any obstacle bounding box (or wall) within ``radius``."""
        b = self.bounds
        if walls and min(p.x - b.min.x, b.max.x - p.x, p.y - b.min.y, b.max.y - p.y) <= radius:
            return True
        for poly in self.obstacles:
            x0, y0, x1, y1 = poly.bbox
            dx = max(x0 - p.x, 0.0, p.x - x1)
            dy = max(y0 - p.y, 0.0, p.y - y1)
            if math.hypot(dx, dy) <= radius:
                return True
        return False

    def inside_obstacle(self, p: Point2) -> Optional[int]:
        for k, poly in enumerate(self.obstacles):
            if point_in_polygon(p, poly):
                return k
        return None


# --- scenario documents ------------------------------------------------------

_TOP_KEYS = {"name", "bounds", "start", "goal", "speed", "obstacles"}
_REQUIRED = {"name", "bounds", "start", "goal", "obstacles"}


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ParseError(f"{where}: non-finite number")
    return value


def _pair(value, where: str) -> Point2:
    if not isinstance(value, list) or len(value) != 2:
        raise ParseError(f"{where}: expected [x, y]")
    return Point2(_number(value[0], where), _number(value[1], where))


def parse_scenario(data: dict) -> Environment:
    """Build a validated Environment from an already-decoded scenario mapping."""
    if not isinstance(data, dict):
        raise ParseError("scenario must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ParseError(f"unknown keys: {sorted(unknown)}")
    missing = _REQUIRED - set(data)
    if missing:
        raise ParseError(f"missing keys: {sorted(missing)}")
    name = data["name"]
    if not isinstance(name, str):
        raise ParseError("name: expected a string")
    raw_bounds = data["bounds"]
    if not isinstance(raw_bounds, dict) or set(raw_bounds) != {"min", "max"}:
        raise ParseError("bounds: expected an object with exactly 'min' and 'max'")
    bounds = Bounds(_pair(raw_bounds["min"], "bounds.min"), _pair(raw_bounds["max"], "bounds.max"))
    start = _pair(data["start"], "start")
    goal = _pair(data["goal"], "goal")
    speed = _number(data["speed"], "speed") if "speed" in data else DEFAULT_SPEED
    raw_obstacles = data["obstacles"]
    if not isinstance(raw_obstacles, list):
        raise ParseError("obstacles: expected an array")

    issues = []
    obstacles = []
    for k, raw in enumerate(raw_obstacles):
        if not isinstance(raw, list):
            raise ParseError(f"obstacles[{k}]: expected an array of [x, y]")
        verts = [_pair(v, f"obstacles[{k}][{j}]") for j, v in enumerate(raw)]
        try:
            obstacles.append(Polygon(tuple(verts)))
        except GeometryError as exc:
            issues.append(ScenarioIssue(IssueCode.BadPolygon, f"obstacle {k}: {exc}"))
    issues.extend(check_environment(bounds, start, goal, obstacles, speed))
    if issues:
        raise ValidationError(issues)
    return Environment(name, bounds, start, goal, tuple(obstacles), speed)


def load_scenario(document: str) -> Environment:
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    return parse_scenario(data)


def scenario_dict(env: Environment) -> dict:
    return {
        "name": env.name,
        "bounds": {"min": list(env.bounds.min), "max": list(env.bounds.max)},
        "start": list(env.start),
        "goal": list(env.goal),
        "speed": env.speed,
        "obstacles": [[list(v) for v in poly.vertices] for poly in env.obstacles],
    }


def render_scenario(env: Environment) -> str:
    return json.dumps(scenario_dict(env), indent=2) + "\n"


# --- builtin scenarios -------------------------------------------------------


def _box(x0, y0, x1, y1) -> Polygon:
    return Polygon.rectangle(x0, y0, x1, y1)


def builtin_scenarios() -> list:
    """The shipped benchmark environments.

    ``block`` reproduces the topology of a single block straddling the
    start-goal line at desk scale; the figures it stands in for carry no
    coordinates.
    """
    open_field = Environment(
        "open-field",
        Bounds(Point2(-30.0, -30.0), Point2(202.0, 30.0)),
        Point2(0.0, 0.0),
        Point2(172.0, 0.0),
    )
    block = Environment(
        "block",
        Bounds(Point2(-5.0, -8.0), Point2(15.0, 8.0)),
        Point2(0.0, 0.0),
        Point2(10.0, 0.0),
        (_box(4.0, -1.0, 6.0, 1.0),),
    )
    two_blocks = Environment(
        "two-blocks",
        Bounds(Point2(-5.0, -8.0), Point2(21.0, 8.0)),
        Point2(0.0, 0.0),
        Point2(16.0, 0.0),
        (_box(4.0, -1.0, 6.0, 1.0), _box(10.0, -1.5, 12.0, 0.5)),
    )
    # four slabs sealing a square cell around the goal
    ring = (
        _box(2.0, -3.0, 8.0, -2.0),
        _box(2.0, 2.0, 8.0, 3.0),
        _box(2.0, -2.0, 3.0, 2.0),
        _box(7.0, -2.0, 8.0, 2.0),
    )
    enclosed = Environment(
        "enclosed-goal",
        Bounds(Point2(-8.0, -8.0), Point2(14.0, 8.0)),
        Point2(-3.0, 0.0),
        Point2(5.0, 0.0),
        ring,
    )
    return [open_field, block, two_blocks, enclosed]


def builtin_names() -> list:
    return [env.name for env in builtin_scenarios()]


def get_builtin(name: str) -> Environment:
    for env in builtin_scenarios():
        if env.name == name:
            return env
    raise KeyError(f"unknown builtin scenario {name!r}; choose from {builtin_names()}")


# --- randomized scenarios ----------------------------------------------------


def _polygon_gap(p: Polygon, q: Polygon) -> float:
    for a, b in p.edges():
        for c, d in q.edges():
            if segments_intersect(a, b, c, d):
                return 0.0
    if point_in_polygon(p.vertices[0], q) or point_in_polygon(q.vertices[0], p):
        return 0.0
    return min(
        min(point_polygon_distance(v, q) for v in p.vertices),
        min(point_polygon_distance(v, p) for v in q.vertices),
    )


def random_environment(
    seed: int,
    n_obstacles: Optional[int] = None,
    size: float = 12.0,
    gap: float = 0.5,
    margin: float = 1.0,
) -> Environment:
    """Random desk-scale scene of disjoint convex obstacles.

    Obstacles keep ``gap`` from each other and from start/goal and
    ``margin`` from the walls, so the free space is connected and the goal
    is always reachable.
    """
    rng = random.Random(seed)
    if n_obstacles is None:
        n_obstacles = rng.randint(1, 5)
    bounds = Bounds(Point2(0.0, 0.0), Point2(size, size))
    lo, hi = 0.5, size - 0.5
    while True:
        start = Point2(rng.uniform(lo, hi), rng.uniform(lo, hi))
        goal = Point2(rng.uniform(lo, hi), rng.uniform(lo, hi))
        if dist(start, goal) >= 0.5 * size:
            break
    obstacles = []
    attempts = 0
    while len(obstacles) < n_obstacles and attempts < 2000:
        attempts += 1
        if not obstacles:
            # first obstacle sits across the start-goal line
            s = rng.uniform(0.35, 0.65)
            cx = start.x + s * (goal.x - start.x) + rng.uniform(-0.4, 0.4)
            cy = start.y + s * (goal.y - start.y) + rng.uniform(-0.4, 0.4)
        else:
            cx, cy = rng.uniform(margin, size - margin), rng.uniform(margin, size - margin)
        radius = rng.uniform(0.4, 1.6)
        k = rng.randint(3, 8)
        pts = []
        for _ in range(k):
            ang = rng.uniform(-math.pi, math.pi)
            rad = radius * rng.uniform(0.6, 1.0)
            pts.append((cx + rad * math.cos(ang), cy + rad * math.sin(ang)))
        hull = convex_hull(pts)
        if len(hull) < 3:
            continue
        try:
            poly = Polygon(tuple(hull))
        except GeometryError:
            continue
        if poly.area < 0.1:
            continue
        x0, y0, x1, y1 = poly.bbox
        if x0 < margin or y0 < margin or x1 > size - margin or y1 > size - margin:
            continue
        if point_in_polygon(start, poly) or point_in_polygon(goal, poly):
            continue
        if min(point_polygon_distance(start, poly), point_polygon_distance(goal, poly)) < gap:
            continue
        if any(_polygon_gap(poly, other) < gap for other in obstacles):
            continue
        obstacles.append(poly)
    return Environment(f"random-{seed}", bounds, start, goal, tuple(obstacles))
