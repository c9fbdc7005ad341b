"""Idealised range sensing: ray casts, beam sweeps and goal line-of-sight."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Optional

import numpy as np

from .geom import (
    EPS_GEO,
    Point2,
    dist,
    point_strictly_inside,
    ray_cast_edges,
    segment_crosses_interior,
    segment_edges_distance,
)
from .world import Environment


class SensingError(RuntimeError):
    pass


class OriginInsideObstacle(SensingError):
    """A ray or scan was requested from inside an obstacle."""


@dataclass(frozen=True)
class SensorConfig:
    max_range: float = 20.0
    beam_count: int = 181
    fov: float = 2.0 * math.pi

    def __post_init__(self):
        if not self.max_range > 0:
            raise ValueError("max_range must be > 0")
        if self.beam_count < 3:
            raise ValueError("beam_count must be >= 3")
        if not 0 < self.fov <= 2.0 * math.pi + EPS_GEO:
            raise ValueError("fov must lie in (0, 2*pi]")


@dataclass(frozen=True, eq=False)
class Scan:
    origin: Point2
    headings: np.ndarray
    ranges: np.ndarray
    max_range: float

    def hits(self) -> np.ndarray:
        """Boolean mask of beams that returned before max_range."""
        return self.ranges < self.max_range

    def hit_points(self) -> np.ndarray:
        """(K, 2) array of the boundary points behind every return."""
        mask = self.hits()
        r = self.ranges[mask]
        h = self.headings[mask]
        return np.column_stack((self.origin.x + r * np.cos(h), self.origin.y + r * np.sin(h)))

    def nearest_return(self) -> Optional[float]:
        mask = self.hits()
        if not mask.any():
            return None
        return float(self.ranges[mask].min())


def _check_origin(env: Environment, origin: Point2):
    for k, poly in enumerate(env.obstacles):
        if point_strictly_inside(origin, poly):
            raise OriginInsideObstacle(f"{tuple(origin)} lies inside obstacle {k}")


def cast_ray(env: Environment, origin: Point2, heading: float, max_range: float) -> float:
    """Range to the first obstacle or wall along ``heading``, clamped to ``max_range``."""
    _check_origin(env, origin)
    A, B = env.wall_edges
    r = ray_cast_edges((origin.x, origin.y), np.array([heading]), A, B, max_range)
    return float(r[0])


@lru_cache(maxsize=32)
def _beam_offsets(fov: float, beam_count: int) -> np.ndarray:
    offsets = np.linspace(-0.5 * fov, 0.5 * fov, beam_count)
    offsets.flags.writeable = False
    return offsets


def beam_headings(heading: float, cfg: SensorConfig) -> np.ndarray:
    """Beam directions evenly spread over the field of view, both ends included."""
    return heading + _beam_offsets(cfg.fov, cfg.beam_count)


def take_scan(env: Environment, pose, cfg: SensorConfig) -> Scan:
    origin = pose.position
    _check_origin(env, origin)
    headings = beam_headings(pose.heading, cfg)
    if not env.obstacles_near(origin, cfg.max_range):
        ranges = np.full(cfg.beam_count, float(cfg.max_range))
    else:
        A, B = env.wall_edges
        ranges = ray_cast_edges((origin.x, origin.y), headings, A, B, cfg.max_range)
    return Scan(origin, headings, ranges, float(cfg.max_range))


class DeferredScan(Scan):
    """A scan whose rays are cast on first access to ``ranges``.

    Goal pursuit rarely looks at the sweep, so the simulator hands these
    to the step functions and pays for ray casting only when needed.
    """

    def __init__(self, env: Environment, pose, cfg: SensorConfig):
        _check_origin(env, pose.position)
        object.__setattr__(self, "origin", pose.position)
        object.__setattr__(self, "headings", beam_headings(pose.heading, cfg))
        object.__setattr__(self, "max_range", float(cfg.max_range))
        object.__setattr__(self, "_env", env)
        object.__setattr__(self, "_beam_count", cfg.beam_count)

    @cached_property
    def ranges(self) -> np.ndarray:
        env, origin = self._env, self.origin
        if not env.obstacles_near(origin, self.max_range):
            return np.full(self._beam_count, self.max_range)
        A, B = env.wall_edges
        return ray_cast_edges((origin.x, origin.y), self.headings, A, B, self.max_range)


def goal_visible(
    env: Environment,
    p: Point2,
    goal: Point2,
    clearance: float,
    limit: Optional[float] = None,
) -> bool:
    """Whether the straight path p -> goal keeps ``clearance`` from every obstacle.

    With ``clearance == 0`` only passing through an obstacle interior blocks
    the view, so grazing a vertex still counts as visible.  ``limit``
    truncates the checked segment to a sensing radius.
    """
    span = dist(p, goal)
    if span <= EPS_GEO:
        return True
    target = goal
    if limit is not None and span > limit:
        k = limit / span
        target = Point2(p.x + k * (goal.x - p.x), p.y + k * (goal.y - p.y))
    if clearance <= 0.0:
        return not any(segment_crosses_interior(p, target, poly) for poly in env.obstacles)
    A, B = env.obstacle_edges
    return segment_edges_distance((p.x, p.y), (target.x, target.y), A, B) >= clearance
