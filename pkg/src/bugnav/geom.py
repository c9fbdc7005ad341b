"""Planar geometry primitives: points, lines, segments and simple polygons.

Scalar functions operate on :class:`Point2` values and are the reference
behaviour.  The ``*_edges`` helpers at the bottom are vectorised numpy
versions of the same predicates, used on the hot paths of sensing and
simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

EPS_GEO = 1e-9


class GeometryError(ValueError):
    """Invalid geometric input."""


class DegenerateLine(GeometryError):
    """A line was requested through two coincident points."""


@dataclass(frozen=True, slots=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point2") -> "Point2":
        return Point2(self.x - other.x, self.y - other.y)

    def scaled(self, k: float) -> "Point2":
        return Point2(self.x * k, self.y * k)


def as_point(value) -> Point2:
    if isinstance(value, Point2):
        return value
    x, y = value
    return Point2(float(x), float(y))


def dist(p: Point2, q: Point2) -> float:
    return math.hypot(q.x - p.x, q.y - p.y)


def bearing(p: Point2, q: Point2) -> float:
    """Heading (radians) of the direction from ``p`` toward ``q``."""
    return math.atan2(q.y - p.y, q.x - p.x)


def normalize_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def cross(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * by - ay * bx


@dataclass(frozen=True, slots=True)
class Line2:
    """Implicit line ``a*x + b*y = c`` with ``a**2 + b**2 == 1``.

    Canonical sign: ``a > 0``, or ``a == 0`` and ``b > 0``.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.a, self.b, self.c)):
            raise GeometryError("line coefficients must be finite")
        if abs(self.a * self.a + self.b * self.b - 1.0) > 1e-9:
            raise GeometryError("line normal (a, b) must have unit length")

    @property
    def slope(self) -> Optional[float]:
        """Slope ``dy/dx``; ``None`` for vertical lines."""
        if abs(self.b) <= EPS_GEO:
            return None
        return -self.a / self.b

    @property
    def intercept(self) -> Optional[float]:
        """y-intercept; ``None`` for vertical lines."""
        if abs(self.b) <= EPS_GEO:
            return None
        return self.c / self.b

    @property
    def angle(self) -> float:
        """Inclination of the line in (-pi/2, pi/2]."""
        theta = math.atan2(-self.a, self.b)
        if theta <= -math.pi / 2:
            theta += math.pi
        elif theta > math.pi / 2:
            theta -= math.pi
        return theta

    def signed_distance(self, p: Point2) -> float:
        return self.a * p.x + self.b * p.y - self.c

    def contains(self, p: Point2, tol: float = EPS_GEO) -> bool:
        return abs(self.signed_distance(p)) <= tol


def line_through(p1: Point2, p2: Point2) -> Line2:
    dx = p2.x - p1.x
    dy = p2.y - p1.y
    length = math.hypot(dx, dy)
    if length <= EPS_GEO:
        raise DegenerateLine(f"coincident points {p1} and {p2}")
    a = -dy / length
    b = dx / length
    # symmetric in (p1, p2) so both orders canonicalize identically
    c = 0.5 * (a * (p1.x + p2.x) + b * (p1.y + p2.y))
    if a < 0.0 or (a == 0.0 and b < 0.0):
        a, b, c = -a, -b, -c
    return Line2(a + 0.0, b + 0.0, c + 0.0)


def goal_line(p: Point2, goal: Point2) -> Line2:
    """Reference line from a departure point to the goal."""
    return line_through(p, goal)


@dataclass(frozen=True, slots=True)
class Segment2:
    p: Point2
    q: Point2

    def __post_init__(self):
        if dist(self.p, self.q) <= EPS_GEO:
            raise GeometryError("zero-length segment")

    @property
    def length(self) -> float:
        return dist(self.p, self.q)

    def at(self, t: float) -> Point2:
        return Point2(self.p.x + t * (self.q.x - self.p.x), self.p.y + t * (self.q.y - self.p.y))


def signed_area(vertices: Sequence[Point2]) -> float:
    n = len(vertices)
    acc = 0.0
    for i in range(n):
        p, q = vertices[i], vertices[(i + 1) % n]
        acc += p.x * q.y - q.x * p.y
    return 0.5 * acc


def _orient(p: Point2, q: Point2, r: Point2) -> float:
    return cross(q.x - p.x, q.y - p.y, r.x - p.x, r.y - p.y)


def _on_segment(p: Point2, a: Point2, b: Point2, tol: float = EPS_GEO) -> bool:
    return point_segment_distance(p, a, b) <= tol


def segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool:
    """Closed segment intersection test (touching counts)."""
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if ((o1 > 0 and o2 < 0) or (o1 < 0 and o2 > 0)) and ((o3 > 0 and o4 < 0) or (o3 < 0 and o4 > 0)):
        return True
    return (
        _on_segment(c, a, b)
        or _on_segment(d, a, b)
        or _on_segment(a, c, d)
        or _on_segment(b, c, d)
    )


@dataclass(frozen=True)
class Polygon:
    """Simple polygon stored counterclockwise; the closing edge is implicit."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple(as_point(v) for v in self.vertices)
        if len(verts) < 3:
            raise GeometryError(f"polygon needs at least 3 vertices, got {len(verts)}")
        area = signed_area(verts)
        if abs(area) <= EPS_GEO:
            raise GeometryError("polygon has zero area")
        if area < 0:
            verts = tuple(reversed(verts))
        n = len(verts)
        for i in range(n):
            if dist(verts[i], verts[(i + 1) % n]) <= EPS_GEO:
                raise GeometryError(f"repeated vertex at index {i}")
        # non-adjacent edges must not touch
        for i in range(n):
            a, b = verts[i], verts[(i + 1) % n]
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                c, d = verts[j], verts[(j + 1) % n]
                if segments_intersect(a, b, c, d):
                    raise GeometryError("polygon is not simple")
        object.__setattr__(self, "vertices", verts)

    def edges(self):
        n = len(self.vertices)
        for i in range(n):
            yield self.vertices[i], self.vertices[(i + 1) % n]

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    @cached_property
    def bbox(self) -> tuple:
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    @cached_property
    def edge_arrays(self) -> tuple:
        a = np.array([[v.x, v.y] for v in self.vertices])
        return a, np.roll(a, -1, axis=0)

    @classmethod
    def rectangle(cls, x0: float, y0: float, x1: float, y1: float) -> "Polygon":
        return cls(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


def convex_hull(points: Iterable) -> list:
    """Andrew's monotone chain; returns hull vertices counterclockwise."""
    pts = sorted({(float(x), float(y)) for x, y in points})
    if len(pts) <= 2:
        return [Point2(*p) for p in pts]

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and cross(
                out[-1][0] - out[-2][0], out[-1][1] - out[-2][1], p[0] - out[-2][0], p[1] - out[-2][1]
            ) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return [Point2(*p) for p in lower[:-1] + upper[:-1]]


def point_segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    ex, ey = b.x - a.x, b.y - a.y
    len2 = ex * ex + ey * ey
    if len2 == 0.0:
        return dist(p, a)
    t = ((p.x - a.x) * ex + (p.y - a.y) * ey) / len2
    t = min(1.0, max(0.0, t))
    return math.hypot(p.x - (a.x + t * ex), p.y - (a.y + t * ey))


def point_polygon_distance(p: Point2, poly: Polygon) -> float:
    """Distance from ``p`` to the polygon boundary."""
    return min(point_segment_distance(p, a, b) for a, b in poly.edges())


def point_in_polygon(p: Point2, poly: Polygon) -> bool:
    """Closed containment: boundary points count as inside."""
    x0, y0, x1, y1 = poly.bbox
    if p.x < x0 - EPS_GEO or p.x > x1 + EPS_GEO or p.y < y0 - EPS_GEO or p.y > y1 + EPS_GEO:
        return False
    inside = False
    for a, b in poly.edges():
        if point_segment_distance(p, a, b) <= EPS_GEO:
            return True
        if (a.y > p.y) != (b.y > p.y):
            x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
            if p.x < x_cross:
                inside = not inside
    return inside


def point_strictly_inside(p: Point2, poly: Polygon, tol: float = EPS_GEO) -> bool:
    return point_in_polygon(p, poly) and point_polygon_distance(p, poly) > tol


def _segment_edge_params(p: Point2, q: Point2, a: Point2, b: Point2) -> list:
    """Parameters t in [0, 1] along p->q where it meets the closed edge a-b."""
    rx, ry = q.x - p.x, q.y - p.y
    ex, ey = b.x - a.x, b.y - a.y
    wx, wy = a.x - p.x, a.y - p.y
    rlen = math.hypot(rx, ry)
    elen = math.hypot(ex, ey)
    denom = cross(rx, ry, ex, ey)
    tol_t = EPS_GEO / rlen
    if abs(denom) > EPS_GEO * rlen * elen:
        t = cross(wx, wy, ex, ey) / denom
        u = cross(wx, wy, rx, ry) / denom
        tol_u = EPS_GEO / elen
        if -tol_t <= t <= 1 + tol_t and -tol_u <= u <= 1 + tol_u:
            return [min(1.0, max(0.0, t))]
        return []
    # parallel: only collinear overlap matters
    if abs(cross(wx, wy, rx, ry)) / rlen > EPS_GEO:
        return []
    r2 = rlen * rlen
    t0 = (wx * rx + wy * ry) / r2
    t1 = ((b.x - p.x) * rx + (b.y - p.y) * ry) / r2
    lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
    if lo <= hi + tol_t:
        return [lo, min(hi, 1.0)]
    return []


def segment_polygon_hit(s: Segment2, poly: Polygon) -> Optional[tuple]:
    """Earliest ``(t, point)`` where ``s`` enters the closed polygon, else None."""
    if point_in_polygon(s.p, poly):
        return 0.0, s.p
    best = None
    for a, b in poly.edges():
        for t in _segment_edge_params(s.p, s.q, a, b):
            if best is None or t < best:
                best = t
    if best is None:
        return None
    return best, s.at(best)


def segment_crosses_interior(p: Point2, q: Point2, poly: Polygon) -> bool:
    """True iff the segment p-q passes through the open interior of ``poly``."""
    if dist(p, q) <= EPS_GEO:
        return point_strictly_inside(p, poly)
    params = {0.0, 1.0}
    for a, b in poly.edges():
        params.update(_segment_edge_params(p, q, a, b))
    ts = sorted(params)
    seg = Segment2(p, q)
    for t0, t1 in zip(ts, ts[1:]):
        if t1 - t0 <= 1e-12:
            continue
        if point_strictly_inside(seg.at(0.5 * (t0 + t1)), poly):
            return True
    return False


def segment_segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> float:
    if segments_intersect(a, b, c, d):
        return 0.0
    return min(
        point_segment_distance(a, c, d),
        point_segment_distance(b, c, d),
        point_segment_distance(c, a, b),
        point_segment_distance(d, a, b),
    )


def segment_polygon_distance(p: Point2, q: Point2, poly: Polygon) -> float:
    """Distance between a segment and a closed polygon (0 when they meet)."""
    if point_in_polygon(p, poly) or point_in_polygon(q, poly):
        return 0.0
    return min(segment_segment_distance(p, q, a, b) for a, b in poly.edges())


# --- vectorised helpers over stacked edge arrays (A[i] -> B[i]) -------------


def ray_cast_edges(origin, angles: np.ndarray, A: np.ndarray, B: np.ndarray, max_range: float) -> np.ndarray:
    """First-hit distance of each ray against all edges, clamped to ``max_range``."""
    if len(A) == 0:
        return np.full(len(angles), float(max_range))
    ox, oy = origin
    dx = np.cos(angles)[:, None]
    dy = np.sin(angles)[:, None]
    ex = B[:, 0] - A[:, 0]
    ey = B[:, 1] - A[:, 1]
    wx = A[:, 0] - ox
    wy = A[:, 1] - oy
    denom = dx * ey - dy * ex
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        inv = 1.0 / denom
        t = (wx * ey - wy * ex) * inv
        u = (wx * dy - wy * dx) * inv
    # u outside [0, 1], t behind the origin, or a parallel edge giving nan: no hit
    t[~((u >= -EPS_GEO) & (u <= 1.0 + EPS_GEO) & (t >= -EPS_GEO))] = np.inf
    r = t.min(axis=1)
    np.minimum(r, max_range, out=r)
    return r


def segment_hits_edges(p, q, A: np.ndarray, B: np.ndarray) -> bool:
    """Closed intersection test of one segment against many edges."""
    if len(A) == 0:
        return False
    px, py = p
    qx, qy = q
    rx, ry = qx - px, qy - py
    ex = B[:, 0] - A[:, 0]
    ey = B[:, 1] - A[:, 1]
    o1 = rx * (A[:, 1] - py) - ry * (A[:, 0] - px)
    o2 = rx * (B[:, 1] - py) - ry * (B[:, 0] - px)
    o3 = ex * (py - A[:, 1]) - ey * (px - A[:, 0])
    o4 = ex * (qy - A[:, 1]) - ey * (qx - A[:, 0])
    if ((o1 * o2 < 0) & (o3 * o4 < 0)).any():
        return True
    # near-degenerate orientations may still touch; settle those exactly
    rlen = math.hypot(rx, ry)
    elen = np.hypot(ex, ey)
    tol = 2.0 * EPS_GEO
    close = (np.minimum(np.abs(o1), np.abs(o2)) <= tol * rlen) | (
        np.minimum(np.abs(o3), np.abs(o4)) <= tol * elen
    )
    for i in np.flatnonzero(close):
        a = Point2(A[i, 0], A[i, 1])
        b = Point2(B[i, 0], B[i, 1])
        if segment_segment_distance(Point2(px, py), Point2(qx, qy), a, b) <= EPS_GEO:
            return True
    return False


def point_segment_distance_edges(p, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    px, py = p
    ex = B[:, 0] - A[:, 0]
    ey = B[:, 1] - A[:, 1]
    len2 = ex * ex + ey * ey
    t = ((px - A[:, 0]) * ex + (py - A[:, 1]) * ey) / len2
    np.clip(t, 0.0, 1.0, out=t)
    return np.hypot(px - (A[:, 0] + t * ex), py - (A[:, 1] + t * ey))


def _points_to_segment(P: np.ndarray, a, b) -> np.ndarray:
    ax, ay = a
    ex, ey = b[0] - ax, b[1] - ay
    len2 = ex * ex + ey * ey
    if len2 == 0.0:
        return np.hypot(P[:, 0] - ax, P[:, 1] - ay)
    t = ((P[:, 0] - ax) * ex + (P[:, 1] - ay) * ey) / len2
    np.clip(t, 0.0, 1.0, out=t)
    return np.hypot(P[:, 0] - (ax + t * ex), P[:, 1] - (ay + t * ey))


def segment_edges_distance(p, q, A: np.ndarray, B: np.ndarray) -> float:
    """Minimum distance between segment p-q and a set of edges (polygon edges never zero-length)."""
    if len(A) == 0:
        return math.inf
    if segment_hits_edges(p, q, A, B):
        return 0.0
    return float(
        min(
            point_segment_distance_edges(p, A, B).min(),
            point_segment_distance_edges(q, A, B).min(),
            _points_to_segment(A, p, q).min(),
            _points_to_segment(B, p, q).min(),
        )
    )
