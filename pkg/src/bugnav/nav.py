"""Bug-family navigation as pure step functions.

Every algorithm shares one interface::

    state, command = step_<algo>(state, pose, scan, env, params)

``state`` is an immutable :class:`NavState`; the caller moves the robot by
``command`` and calls again with the new pose and scan.  A step that changes
behaviour also computes the command of the new behaviour, so a hit and the
first boundary move happen in the same call.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .geom import (
    EPS_GEO,
    Line2,
    Point2,
    bearing,
    dist,
    goal_line,
    line_through,
    normalize_angle,
    point_segment_distance_edges,
    segment_edges_distance,
)
from .sense import Scan, cast_ray, goal_visible
from .world import Environment

STANDOFF_FACTOR = 1.2
CONTACT_EPS = 1e-6


class NavigationError(RuntimeError):
    pass


class StuckDetected(NavigationError):
    """No progress toward the goal within the stall window."""


class LostWall(NavigationError):
    """Boundary following found no obstacle return to track."""


class Algorithm(enum.Enum):
    BUG1 = "bug1"
    BUG2 = "bug2"
    DISTBUG = "distbug"
    IBA = "iba"

    @classmethod
    def parse(cls, name: str) -> "Algorithm":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(a.value for a in cls)
            raise ValueError(f"unknown algorithm {name!r}; valid names: {valid}") from None


class Behavior(enum.Enum):
    MoveToGoal = "MoveToGoal"
    ObstacleAvoidance = "ObstacleAvoidance"
    Done = "Done"
    Unreachable = "Unreachable"


class Side(enum.Enum):
    Left = "Left"
    Right = "Right"


class Phase(enum.Enum):
    Surveying = "Surveying"
    Returning = "Returning"


@dataclass(frozen=True, slots=True)
class Pose:
    position: Point2
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", normalize_angle(self.heading))


@dataclass(frozen=True, slots=True)
class MotionCommand:
    heading: float
    step: float
    halt: bool = False

    def __post_init__(self):
        if self.step < 0:
            raise ValueError("step must be >= 0")
        if self.halt and self.step != 0:
            raise ValueError("a halt command cannot move")

    @classmethod
    def stop(cls, heading: float = 0.0) -> "MotionCommand":
        return cls(heading, 0.0, True)


@dataclass(frozen=True)
class MLine:
    line: Line2
    start: Point2
    goal: Point2


@dataclass(frozen=True)
class NavParams:
    step_size: float = 0.05
    # contact threshold and goal-visibility clearance
    clearance: float = 0.05
    standoff: Optional[float] = None
    goal_tolerance: Optional[float] = None
    eps_progress: Optional[float] = None
    eps_loop: Optional[float] = None
    eps_mline: Optional[float] = None
    min_loop_steps: int = 8
    stall_window: int = 10_000
    distbug_leave: str = "guarded"
    visibility_limit: str = "unlimited"
    sensor_range: float = 20.0

    def __post_init__(self):
        h = self.step_size
        if not h > 0:
            raise ValueError("step_size must be > 0")
        if not self.clearance > 0:
            raise ValueError("clearance must be > 0")
        if self.distbug_leave not in ("guarded", "verbatim"):
            raise ValueError("distbug_leave must be 'guarded' or 'verbatim'")
        if self.visibility_limit not in ("sensor", "unlimited"):
            raise ValueError("visibility_limit must be 'sensor' or 'unlimited'")
        defaults = {
            "standoff": STANDOFF_FACTOR * self.clearance,
            "goal_tolerance": 0.5 * h,
            "eps_progress": h,
            "eps_loop": 2.0 * h,
            "eps_mline": 0.5 * h,
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        if self.goal_tolerance < 0.5 * h - EPS_GEO:
            raise ValueError("goal_tolerance must be >= step_size / 2")


DEFAULT_PARAMS = NavParams()


@dataclass(frozen=True)
class NavState:
    algorithm: Algorithm
    behavior: Behavior = Behavior.MoveToGoal
    hit_point: Optional[Point2] = None
    leave_point: Optional[Point2] = None
    leave_reason: Optional[str] = None
    follow_side: Optional[Side] = None
    d_hit: Optional[float] = None
    d_min: Optional[float] = None
    d_min_point: Optional[Point2] = None
    d_current: float = math.inf
    circumnavigation: Optional[Phase] = None
    boundary_path: tuple = ()
    m_line: Optional[MLine] = None
    reference: Optional[Line2] = None
    steps_on_boundary: int = 0
    left_hit_zone: bool = False
    encounters: int = 0
    best_d: float = math.inf
    stall_steps: int = 0


def init_state(algorithm: Algorithm, env: Environment) -> NavState:
    algorithm = Algorithm(algorithm)
    reference = goal_line(env.start, env.goal) if dist(env.start, env.goal) > EPS_GEO else None
    m_line = None
    if algorithm is Algorithm.BUG2 and reference is not None:
        m_line = MLine(line_through(env.start, env.goal), env.start, env.goal)
    side = None if algorithm is Algorithm.IBA else Side.Left
    return NavState(algorithm, follow_side=side, m_line=m_line, reference=reference)


# --- percept helpers ---------------------------------------------------------


def _advance(p: Point2, cmd: MotionCommand) -> Point2:
    return Point2(p.x + cmd.step * math.cos(cmd.heading), p.y + cmd.step * math.sin(cmd.heading))


def choose_follow_direction(scan: Scan, pose: Pose, goal: Point2) -> Side:
    """Pick the boundary-following side with more free range.

    Beams are split by the bearing to the goal; ties go Left.
    """
    ref = bearing(scan.origin, goal)
    rel = np.remainder(scan.headings - ref + math.pi, 2.0 * math.pi) - math.pi
    tol = 1e-9
    left = (rel > tol) & (rel < math.pi - tol)
    right = (rel < -tol) & (rel > -math.pi + tol)
    left_sum = float(scan.ranges[left].sum())
    right_sum = float(scan.ranges[right].sum())
    if right_sum > left_sum + 1e-9 * max(1.0, left_sum + right_sum):
        return Side.Right
    return Side.Left


_COARSE = np.linspace(0.0, 2.0 * math.pi, 72, endpoint=False)
_UNIT17 = np.linspace(0.0, 1.0, 17)


def _sq_clearances(px: float, py: float, angles: np.ndarray, step: float, nx: np.ndarray, ny: np.ndarray) -> np.ndarray:
    """Squared distance from each candidate endpoint to the nearest return."""
    dx = (px + step * np.cos(angles))[:, None] - nx
    dy = (py + step * np.sin(angles))[:, None] - ny
    return (dx * dx + dy * dy).min(axis=1)


def wall_follow_command(
    scan: Scan,
    pose: Pose,
    side: Side,
    clearance: float,
    step: float,
    standoff: Optional[float] = None,
) -> MotionCommand:
    """One boundary-following move.

    Starting from the direction of the nearest return, candidate headings
    are swept toward the free side (counterclockwise for Left, so the wall
    stays on the robot's right) and the first heading whose endpoint keeps
    ``standoff`` from every return is taken.  This tracks the offset curve of
    the obstacle and rounds convex corners on an arc.
    """
    standoff = STANDOFF_FACTOR * clearance if standoff is None else standoff
    pts = scan.hit_points()
    if len(pts) == 0:
        raise LostWall(f"no return within {scan.max_range} ft")
    px, py = scan.origin.x, scan.origin.y
    rx = pts[:, 0] - px
    ry = pts[:, 1] - py
    dd = np.hypot(rx, ry)
    i = int(np.argmin(dd))
    base = math.atan2(ry[i], rx[i])
    want = min(standoff, float(dd[i]) + 0.5 * step)
    mask = dd <= want + step + 1e-9
    if not mask.any():
        return MotionCommand(normalize_angle(base), step)
    nx, ny = pts[mask, 0], pts[mask, 1]
    want2 = want * want
    sgn = 1.0 if side is Side.Left else -1.0

    c = _sq_clearances(px, py, base + sgn * _COARSE, step, nx, ny)
    free = c >= want2
    if free[0]:
        delta = 0.0
    elif not free.any():
        delta = float(_COARSE[int(np.argmax(c))])
    else:
        j = int(np.argmax(free))
        lo, hi = float(_COARSE[j - 1]), float(_COARSE[j])
        for _ in range(2):
            sub = lo + (hi - lo) * _UNIT17
            f = _sq_clearances(px, py, base + sgn * sub, step, nx, ny) >= want2
            k = int(np.argmax(f[1:])) + 1
            lo, hi = float(sub[k - 1]), float(sub[k])
        delta = hi
    return MotionCommand(normalize_angle(base + sgn * delta), step)


# --- shared behaviour pieces -------------------------------------------------


def _goal_command(p: Point2, env: Environment, params: NavParams) -> Optional[MotionCommand]:
    """Straight move toward the goal, or None on contact.

    Contact means the forward beam is within ``clearance`` or the step would
    carry the robot closer than ``clearance`` to an obstacle it passes.
    """
    d = dist(p, env.goal)
    head = bearing(p, env.goal)
    fwd = cast_ray(env, p, head, d + params.clearance + params.step_size)
    if fwd >= d:
        s = min(params.step_size, d)
    else:
        room = fwd - params.clearance
        if room <= CONTACT_EPS:
            return None
        s = min(params.step_size, room, d)
    if _crowds_obstacle(p, head, s, env, params):
        return None
    return MotionCommand(head, s)


def _crowds_obstacle(p: Point2, heading: float, s: float, env: Environment, params: NavParams) -> bool:
    if not env.obstacles_near(p, params.clearance + s, walls=False):
        return False
    A, B = env.obstacle_edges
    here = float(point_segment_distance_edges((p.x, p.y), A, B).min())
    q = (p.x + s * math.cos(heading), p.y + s * math.sin(heading))
    swept = segment_edges_distance((p.x, p.y), q, A, B)
    # moving away from a wall we are already too close to is fine
    return swept < params.clearance - CONTACT_EPS and swept < here - CONTACT_EPS


def _blocked_toward_goal(p: Point2, env: Environment, params: NavParams) -> bool:
    return _goal_command(p, env, params) is None


def _track_progress(state: NavState, d: float, params: NavParams) -> NavState:
    if d < state.best_d - EPS_GEO:
        return replace(state, best_d=d, stall_steps=0)
    stalled = state.stall_steps + 1
    if stalled >= params.stall_window:
        raise StuckDetected(f"no progress toward the goal in {stalled} steps")
    return replace(state, stall_steps=stalled)


def _start_boundary(state: NavState, p: Point2, d: float, side: Side) -> NavState:
    return replace(
        state,
        behavior=Behavior.ObstacleAvoidance,
        hit_point=p,
        d_hit=d,
        d_min=d,
        d_min_point=p,
        follow_side=side,
        steps_on_boundary=0,
        left_hit_zone=False,
        encounters=state.encounters + 1,
    )


def _on_boundary(state: NavState, p: Point2, d: float, params: NavParams) -> NavState:
    left = state.left_hit_zone or dist(p, state.hit_point) > 2.0 * params.eps_loop
    return replace(
        state,
        d_current=d,
        steps_on_boundary=state.steps_on_boundary + 1,
        left_hit_zone=left,
    )


def _loop_closed(state: NavState, p: Point2, params: NavParams) -> bool:
    return (
        state.steps_on_boundary >= params.min_loop_steps
        and state.left_hit_zone
        and dist(p, state.hit_point) <= params.eps_loop
    )


def _leave(state: NavState, p: Point2, env: Environment, params: NavParams, reason: str):
    d = dist(p, env.goal)
    state = replace(
        state,
        behavior=Behavior.MoveToGoal,
        leave_point=p,
        leave_reason=reason,
        reference=goal_line(p, env.goal) if d > EPS_GEO else state.reference,
        circumnavigation=None,
        boundary_path=(),
    )
    cmd = _goal_command(p, env, params)
    if cmd is None:
        cmd = MotionCommand(bearing(p, env.goal), 0.0)
    return state, cmd


def _unreachable(state: NavState, pose: Pose):
    return replace(state, behavior=Behavior.Unreachable), MotionCommand.stop(pose.heading)


def _follow(state: NavState, pose: Pose, scan: Scan, params: NavParams) -> MotionCommand:
    return wall_follow_command(
        scan, pose, state.follow_side, params.clearance, params.step_size, params.standoff
    )


def _prologue(state: NavState, pose: Pose, env: Environment, params: NavParams):
    """Common head of every step: progress tracking, terminal states, goal pursuit.

    Returns ``(state, command)`` when the step is already decided, or
    ``(state, None)`` when boundary logic must run (contact or ongoing).
    """
    p = pose.position
    d = dist(p, env.goal)
    if state.behavior in (Behavior.Done, Behavior.Unreachable):
        return state, MotionCommand.stop(pose.heading)
    state = _track_progress(state, d, params)
    if d <= params.goal_tolerance:
        return replace(state, behavior=Behavior.Done), MotionCommand.stop(pose.heading)
    if state.behavior is Behavior.MoveToGoal:
        cmd = _goal_command(p, env, params)
        if cmd is not None:
            return state, cmd
    return state, None


# --- the four algorithms -----------------------------------------------------


def step_bug1(state: NavState, pose: Pose, scan: Scan, env: Environment, params: NavParams = DEFAULT_PARAMS):
    state, cmd = _prologue(state, pose, env, params)
    if cmd is not None:
        return state, cmd
    p = pose.position
    d = dist(p, env.goal)
    if state.behavior is Behavior.MoveToGoal:
        state = _start_boundary(state, p, d, Side.Left)
        state = replace(state, circumnavigation=Phase.Surveying, boundary_path=())
    state = _on_boundary(state, p, d, params)

    if state.circumnavigation is Phase.Surveying:
        if d < state.d_min:
            state = replace(state, d_min=d, d_min_point=p)
        state = replace(state, boundary_path=state.boundary_path + (p,))
        if not _loop_closed(state, p, params):
            return state, _follow(state, pose, scan, params)
        state = replace(state, circumnavigation=Phase.Returning)

    target = state.d_min_point
    gap = dist(p, target)
    if gap <= 1e-9:
        if _blocked_toward_goal(p, env, params):
            return _unreachable(state, pose)
        return _leave(state, p, env, params, "closest-point")
    if gap <= params.step_size:
        return state, MotionCommand(bearing(p, target), gap)
    return state, _follow(state, pose, scan, params)


def step_bug2(state: NavState, pose: Pose, scan: Scan, env: Environment, params: NavParams = DEFAULT_PARAMS):
    state, cmd = _prologue(state, pose, env, params)
    if cmd is not None:
        return state, cmd
    p = pose.position
    d = dist(p, env.goal)
    if state.behavior is Behavior.MoveToGoal:
        state = _start_boundary(state, p, d, Side.Left)
    state = _on_boundary(state, p, d, params)
    line = state.m_line.line
    if (
        abs(line.signed_distance(p)) <= params.eps_mline
        and d <= state.d_hit - params.eps_progress
        and not _blocked_toward_goal(p, env, params)
    ):
        return _leave(state, p, env, params, "m-line")
    if _loop_closed(state, p, params):
        return _unreachable(state, pose)
    return state, _follow(state, pose, scan, params)


def _distbug_leaves(state: NavState, d: float, d_next: float, params: NavParams) -> bool:
    if not d_next > d:
        return False
    if params.distbug_leave == "verbatim":
        return True
    return d <= state.d_hit - params.eps_progress


def step_distbug(state: NavState, pose: Pose, scan: Scan, env: Environment, params: NavParams = DEFAULT_PARAMS):
    state, cmd = _prologue(state, pose, env, params)
    if cmd is not None:
        return state, cmd
    p = pose.position
    d = dist(p, env.goal)
    if state.behavior is Behavior.MoveToGoal:
        state = _start_boundary(state, p, d, Side.Left)
    state = _on_boundary(state, p, d, params)
    follow = _follow(state, pose, scan, params)
    d_next = dist(_advance(p, follow), env.goal)
    if _distbug_leaves(state, d, d_next, params):
        return _leave(state, p, env, params, "local-min")
    if d < state.d_min:
        state = replace(state, d_min=d, d_min_point=p)
    if _loop_closed(state, p, params):
        return _unreachable(state, pose)
    return state, follow


def step_iba(state: NavState, pose: Pose, scan: Scan, env: Environment, params: NavParams = DEFAULT_PARAMS):
    state, cmd = _prologue(state, pose, env, params)
    if cmd is not None:
        return state, cmd
    p = pose.position
    d = dist(p, env.goal)
    if state.behavior is Behavior.MoveToGoal:
        side = choose_follow_direction(scan, pose, env.goal)
        state = _start_boundary(state, p, d, side)
    state = _on_boundary(state, p, d, params)
    limit = params.sensor_range if params.visibility_limit == "sensor" else None
    if goal_visible(env, p, env.goal, params.clearance, limit):
        return _leave(state, p, env, params, "visible")
    follow = _follow(state, pose, scan, params)
    d_next = dist(_advance(p, follow), env.goal)
    if d_next > d and d <= state.d_hit - params.eps_progress:
        return _leave(state, p, env, params, "local-min")
    if d < state.d_min:
        state = replace(state, d_min=d, d_min_point=p)
    if _loop_closed(state, p, params):
        return _unreachable(state, pose)
    return state, follow


STEP_FUNCTIONS = {
    Algorithm.BUG1: step_bug1,
    Algorithm.BUG2: step_bug2,
    Algorithm.DISTBUG: step_distbug,
    Algorithm.IBA: step_iba,
}


def step(state: NavState, pose: Pose, scan: Scan, env: Environment, params: NavParams = DEFAULT_PARAMS):
    return STEP_FUNCTIONS[state.algorithm](state, pose, scan, env, params)
