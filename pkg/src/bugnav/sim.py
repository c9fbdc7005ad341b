"""Fixed-step simulation loop, trajectory traces, metrics and comparisons."""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .geom import Point2, bearing, dist, normalize_angle, segment_hits_edges
from .nav import (
    Algorithm,
    Behavior,
    LostWall,
    NavParams,
    NavState,
    Pose,
    StuckDetected,
    init_state,
    step,
)
from .sense import DeferredScan, SensorConfig
from .world import Environment


class InternalCollisionFault(RuntimeError):
    """The simulated robot moved through an obstacle."""


class EmptyTrace(ValueError):
    pass


class Outcome(enum.Enum):
    GoalReached = "GoalReached"
    Unreachable = "Unreachable"
    StepBudgetExceeded = "StepBudgetExceeded"
    Stuck = "Stuck"


@dataclass(frozen=True)
class SimParams:
    step_size: float = 0.05
    speed: Optional[float] = None  # None: use the scenario's speed
    max_steps: int = 1_000_000
    sensor: SensorConfig = field(default_factory=SensorConfig)
    clearance: float = 0.05
    goal_tolerance: Optional[float] = None
    distbug_leave: str = "guarded"
    visibility_limit: str = "unlimited"
    stall_window: int = 10_000

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError("step_size must be > 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.speed is not None and not self.speed > 0:
            raise ValueError("speed must be > 0")
        self.nav_params()

    def nav_params(self) -> NavParams:
        return NavParams(
            step_size=self.step_size,
            clearance=self.clearance,
            goal_tolerance=self.goal_tolerance,
            stall_window=self.stall_window,
            distbug_leave=self.distbug_leave,
            visibility_limit=self.visibility_limit,
            sensor_range=self.sensor.max_range,
        )


@dataclass(frozen=True, slots=True)
class Sample:
    t: float
    pose: Pose
    behavior: Behavior
    d_goal: float


@dataclass
class TrajectoryTrace:
    samples: list
    outcome: Outcome
    algorithm: Optional[Algorithm] = None
    speed: float = 172.0 / 120.0
    leave_points: list = field(default_factory=list)
    hit_points: list = field(default_factory=list)
    steps: int = 0
    leave_reasons: list = field(default_factory=list)

    @property
    def positions(self) -> list:
        return [s.pose.position for s in self.samples]


@dataclass(frozen=True)
class PathMetrics:
    path_length: float
    duration: float
    smoothness: float
    leave_points: tuple
    outcome: Outcome


def run(env: Environment, algorithm, params: SimParams = SimParams()) -> TrajectoryTrace:
    algorithm = Algorithm(algorithm)
    nav = params.nav_params()
    speed = params.speed if params.speed is not None else env.speed
    A, B = env.obstacle_edges
    state: NavState = init_state(algorithm, env)
    pose = Pose(env.start, bearing(env.start, env.goal))
    t = 0.0
    d_goal = dist(pose.position, env.goal)
    samples = [Sample(t, pose, state.behavior, d_goal)]
    leaves, reasons, hits = [], [], []
    outcome = Outcome.StepBudgetExceeded
    steps = 0
    for steps in range(1, params.max_steps + 1):
        if d_goal <= nav.goal_tolerance:
            outcome = Outcome.GoalReached
            steps -= 1
            break
        scan = DeferredScan(env, pose, params.sensor)
        prev = state
        try:
            state, cmd = step(state, pose, scan, env, nav)
        except (StuckDetected, LostWall):
            outcome = Outcome.Stuck
            break
        if prev.behavior is Behavior.MoveToGoal and state.behavior is Behavior.ObstacleAvoidance:
            hits.append(state.hit_point)
        if state.leave_point is not None and state.leave_point is not prev.leave_point:
            leaves.append(state.leave_point)
            reasons.append(state.leave_reason)
        if state.behavior is Behavior.Unreachable:
            outcome = Outcome.Unreachable
            break
        if state.behavior is Behavior.Done:
            outcome = Outcome.GoalReached
            break
        moved = 0.0 if cmd.halt else min(params.step_size, cmd.step)
        if moved <= 0.0:
            continue
        p = pose.position
        q = Point2(p.x + moved * math.cos(cmd.heading), p.y + moved * math.sin(cmd.heading))
        if segment_hits_edges((p.x, p.y), (q.x, q.y), A, B):
            raise InternalCollisionFault(
                f"{algorithm.value}: move {tuple(p)} -> {tuple(q)} touches an obstacle"
            )
        t += moved / speed
        pose = Pose(q, cmd.heading)
        d_goal = dist(q, env.goal)
        samples.append(Sample(t, pose, state.behavior, d_goal))
    else:
        if d_goal <= nav.goal_tolerance:
            outcome = Outcome.GoalReached
    return TrajectoryTrace(samples, outcome, algorithm, speed, leaves, hits, steps, reasons)


def _leave_points_from_labels(samples: Sequence[Sample]) -> list:
    out = []
    for a, b in zip(samples, samples[1:]):
        if a.behavior is Behavior.ObstacleAvoidance and b.behavior is Behavior.MoveToGoal:
            out.append(a.pose.position)
    return out


def metrics(trace: TrajectoryTrace, env: Optional[Environment] = None) -> PathMetrics:
    samples = trace.samples
    if not samples:
        raise EmptyTrace("trace has no samples")
    length = 0.0
    turn = 0.0
    for a, b in zip(samples, samples[1:]):
        length += dist(a.pose.position, b.pose.position)
        turn += abs(normalize_angle(b.pose.heading - a.pose.heading))
    leaves = trace.leave_points or _leave_points_from_labels(samples)
    return PathMetrics(length, samples[-1].t, turn, tuple(leaves), trace.outcome)


@dataclass
class ComparisonRow:
    algorithm: Algorithm
    metrics: PathMetrics
    trace: TrajectoryTrace


@dataclass
class ComparisonTable:
    env_name: str
    rows: list

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def row(self, algorithm) -> ComparisonRow:
        algorithm = Algorithm(algorithm)
        for r in self.rows:
            if r.algorithm is algorithm:
                return r
        raise KeyError(algorithm)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["algo", "outcome", "path_length_ft", "duration_s", "smoothness_rad", "leave_points"])
        for r in self.rows:
            m = r.metrics
            leaves = ";".join(f"{p.x:.6f} {p.y:.6f}" for p in m.leave_points)
            w.writerow(
                [
                    r.algorithm.value,
                    m.outcome.value,
                    f"{m.path_length:.6f}",
                    f"{m.duration:.6f}",
                    f"{m.smoothness:.6f}",
                    leaves,
                ]
            )
        return buf.getvalue()


def _run_one(args):
    env, algorithm, params = args
    return run(env, algorithm, params)


def compare(env: Environment, algorithms, params: SimParams = SimParams(), workers: int = 1) -> ComparisonTable:
    """Run every algorithm on the same environment; rows keep the input order."""
    algos = [Algorithm(a) for a in algorithms]
    if not algos:
        raise ValueError("compare needs at least one algorithm")
    jobs = [(env, a, params) for a in algos]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_run_one, jobs))
    else:
        traces = [_run_one(j) for j in jobs]
    rows = [ComparisonRow(a, metrics(tr, env), tr) for a, tr in zip(algos, traces)]
    return ComparisonTable(env.name, rows)


# --- trace files -------------------------------------------------------------

TRACE_HEADER = ["t", "x", "y", "heading", "behavior", "d_goal"]


def trace_to_csv(trace: TrajectoryTrace) -> str:
    lines = [",".join(TRACE_HEADER)]
    for s in trace.samples:
        p = s.pose.position
        lines.append(
            f"{s.t:.6f},{p.x:.6f},{p.y:.6f},{s.pose.heading:.6f},{s.behavior.value},{s.d_goal:.6f}"
        )
    return "\n".join(lines) + "\n"


def write_trace(trace: TrajectoryTrace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(trace_to_csv(trace))


class TraceFormatError(ValueError):
    pass


def read_trace(text: str, outcome: Outcome = Outcome.GoalReached) -> TrajectoryTrace:
    """Parse a trace CSV back into samples (outcome is not stored in the file)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise TraceFormatError("empty trace file") from None
    if header != TRACE_HEADER:
        raise TraceFormatError(f"bad header {header!r}")
    samples = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 6:
            raise TraceFormatError(f"line {lineno}: expected 6 fields")
        try:
            t, x, y, h = (float(v) for v in row[:4])
            behavior = Behavior(row[4])
            d_goal = float(row[5])
        except ValueError as exc:
            raise TraceFormatError(f"line {lineno}: {exc}") from None
        samples.append(Sample(t, Pose(Point2(x, y), h), behavior, d_goal))
    if not samples:
        raise TraceFormatError("trace has no samples")
    return TrajectoryTrace(samples, outcome)
