import math

import pytest

from bugnav import sim as simmod
from bugnav.geom import Point2, Polygon, dist
from bugnav.nav import Algorithm, Behavior, MotionCommand, Pose
from bugnav.sense import SensorConfig
from bugnav.sim import (
    EmptyTrace,
    InternalCollisionFault,
    Outcome,
    Sample,
    SimParams,
    TraceFormatError,
    TrajectoryTrace,
    compare,
    metrics,
    read_trace,
    run,
    trace_to_csv,
)
from bugnav.world import Bounds, Environment, builtin_scenarios, get_builtin, random_environment

import oracles

ALGOS = list(Algorithm)
STEP = 0.05


@pytest.fixture(scope="module")
def block_table():
    return compare(get_builtin("block"), ALGOS)


def test_open_field_baseline():
    tr = run(get_builtin("open-field"), Algorithm.IBA)
    m = metrics(tr)
    assert tr.outcome is Outcome.GoalReached
    assert m.duration == pytest.approx(120.0, abs=0.1)
    assert m.path_length == pytest.approx(172.0, abs=0.05)
    assert m.smoothness == pytest.approx(0.0, abs=1e-12)


def test_metrics_single_sample():
    tr = TrajectoryTrace([Sample(0.0, Pose(Point2(1, 1)), Behavior.MoveToGoal, 3.0)], Outcome.GoalReached)
    m = metrics(tr)
    assert (m.path_length, m.duration, m.smoothness) == (0.0, 0.0, 0.0)


def test_metrics_empty():
    with pytest.raises(EmptyTrace):
        metrics(TrajectoryTrace([], Outcome.Stuck))


def test_metrics_hand_polyline():
    pts = [(0, 0), (4, 0), (4, 1), (6, 1), (10, 0)]
    samples = []
    t = 0.0
    for i, (x, y) in enumerate(pts):
        if i:
            px, py = pts[i - 1]
            t += math.hypot(x - px, y - py)
            heading = math.atan2(y - py, x - px)
        else:
            heading = 0.0
        samples.append(Sample(t, Pose(Point2(x, y), heading), Behavior.MoveToGoal, 0.0))
    m = metrics(TrajectoryTrace(samples, Outcome.GoalReached))
    assert m.path_length == pytest.approx(7 + math.sqrt(17))
    assert m.smoothness == pytest.approx(math.pi + math.atan(0.25))


def test_block_iba_matches_polyline_oracle(block_table):
    m = block_table.row("iba").metrics
    ref = oracles.polyline_length([Point2(0, 0), Point2(4, 0), Point2(4, 1), Point2(6, 1), Point2(10, 0)])
    assert ref == pytest.approx(11.123, abs=1e-3)
    assert m.path_length == pytest.approx(ref, abs=0.3)
    # three polyline turns; rounding at the standoff adds a little
    assert m.smoothness == pytest.approx(math.pi + math.atan(0.25), abs=0.5)
    [leave] = m.leave_points
    assert dist(leave, Point2(6, 1)) <= 2 * STEP


def test_compare_rows_ordered_and_dominance(block_table):
    assert [r.algorithm for r in block_table] == ALGOS
    ln = {r.algorithm.value: r.metrics.path_length for r in block_table}
    du = {r.algorithm.value: r.metrics.duration for r in block_table}
    assert ln["iba"] < ln["distbug"]
    assert du["iba"] < du["distbug"]
    assert all(r.metrics.outcome is Outcome.GoalReached for r in block_table)


def test_compare_open_field_rows_identical():
    table = compare(get_builtin("open-field"), ALGOS)
    lengths = [r.metrics.path_length for r in table]
    assert max(lengths) - min(lengths) <= STEP


def test_compare_parallel_matches_serial():
    env = get_builtin("two-blocks")
    a = compare(env, ["iba", "bug2"]).to_csv()
    b = compare(env, ["iba", "bug2"], workers=2).to_csv()
    assert a == b


def test_compare_needs_an_algorithm():
    with pytest.raises(ValueError):
        compare(get_builtin("block"), [])


def test_comparison_csv_header(block_table):
    lines = block_table.to_csv().splitlines()
    assert lines[0] == "algo,outcome,path_length_ft,duration_s,smoothness_rad,leave_points"
    assert len(lines) == 5


def _traces():
    envs = builtin_scenarios() + [random_environment(s) for s in (3, 11, 27)]
    for env in envs:
        for a in ALGOS:
            yield env, run(env, a)


@pytest.fixture(scope="module")
def many_traces():
    return list(_traces())


def test_time_distance_consistency(many_traces):
    for env, tr in many_traces:
        m = metrics(tr)
        assert abs(m.duration - m.path_length / tr.speed) <= STEP / tr.speed
        for a, b in zip(tr.samples, tr.samples[1:]):
            step = dist(a.pose.position, b.pose.position)
            assert 0 < step <= STEP + 1e-12
            assert b.t > a.t
            assert b.t - a.t == pytest.approx(step / tr.speed, rel=1e-9, abs=1e-12)
        for s in tr.samples:
            assert abs(s.d_goal - dist(s.pose.position, env.goal)) <= 1e-9


def test_no_sample_inside_obstacles(many_traces):
    for env, tr in many_traces:
        for s in tr.samples:
            assert not any(oracles.inside_closed(s.pose.position, o) for o in env.obstacles if _convex(o))
            assert env.inside_obstacle(s.pose.position) is None


def _convex(poly):
    vs = poly.vertices
    n = len(vs)
    for i in range(n):
        a, b, c = vs[i], vs[(i + 1) % n], vs[(i + 2) % n]
        if (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x) < 0:
            return False
    return True


def test_goal_reached_on_reachable_builtins(many_traces):
    for env, tr in many_traces:
        expected = Outcome.Unreachable if env.name == "enclosed-goal" else Outcome.GoalReached
        assert tr.outcome is expected, (env.name, tr.algorithm)
        if expected is Outcome.GoalReached:
            assert metrics(tr).path_length >= dist(env.start, env.goal) - STEP / 2


def test_rerun_bit_identical():
    env = get_builtin("two-blocks")
    a, b = run(env, "iba"), run(env, "iba")
    assert a.samples == b.samples
    assert trace_to_csv(a) == trace_to_csv(b)


def test_step_budget():
    tr = run(get_builtin("block"), "bug1", SimParams(max_steps=10))
    assert tr.outcome is Outcome.StepBudgetExceeded
    assert len(tr.samples) == 11


def test_verbatim_distbug_livelocks():
    tr = run(get_builtin("block"), "distbug", SimParams(distbug_leave="verbatim"))
    assert tr.outcome in (Outcome.Stuck, Outcome.StepBudgetExceeded)


def test_collision_is_a_hard_fault(monkeypatch):
    # a navigator that ignores the obstacle must trip the simulator check
    def reckless(state, pose, scan, env, params):
        return state, MotionCommand(0.0, STEP)

    monkeypatch.setattr(simmod, "step", reckless)
    with pytest.raises(InternalCollisionFault):
        run(get_builtin("block"), "bug2")


def test_narrow_gap_between_blocks_is_safe():
    # two blocks closer than twice the standoff: the robot must go around, not through
    gap = 0.08
    lower = Polygon.rectangle(4, -2, 6, -gap / 2)
    upper = Polygon.rectangle(4, gap / 2, 6, 2)
    env = Environment("gap", Bounds(Point2(-3, -6), Point2(13, 6)), Point2(0, 0), Point2(10, 0), (lower, upper))
    for a in ALGOS:
        tr = run(env, a)
        assert tr.outcome is Outcome.GoalReached
        for s in tr.samples:
            assert env.inside_obstacle(s.pose.position) is None


def test_sim_params_validation():
    for bad in (dict(step_size=0), dict(max_steps=0), dict(speed=-1), dict(goal_tolerance=0.001)):
        with pytest.raises(ValueError):
            SimParams(**bad)


def test_custom_speed_scales_time():
    tr = run(get_builtin("open-field"), "bug1", SimParams(speed=2.0))
    assert tr.samples[-1].t == pytest.approx(86.0, abs=0.05)


def test_trace_csv_format_and_round_trip():
    tr = run(get_builtin("block"), "iba")
    text = trace_to_csv(tr)
    lines = text.split("\n")
    assert lines[0] == "t,x,y,heading,behavior,d_goal"
    assert text.endswith("\n") and "\r" not in text
    assert all(len(f.split(".")[1]) == 6 for f in lines[1].split(",") if "." in f)
    back = read_trace(text)
    assert len(back.samples) == len(tr.samples)
    assert trace_to_csv(back) == text
    got = [c for p in metrics(back).leave_points for c in p]
    want = [c for p in metrics(tr).leave_points for c in p]
    assert got == pytest.approx(want, abs=1e-6)


@pytest.mark.parametrize(
    "text",
    ["", "a,b\n1,2\n", "t,x,y,heading,behavior,d_goal\n", "t,x,y,heading,behavior,d_goal\n0,0,0,0,Flying,1\n"],
    ids=["empty", "header", "no-rows", "bad-behavior"],
)
def test_read_trace_rejects(text):
    with pytest.raises(TraceFormatError):
        read_trace(text)


def test_narrow_sensor_still_runs():
    params = SimParams(sensor=SensorConfig(max_range=5.0, beam_count=91, fov=2 * math.pi))
    assert run(get_builtin("block"), "iba", params).outcome is Outcome.GoalReached
