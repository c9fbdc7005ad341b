"""Command-line front end: ``bugnav run | compare | render | scenarios``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .nav import Algorithm
from .render import render_svg
from .sense import SensorConfig
from .sim import (
    Outcome,
    SimParams,
    TraceFormatError,
    compare,
    metrics,
    read_trace,
    run,
    trace_to_csv,
)
from .world import ScenarioError, builtin_names, get_builtin, load_scenario

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNREACHABLE = 2
EXIT_INCOMPLETE = 3

OUTCOME_EXIT = {
    Outcome.GoalReached: EXIT_OK,
    Outcome.Unreachable: EXIT_UNREACHABLE,
    Outcome.StepBudgetExceeded: EXIT_INCOMPLETE,
    Outcome.Stuck: EXIT_INCOMPLETE,
}

MAX_STEPS_ENV = "BUGNAV_MAX_STEPS"
BUILTIN_PREFIX = "builtin:"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage, but 2 means Unreachable here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def exit_code(outcome: Outcome) -> int:
    return OUTCOME_EXIT[outcome]


def resolve_scenario(ref: str):
    if ref.startswith(BUILTIN_PREFIX):
        name = ref[len(BUILTIN_PREFIX):]
        try:
            return get_builtin(name)
        except KeyError:
            raise UsageError(f"unknown builtin scenario {name!r}; available: {', '.join(builtin_names())}") from None
    try:
        text = Path(ref).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read scenario {ref}: {exc.strerror or exc}") from None
    try:
        return load_scenario(text)
    except ScenarioError as exc:
        raise UsageError(f"bad scenario {ref}: {exc}") from None


def _parse_algos(names: Sequence[str]) -> list:
    try:
        return [Algorithm.parse(n) for n in names]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _default_max_steps() -> int:
    raw = os.environ.get(MAX_STEPS_ENV)
    if raw is None or raw.strip() == "":
        return 1_000_000
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{MAX_STEPS_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"{MAX_STEPS_ENV} must be >= 1")
    return value


def sim_params(args) -> SimParams:
    max_steps = args.max_steps if args.max_steps is not None else _default_max_steps()
    try:
        defaults = SensorConfig()
        sensor = SensorConfig(
            max_range=args.sensor_range if args.sensor_range is not None else defaults.max_range,
            beam_count=args.beams if args.beams is not None else defaults.beam_count,
            fov=args.fov if args.fov is not None else defaults.fov,
        )
        extra = {} if args.clearance is None else {"clearance": args.clearance}
        return SimParams(
            step_size=args.step,
            speed=args.speed,
            max_steps=max_steps,
            sensor=sensor,
            distbug_leave=args.distbug_leave,
            visibility_limit=args.visibility_limit,
            **extra,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write(path: Optional[str], text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from None


def _summary_line(m) -> str:
    return f"outcome={m.outcome.value} length={m.path_length:.6f} duration={m.duration:.6f}"


def cmd_run(args) -> int:
    algos = _parse_algos(args.algo or [])
    if len(algos) != 1:
        raise UsageError(f"run takes exactly one --algo, got {len(algos)}")
    env = resolve_scenario(args.scenario)
    params = sim_params(args)
    trace = run(env, algos[0], params)
    m = metrics(trace, env)
    print(_summary_line(m))
    print(f"scenario:    {env.name}")
    print(f"algorithm:   {algos[0].value}")
    print(f"steps:       {trace.steps}")
    print(f"path length: {m.path_length:.3f} ft")
    print(f"duration:    {m.duration:.3f} s")
    print(f"smoothness:  {m.smoothness:.3f} rad")
    leaves = ", ".join(f"({p.x:.3f}, {p.y:.3f})" for p in m.leave_points) or "none"
    print(f"leave points: {leaves}")
    if args.out:
        _write(args.out, trace_to_csv(trace))
    if args.svg:
        _write(args.svg, render_svg(env, [trace]))
    return exit_code(m.outcome)


def cmd_compare(args) -> int:
    names = [n for chunk in (args.algos or []) for n in chunk.split(",") if n.strip()]
    algos = _parse_algos(names)
    if len(algos) < 2:
        raise UsageError(f"compare needs at least two algorithms, got {len(algos)}")
    env = resolve_scenario(args.scenario)
    params = sim_params(args)
    table = compare(env, algos, params, workers=args.workers)
    _write(args.out, table.to_csv())
    if args.svg:
        _write(args.svg, render_svg(env, [r.trace for r in table]))
    # worst row wins: incomplete over unreachable over success
    return max(exit_code(r.metrics.outcome) for r in table)


def cmd_render(args) -> int:
    env = resolve_scenario(args.scenario)
    traces, labels = [], []
    for path in args.traces:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read trace {path}: {exc.strerror or exc}") from None
        try:
            traces.append(read_trace(text))
        except TraceFormatError as exc:
            raise UsageError(f"bad trace {path}: {exc}") from None
        labels.append(Path(path).stem)
    _write(args.out, render_svg(env, traces, labels))
    return EXIT_OK


def cmd_scenarios(args) -> int:
    for name in builtin_names():
        print(name)
    return EXIT_OK


def _add_sim_flags(p):
    p.add_argument("--scenario", required=True, help="scenario JSON path or builtin:NAME")
    p.add_argument("--out", help="output CSV path (default: none for run, stdout for compare)")
    p.add_argument("--svg", help="also write an SVG figure here")
    p.add_argument("--step", type=float, default=0.05, help="step size in feet")
    p.add_argument("--speed", type=float, default=None, help="speed in ft/s (default: scenario speed)")
    p.add_argument("--sensor-range", type=float, default=None)
    p.add_argument("--beams", type=int, default=None)
    p.add_argument("--fov", type=float, default=None, help="field of view in radians")
    p.add_argument("--clearance", type=float, default=None, help="contact threshold in feet")
    p.add_argument("--max-steps", type=int, default=None, help=f"step budget (default: ${MAX_STEPS_ENV} or 1000000)")
    p.add_argument("--distbug-leave", choices=("guarded", "verbatim"), default="guarded")
    p.add_argument("--visibility-limit", choices=("sensor", "unlimited"), default="unlimited")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bugnav", description="Bug-family navigation simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one algorithm on a scenario")
    _add_sim_flags(p)
    p.add_argument("--algo", action="append", help="algorithm: bug1, bug2, distbug or iba")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run several algorithms and tabulate metrics")
    _add_sim_flags(p)
    p.add_argument("--algos", action="append", required=True, help="comma-separated algorithm names")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("render", help="draw trace CSVs over a scenario as SVG")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True, help="SVG output path")
    p.add_argument("traces", nargs="+", help="trace CSV files")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("scenarios", help="list builtin scenarios")
    p.set_defaults(func=cmd_scenarios)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bugnav: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
