"""Command-line entry points.

Subcommands: thresholds, simulate, navigate, experiment, serve, bench.
Exit codes: 0 success, 1 runtime failure (divergence, unreachable goal,
aborted navigation), 2 usage or file-format errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import MillibotError, ScenarioError
from .magnetics import required_field
from .scenario import BUILTIN_SCENARIOS, builtin_scenario, load_scenario, parse_scenario

DEFAULT_PORT = int(os.environ.get("MILLIBOTS_PORT", "8765"))


def cmd_thresholds(args) -> int:
    """Print the named reconfiguration field thresholds (and any custom gaps)."""
    rows = [
        ("chain_to_gripper", 3.2, required_field("chain_to_gripper")),
        ("chain_to_square", 3.0, required_field("chain_to_square")),
        ("disassembly", 1.6, required_field("disassembly")),
    ]
    for d_mm in args.d or []:
        if d_mm <= 0:
            print(f"error: separation must be positive, got {d_mm}", file=sys.stderr)
            return 2
        rows.append((f"custom d={d_mm:g} mm", d_mm, required_field(d_mm * 1e-3)))
    print(f"{'case':<22} {'separation':>12} {'B_required':>12}")
    for name, d_mm, b in rows:
        print(f"{name:<22} {d_mm:>9.2f} mm {b * 1e3:>9.2f} mT")
    return 0


def _load(args) -> "Scenario":
    if args.scenario in BUILTIN_SCENARIOS:
        return parse_scenario(builtin_scenario(args.scenario), name=args.scenario)
    return load_scenario(args.scenario)


def cmd_simulate(args) -> int:
    from .sim import Engine
    from .trace import write_trace

    try:
        scenario = _load(args)
    except (ScenarioError, OSError) as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        scenario.sim.seed = args.seed
    world = scenario.make_world()
    coils = scenario.make_coils()
    engine = Engine(world, scenario.sim, coils)
    duration = args.duration if args.duration is not None else scenario.duration
    partial = None
    try:
        trajectory, events = engine.run_sequence(
            scenario.make_commands(coils), duration=duration,
            target_label=scenario.target,
        )
        status = 0
    except MillibotError as exc:
        print(f"simulation diverged: {exc}", file=sys.stderr)
        trajectory, events = [engine.snapshot()], []
        status = 1
        partial = str(exc)
    if args.trace:
        write_trace(
            args.trace, trajectory, events, scenario=scenario.name,
            seed=scenario.sim.seed, sample_dt=scenario.sim.sample_dt,
            backend=_kernels.BACKEND,
        )
    for e in events:
        print(f"t={e.time:8.3f}s  {e.kind:<26} {e.participants}")
    if partial:
        print(f"partial trace written after divergence: {partial}", file=sys.stderr)
    return status


def cmd_navigate(args) -> int:
    from .control import NavParams, SimPlant, navigate
    from .errors import InvalidEndpointError, UnreachableGoalError
    from .planning import build_grid, plan

    try:
        scenario = _load(args)
    except (ScenarioError, OSError) as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    nav = scenario.navigation
    if nav is None:
        print("scenario has no navigation section", file=sys.stderr)
        return 2
    if args.seed is not None:
        scenario.sim.seed = args.seed
    if args.stall_probability is not None:
        scenario.sim.stall_probability = args.stall_probability
    world = scenario.make_world()
    module = world.modules[0]

    grid = build_grid(scenario.obstacles, resolution=nav["resolution"],
                      inflation=nav["inflation"])
    try:
        nav_plan = plan(grid, grid.cell_of(module.pos), grid.cell_of(nav["goal"]))
    except (InvalidEndpointError, UnreachableGoalError) as exc:
        print(f"planning failed: {exc}", file=sys.stderr)
        return 1
    plant = SimPlant(world, scenario.sim, obs_sigma=nav["obs_sigma"])
    params = NavParams(tolerance=nav["tolerance"], r_max=nav["r_max"],
                       delta_i=nav["delta_i"])
    result = navigate(nav_plan, plant, params)
    true_error = float(np.linalg.norm(plant.true_position() - np.asarray(nav["goal"])))

    print(f"reached: {result.reached}")
    print(f"cycles: {result.cycles} (plan {len(nav_plan.waypoints)} waypoints, "
          f"cost {nav_plan.cost:.1f})")
    print(f"final error: {true_error * 1e3:.3f} mm")
    if result.aborted:
        print(f"aborted: {result.aborted} at waypoint {result.abort_waypoint}")
    if args.log:
        log = {
            "reached": result.reached,
            "aborted": result.aborted,
            "abort_waypoint": result.abort_waypoint,
            "cycles": result.cycles,
            "retries": {str(k): v for k, v in sorted(result.retries.items())},
            "final_error_mm": true_error * 1e3,
            "plan_cost": nav_plan.cost,
            "trajectory_mm": [[p[0] * 1e3, p[1] * 1e3] for p in result.trajectory],
            "events": [e.to_dict() for e in result.events],
        }
        Path(args.log).write_text(json.dumps(log, sort_keys=True, indent=1))
    return 0 if result.reached else 1


def cmd_experiment(args) -> int:
    from .experiments import records_to_jsonl, run_experiment, summary_table

    if args.spec:
        try:
            spec = json.loads(Path(args.spec).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"spec error: {exc}", file=sys.stderr)
            return 2
    else:
        spec = {"scenario": args.scenario_name, "trials": args.trials,
                "seed": args.seed or 0}
    try:
        summary, records = run_experiment(spec)
    except ScenarioError as exc:
        print(f"experiment error: {exc}", file=sys.stderr)
        return 2
    print(summary_table(summary))
    if args.records:
        Path(args.records).write_text(records_to_jsonl(records))
    if args.summary:
        Path(args.summary).write_text(json.dumps(summary.to_dict(), sort_keys=True,
                                                 indent=1))
    if args.csv:
        _write_csv(args.csv, summary, records)
    return 0


def _write_csv(prefix: str, summary, records) -> None:
    """Plot-data export: condition bars and per-trial scatter."""
    bars = ["condition,n,mean,std,success_rate"]
    for c in summary.conditions:
        bars.append(f"{c.condition},{c.n},{c.mean},{c.std},{c.success_rate}")
    Path(f"{prefix}_bars.csv").write_text("\n".join(bars) + "\n")
    scatter = ["condition,seed,separation_mm,value,success"]
    for r in records:
        value = r.assembly_time_s if r.assembly_time_s is not None else r.euclidean_mm
        scatter.append(
            f"{r.condition},{r.seed},{r.separation_mm},{value},{int(r.success)}"
        )
    Path(f"{prefix}_scatter.csv").write_text("\n".join(scatter) + "\n")


def cmd_serve(args) -> int:
    import asyncio

    from .server import serve

    try:
        scenario = _load(args)
    except (ScenarioError, OSError) as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    try:
        asyncio.run(serve(scenario, host=args.host, port=args.port,
                          speedup=args.speedup))
    except KeyboardInterrupt:
        pass
    return 0


def cmd_bench(args) -> int:
    from .benchmarks import run_benchmark

    run_benchmark(steps=args.steps)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="millibots",
        description="Magnetic millirobot simulator and control stack",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thresholds", help="reconfiguration field thresholds")
    p.add_argument("--d", type=float, action="append",
                   help="extra magnet separation in mm (repeatable)")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("simulate", help="run a scenario's field sequence")
    p.add_argument("scenario", help=f"path or builtin: {', '.join(BUILTIN_SCENARIOS)}")
    p.add_argument("--trace", help="trace output path")
    p.add_argument("--seed", type=int)
    p.add_argument("--duration", type=float, help="override duration (s)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("navigate", help="closed-loop maze navigation")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int)
    p.add_argument("--stall-probability", type=float, dest="stall_probability")
    p.add_argument("--log", help="NavResult log output path")
    p.set_defaults(func=cmd_navigate)

    p = sub.add_parser("experiment", help="batch experiment runner")
    p.add_argument("--spec", help="experiment spec JSON path")
    p.add_argument("--scenario", dest="scenario_name",
                   choices=["gait", "assembly", "reconfiguration"])
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int)
    p.add_argument("--records", help="TrialRecord JSONL output")
    p.add_argument("--summary", help="summary JSON output")
    p.add_argument("--csv", help="plot-data CSV prefix")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("serve", help="streaming wire-protocol server")
    p.add_argument("scenario")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.add_argument("--speedup", type=float, default=1.0)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("bench", help="compare step-kernel backends")
    p.add_argument("--steps", type=int, default=20000)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "experiment" and not args.spec and not args.scenario_name:
        print("experiment needs --spec or --scenario", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
