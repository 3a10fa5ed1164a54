"""Command-line entry point.

    uavhunt run <scenario> [--seed N] [--strategy S] [--duration T]
                [--trace PATH] [--metrics PATH] [--events PATH] [--plot PATH] [--report DIR]
    uavhunt sweep <scenario> --seeds A..B [--strategy S ...] [--out CSV] [--plot PNG] [--report DIR]
    uavhunt verify-fsm <balloon|chase>
    uavhunt list

``<scenario>`` is a YAML file or the name of a bundled scenario.  ``run``
exits with status 1 when the vehicle left the geofence; ``verify-fsm`` exits
with status 1 when the graph has error defects.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .mission import balloon_graph, chase_graph, verify
from .sim import bundled_scenarios, load_scenario, run, sweep, sweep_csv

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

GRAPHS = {"balloon": balloon_graph, "chase": chase_graph}


def parse_seeds(text: str) -> list[int]:
    """``"3"`` -> [3]; ``"0..4"`` -> [0, 1, 2, 3, 4] (inclusive); ``"1,5,9"`` -> [1, 5, 9]."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo_i, hi_i = int(lo), int(hi)
        if hi_i < lo_i:
            raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
        return list(range(lo_i, hi_i + 1))
    try:
        return [int(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def _scenario(args):
    sc = load_scenario(args.scenario)
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "duration", None) is not None:
        changes["duration"] = args.duration
    if isinstance(getattr(args, "strategy", None), str):
        changes["strategy"] = args.strategy
    return sc.with_(**changes) if changes else sc


def cmd_run(args) -> int:
    from . import plotting

    sc = _scenario(args)
    trace, metrics = run(sc)
    report = Path(args.report) if args.report else None
    trace_path = args.trace or (report / f"{sc.name}_trace.csv" if report else None)
    metrics_path = args.metrics or (report / f"{sc.name}_metrics.json" if report else None)
    events_path = args.events or (report / f"{sc.name}_events.log" if report else None)
    plot_path = args.plot or (report / f"{sc.name}_flight.png" if report else None)
    for path in (trace_path, metrics_path, events_path):
        if path:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
    if trace_path:
        trace.write_csv(trace_path)
    if events_path:
        Path(events_path).write_text(trace.event_log(), encoding="utf-8")
    if metrics_path:
        Path(metrics_path).write_text(metrics.to_json(), encoding="utf-8")
    else:
        sys.stdout.write(metrics.to_json())
    if plot_path:
        plotting.save(plotting.flight_figure(trace, sc, metrics), plot_path)
    if metrics.violations:
        print(f"geofence violated on {metrics.violations} ticks", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_sweep(args) -> int:
    from . import plotting

    sc = load_scenario(args.scenario)
    strategies = args.strategy or [None]
    rows = sweep(sc, args.seeds, strategies)
    text = sweep_csv(rows)
    report = Path(args.report) if args.report else None
    out = args.out or (report / f"{sc.name}_sweep.csv" if report else None)
    plot_path = args.plot or (report / f"{sc.name}_sweep.png" if report else None)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if plot_path:
        plotting.save(plotting.sweep_figure(rows), plot_path)
    for strat in sorted({r["strategy"] for r in rows}):
        sel = [r for r in rows if r["strategy"] == strat]
        mean_tries = sum(r["tries_per_balloon"] for r in sel) / len(sel)
        warns = sum(r["geofence_warnings"] for r in sel)
        print(f"{strat}: runs={len(sel)} mean tries/balloon={mean_tries:.3f} geofence warnings={warns}",
              file=sys.stderr)
    return EXIT_VIOLATION if any(r["violations"] for r in rows) else EXIT_OK


def cmd_verify(args) -> int:
    defects = verify(GRAPHS[args.mission]())
    for d in defects:
        print(f"{d.severity}: {d.kind} in {d.state}: {d.detail}")
    errors = [d for d in defects if d.severity == "error"]
    print(f"{args.mission}: {len(errors)} errors, {len(defects) - len(errors)} warnings")
    return EXIT_VIOLATION if errors else EXIT_OK


def cmd_list(args) -> int:
    for name, path in sorted(bundled_scenarios().items()):
        print(f"{name}\t{path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uavhunt", description="Balloon-hunt and target-chase arena simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario")
    p.add_argument("scenario", help="YAML file or bundled scenario name")
    p.add_argument("--seed", type=int)
    p.add_argument("--strategy", choices=("star", "direct"))
    p.add_argument("--duration", type=float, help="simulated time limit in seconds")
    p.add_argument("--trace", help="write the per-tick trace CSV here")
    p.add_argument("--metrics", help="write metrics JSON here instead of stdout")
    p.add_argument("--events", help="write the monitor event log here")
    p.add_argument("--plot", help="render the flight figure to this image file")
    p.add_argument("--report", help="directory for trace, metrics, events and figure")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a scenario over a range of seeds")
    p.add_argument("scenario")
    p.add_argument("--seeds", type=parse_seeds, required=True, help="A..B (inclusive) or a comma list")
    p.add_argument("--strategy", action="append", choices=("star", "direct"),
                   help="repeat to compare strategies; default is the scenario's own")
    p.add_argument("--out", help="write the sweep CSV here instead of stdout")
    p.add_argument("--plot", help="render the sweep figure to this image file")
    p.add_argument("--report", help="directory for the sweep CSV and figure")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify-fsm", help="check a mission state graph before execution")
    p.add_argument("mission", choices=sorted(GRAPHS))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("list", help="list bundled scenarios")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
