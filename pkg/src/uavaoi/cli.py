"""Command-line entry point ``aoi-uav-sim``.

Exit status: 0 on success, 2 for invalid input, 3 when the scenario admits no
feasible cycle.  ``UAVAOI_LOG`` sets the log level (default WARNING).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from . import scheduler, simulate
from .cycle import optimize_cycle
from .scenario import ScenarioError, load_scenario
from .sensing import InfeasibleError

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE = 0, 2, 3
TRACE_HEADER = ["slot", "task_id", "aoi", "event"]
CHANNEL_HEADER = ["x", "y", "z", "pl_db", "pr_los", "snr_db", "rate_bps"]


def _triple(text: str) -> tuple[float, float, float]:
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return tuple(parts)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="aoi-uav-sim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--scenario", required=True, type=Path, help="scenario JSON file")
        sp.add_argument("--out", type=Path, default=None, help="output directory")
        return sp

    sp = common("simulate", "run one policy and print the run summary as JSON")
    sp.add_argument("--policy", choices=simulate.POLICIES, default="dp")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--mode", choices=("expected", "sampled"), default="expected")

    sp = common("solve-cycle", "optimise one update cycle and print it as JSON")
    sp.add_argument("--task", type=int, required=True)
    sp.add_argument("--start", type=_triple, default=None, help="x,y,z in meters (default: above the BS)")
    sp.add_argument("--slot", type=int, default=0)
    sp.add_argument("--age", type=float, default=None, help="current age (default: the slot index)")

    sp = common("schedule", "print the executed schedule as JSON and write its AoI trace CSV")
    sp.add_argument("--policy", choices=simulate.POLICIES, default="dp")
    sp.add_argument("--seed", type=int, default=0)

    sp = common("experiment", "run the scenario's experiment block and write its CSV")
    sp.add_argument("--workers", type=int, default=None)

    sp = common("channel-table", "write path loss, LoS probability, SNR and rate over a grid as CSV")
    sp.add_argument("--step", type=float, default=None, help="grid step in meters")
    sp.add_argument("--extent", type=float, default=None, help="half-width of the grid in meters")
    return p


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=False)
    sys.stdout.write("\n")


def _write_rows(out: Path | None, name: str, rows, header) -> None:
    if out is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([r[h] for h in header] if isinstance(r, dict) else r)
    else:
        simulate.write_csv(out / name, rows, header)


def _run(args) -> int:
    sc = load_scenario(args.scenario)
    if args.command == "simulate":
        run = simulate.run_simulation(sc, args.policy, args.mode, args.seed)
        _emit(run.result.row())
        if args.out is not None:
            simulate.write_csv(args.out / f"trace_{args.policy}.csv", run.trace(), TRACE_HEADER)
    elif args.command == "solve-cycle":
        start = args.start if args.start is not None else scheduler.canonical_start(sc)
        age = float(args.slot if args.age is None else args.age)
        sol = optimize_cycle(start, sc.task(args.task), sc, args.slot, age)
        _emit(sol.to_dict())
        if args.out is not None:
            rows = [(sol.F + j, *map(float, p)) for j, p in enumerate(sol.trajectory)]
            simulate.write_csv(args.out / f"trajectory_task{args.task}.csv", rows, ["slot", "x", "y", "z"])
    elif args.command == "schedule":
        run = simulate.run_simulation(sc, args.policy, "expected", args.seed)
        sched = scheduler.schedule_from_cycles(run.cycles, sc.T)
        _emit({**sched.to_dict(), "policy": args.policy, "seed": args.seed,
               "total_aoi": run.result.total_aoi})
        out = args.out if args.out is not None else Path(".")
        simulate.write_csv(out / f"trace_{args.policy}.csv", run.trace(), TRACE_HEADER)
    elif args.command == "experiment":
        if not sc.experiment:
            raise ScenarioError("scenario has no experiment block")
        path = simulate.run_experiment(sc, args.out, args.workers)
        print(path)
    elif args.command == "channel-table":
        spec = sc.experiment
        step = args.step if args.step is not None else float(spec.get("grid_step_m", 10.0))
        extent = args.extent if args.extent is not None else float(spec.get("grid_extent_m", 100.0))
        if not step > 0 or not extent > 0:
            raise ScenarioError("--step and --extent must be > 0")
        _write_rows(args.out, "channel_table.csv", simulate.channel_table(sc, step, extent), CHANNEL_HEADER)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("UAVAOI_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ScenarioError, KeyError, ValueError, FileNotFoundError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BrokenPipeError:
        # downstream reader (e.g. ``head``) closed the pipe; silence the flush at exit
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
