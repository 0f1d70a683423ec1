"""End-to-end runs: pick cycles with a policy, replay them slot by slot, report totals.

Policies always plan on expected ages.  ``mode`` only decides how the chosen
cycles are scored: ``expected`` mixes fresh and stale ages by the success
probability, ``sampled`` draws each sensing outcome from the seeded RNG.
"""
from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import scheduler
from .aoi import EXPECTED, SAMPLED, AoiLedger, UpdateRecord, replay, total_aoi, trace_rows
from .channel import channel_grid
from .cycle import CycleSolution, check_cycle, optimize_cycle
from .scenario import Scenario, make_scenario
from .sensing import InfeasibleError, min_repetitions

log = logging.getLogger(__name__)

POLICIES = ("dp", "greedy", "random")
EXPERIMENT_KINDS = ("scheduler_comparison", "time_ratio_sweep", "channel_table", "single_cycle")
# later entries win when several events land on the same (slot, task)
_EVENT_RANK = {"sense_start": 1, "sense_end": 2, "tx_start": 3, "update_done": 4}


@dataclass
class RunResult:
    policy: str
    digest: str
    mode: str
    seed: int
    total_aoi: float
    updates: dict
    sensing_flight_slots: int
    sensing_slots: int
    tx_flight_slots: int
    tx_slots: int
    idle_slots: int
    successes: int | None = None

    @property
    def busy_slots(self) -> int:
        return self.sensing_flight_slots + self.sensing_slots + self.tx_flight_slots + self.tx_slots

    def row(self) -> dict:
        out = asdict(self)
        out.pop("updates")
        for tid, n in sorted(self.updates.items()):
            out[f"updates_task{tid}"] = n
        return out


@dataclass
class Run:
    result: RunResult
    cycles: list
    ledger: AoiLedger
    events: dict = field(repr=False)

    def trace(self) -> list[tuple]:
        return trace_rows(self.ledger, self.events)


def _streams(seed: int):
    """Independent generators for the policy's choices and for sensing outcomes."""
    a, b = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(a), np.random.default_rng(b)


def choose_cycles(sc: Scenario, policy: str, seed: int = 0, oracle=None) -> list[CycleSolution]:
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    oracle = oracle or scheduler.cycle_oracle(sc)
    if policy == "dp":
        return scheduler.dp_policy(sc, oracle)
    if policy == "greedy":
        return scheduler.greedy_schedule(sc, oracle)
    return scheduler.random_schedule(sc, oracle, _streams(seed)[0])


def records(cycles) -> list[UpdateRecord]:
    return [UpdateRecord(c.task, c.F, c.S, c.sense_end, c.Tx_start, c.completion, c.omega, c.success_prob)
            for c in cycles]


def cycle_events(cycles) -> dict:
    events: dict = {}

    def put(t, task, name):
        if _EVENT_RANK[name] >= _EVENT_RANK.get(events.get((t, task)), 0):
            events[(t, task)] = name

    for c in cycles:
        put(c.S, c.task, "sense_start")
        put(c.sense_end, c.task, "sense_end")
        put(c.Tx_start, c.task, "tx_start")
        put(c.completion, c.task, "update_done")
    return events


def check_feasible(sc: Scenario, oracle=None) -> None:
    """Raise InfeasibleError up front when no task admits a single cycle."""
    if not sc.tasks:
        return
    oracle = oracle or scheduler.cycle_oracle(sc)
    start = scheduler.canonical_start(sc)
    errors = []
    for task in sc.tasks:
        try:
            oracle(task.id, start, 0, 0.0)
            return
        except InfeasibleError as exc:
            errors.append(f"task {task.id}: {exc}")
    raise InfeasibleError("no feasible cycle for any task; " + "; ".join(errors))


def evaluate(sc: Scenario, cycles, policy: str, mode: str = EXPECTED, seed: int = 0,
             rng: np.random.Generator | None = None) -> Run:
    """Replay chosen cycles through the exact ledger and tally slot usage."""
    if mode not in (EXPECTED, SAMPLED):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == SAMPLED and rng is None:
        rng = _streams(seed)[1]
    ledger = replay(len(sc.tasks), sc.T, records(cycles), mode, rng)
    t0 = sc.sensing.t0
    updates = {t.id: 0 for t in sc.tasks}
    for c in cycles:
        updates[c.task] += 1
    busy = sum(c.span for c in cycles)
    successes = None
    if mode == SAMPLED:
        successes = sum(1 for r in ledger.records if r.success)
    res = RunResult(policy=policy, digest=sc.digest(), mode=mode, seed=seed, total_aoi=total_aoi(ledger),
                    updates=updates,
                    sensing_flight_slots=sum(c.Ts_f for c in cycles),
                    sensing_slots=sum(c.omega * t0 for c in cycles),
                    tx_flight_slots=sum(c.Tx_start - c.sense_end for c in cycles),
                    tx_slots=sum(c.lam for c in cycles),
                    idle_slots=sc.T - busy, successes=successes)
    return Run(res, list(cycles), ledger, cycle_events(cycles))


def run_simulation(sc: Scenario, policy: str = "dp", mode: str = EXPECTED, seed: int = 0,
                   oracle=None, check: bool = True) -> Run:
    oracle = oracle or scheduler.cycle_oracle(sc)
    check_feasible(sc, oracle)
    cycles = choose_cycles(sc, policy, seed, oracle) if sc.tasks else []
    if check:
        prev = 0
        for c in cycles:
            if c.F < prev:
                raise AssertionError("overlapping cycles")
            check_cycle(c, sc)
            prev = c.completion
    return evaluate(sc, cycles, policy, mode, seed)


def sampled_total_aoi(sc: Scenario, cycles, seeds) -> np.ndarray:
    """Sampled-mode totals for a fixed cycle list, one per seed."""
    recs = records(cycles)
    return np.array([total_aoi(replay(len(sc.tasks), sc.T, recs, SAMPLED, _streams(s)[1])) for s in seeds])


# --------------------------------------------------------------------------- experiments

def _layout_scenario(sc: Scenario, T: int, layout: int) -> Scenario:
    world = sc.world.__class__(**{**sc.world.__dict__, "horizon_T": T})
    return make_scenario(world, sc.kinematics, sc.channel, sc.sensing, None, sc.experiment,
                         layout_seed=sc.world.rng_seed + layout)


def _comparison_point(args) -> list[dict]:
    sc, T, layout, policies, seeds = args
    scl = _layout_scenario(sc, T, layout)
    oracle = scheduler.cycle_oracle(scl)
    rows = []
    for policy in policies:
        for seed in (range(seeds) if policy == "random" else [0]):
            try:
                res = run_simulation(scl, policy, EXPECTED, seed, oracle, check=False).result
                row = {"T": T, "layout": layout, **res.row(), "status": "ok"}
            except InfeasibleError as exc:
                row = {"T": T, "layout": layout, "policy": policy, "seed": seed, "status": f"infeasible: {exc}"}
            rows.append(row)
    return rows


def scheduler_comparison(sc: Scenario, horizons, layouts: int, seeds: int, policies=POLICIES,
                         workers: int | None = None) -> list[dict]:
    jobs = [(sc, int(T), lay, tuple(policies), int(seeds)) for T in horizons for lay in range(layouts)]
    workers = workers if workers is not None else min(len(jobs), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_comparison_point, jobs))
    else:
        parts = [_comparison_point(j) for j in jobs]
    rows = [r for part in parts for r in part]
    rows.sort(key=lambda r: (r["T"], r["layout"], POLICIES.index(r["policy"]), r["seed"]))
    return rows


def time_ratio_point(sc: Scenario, task_id: int, p_th: float, snr_th: float) -> dict:
    """Cycle shape for one (p_th, gamma_th) pair from the canonical start."""
    s = sc.replace(sensing=sc.sensing.__class__(**{**sc.sensing.__dict__, "p_th": p_th}),
                   channel=sc.channel.__class__(**{**sc.channel.__dict__, "snr_threshold": snr_th}))
    start = scheduler.canonical_start(s)
    row = {"p_th": p_th, "snr_threshold": snr_th, "task": task_id}
    try:
        sol = optimize_cycle(start, s.task(task_id), s)
    except InfeasibleError as exc:
        return {**row, "status": f"infeasible: {exc}"}
    hover = np.asarray(sol.trajectory[sol.Ts_f])
    target = s.task(task_id).target_position
    p = math.exp(-s.sensing.xi * float(np.linalg.norm(hover - target)))
    return {**row, "Ts": sol.Ts, "Ts_f": sol.Ts_f, "omega": sol.omega,
            "min_repetitions": min_repetitions(p, p_th), "attempt_prob": p,
            "Tt": sol.Tt, "tx_flight": sol.Tx_start - sol.sense_end, "lambda": sol.lam,
            "ratio": sol.Ts / sol.Tt, "success_prob": sol.success_prob, "g_avg": sol.g_avg, "status": "ok"}


def time_ratio_sweep(sc: Scenario, task_id: int, p_th_values, snr_thresholds) -> list[dict]:
    return [time_ratio_point(sc, task_id, p, g) for g in snr_thresholds for p in p_th_values]


def channel_table(sc: Scenario, step: float = 10.0, extent: float = 100.0) -> list[dict]:
    kin = sc.kinematics
    xs = np.arange(-extent, extent + step / 2, step)
    zs = np.arange(kin.h_min, kin.h_max + step / 2, step)
    return channel_grid(xs, xs, zs, sc.channel)


def single_cycle(sc: Scenario, task_id: int, start=None, t: int = 0, age: float | None = None) -> CycleSolution:
    start = scheduler.canonical_start(sc) if start is None else tuple(start)
    return optimize_cycle(start, sc.task(task_id), sc, t, float(t if age is None else age))


def write_csv(path, rows: list[dict] | list[tuple], header=None) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            if rows and isinstance(rows[0], dict):
                cols = header or list(dict.fromkeys(k for r in rows for k in r))
                w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
                w.writeheader()
                w.writerows(rows)
            else:
                w = csv.writer(fh, lineterminator="\n")
                if header:
                    w.writerow(header)
                w.writerows(rows)
    except OSError as exc:
        raise OSError(f"{path}: {exc}") from exc
    return path


def run_experiment(sc: Scenario, out_dir=None, workers: int | None = None) -> Path:
    """Run the experiment described by ``sc.experiment`` and write its CSV."""
    spec = dict(sc.experiment)
    kind = spec.get("kind")
    if kind not in EXPERIMENT_KINDS:
        raise ValueError(f"experiment.kind must be one of {EXPERIMENT_KINDS}, got {kind!r}")
    out_dir = Path(out_dir or ".")
    out = out_dir / spec.get("output", f"{kind}.csv")
    task = int(spec.get("task", 1))
    if kind == "scheduler_comparison":
        rows = scheduler_comparison(sc, spec.get("horizons", [sc.T]), int(spec.get("layouts", 1)),
                                    int(spec.get("seeds", 1)), spec.get("policies", list(POLICIES)), workers)
    elif kind == "time_ratio_sweep":
        rows = time_ratio_sweep(sc, task, spec.get("p_th_values", [sc.sensing.p_th]),
                                spec.get("snr_thresholds", [sc.channel.snr_threshold]))
    elif kind == "channel_table":
        rows = channel_table(sc, float(spec.get("grid_step_m", 10.0)), float(spec.get("grid_extent_m", 100.0)))
    else:
        rows = [single_cycle(sc, task).to_dict(with_trajectory=False, extras=True)]
    log.info("%s: %d rows -> %s", kind, len(rows), out)
    return write_csv(out, rows)
