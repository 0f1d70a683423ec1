"""Task scheduling over the horizon: DP over (task, start-slot) actions, greedy and random baselines.

Actions are scored with the AoI gain of the update they deliver.  For a fixed
reward table the DP solves the weighted interval problem exactly.  Because a
gain depends on when the same task was last updated, the planner evaluates
each action's gain against the history of the best schedule into its start
slot instead of a fixed table entry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .aoi import expected_total_aoi
from .cycle import CycleSolution, IterationConfig, optimize_cycle
from .scenario import Scenario
from .sensing import InfeasibleError

NEG_INF = -math.inf

CycleOracle = Callable[[int, tuple, int, float], CycleSolution]


@dataclass(frozen=True)
class Action:
    task: int
    start: int
    tau: int
    reward: float

    @property
    def end(self) -> int:
        return self.start + self.tau


@dataclass
class ActionTable:
    T: int
    task_ids: list
    tau: np.ndarray            # (N,) slots per cycle
    sense_offset: np.ndarray   # (N,) slots from cycle start to sensing end
    success_prob: np.ndarray   # (N,)
    rewards: np.ndarray        # (N, T+1); -inf where the action does not exist
    solutions: dict = field(default_factory=dict, repr=False)

    @property
    def N(self) -> int:
        return len(self.task_ids)

    def actions(self):
        """The action universe in (task, slot) lexicographic order."""
        for i, tid in enumerate(self.task_ids):
            for t in range(self.T + 1):
                r = self.rewards[i, t]
                if r != NEG_INF:
                    yield Action(tid, t, int(self.tau[i]), float(r))

    def size(self) -> int:
        return int(np.isfinite(self.rewards).sum())

    def contradictory(self, task: int, start: int) -> list[Action]:
        """Actions ordered before (task, start) whose slots overlap it."""
        i = self.task_ids.index(task)
        end = start + int(self.tau[i])
        out = []
        for a in self.actions():
            if (a.task, a.start) >= (task, start):
                break
            if a.start < end and start < a.end:
                out.append(a)
        return out

    def with_rewards(self, rewards: np.ndarray) -> "ActionTable":
        return ActionTable(self.T, self.task_ids, self.tau, self.sense_offset, self.success_prob,
                           rewards, self.solutions)


@dataclass
class Schedule:
    actions: list
    total_reward: float
    T: int

    def activity(self) -> np.ndarray:
        """Task id active in each slot 0..T-1, 0 when idle."""
        act = np.zeros(self.T, dtype=int)
        for a in self.actions:
            act[a.start:a.end] = a.task
        return act

    def check(self) -> None:
        prev_end = 0
        for a in sorted(self.actions, key=lambda a: a.start):
            if a.start < prev_end:
                raise AssertionError(f"overlapping actions at slot {a.start}")
            if a.end > self.T:
                raise AssertionError("action runs past the horizon")
            prev_end = a.end

    def to_dict(self) -> dict:
        return {"T": self.T, "total_reward": self.total_reward,
                "actions": [{"task": a.task, "start": a.start, "tau": a.tau, "reward": a.reward}
                            for a in self.actions]}


def canonical_start(sc: Scenario) -> tuple:
    """Where transmissions end up: straight above the BS, just outside the keep-out radius."""
    kin = sc.kinematics
    z = min(max(sc.channel.bs_height + sc.channel.min_bs_distance, kin.h_min), kin.h_max)
    return (0.0, 0.0, float(z))


def cycle_oracle(sc: Scenario, cfg: IterationConfig | None = None, backend=None) -> CycleOracle:
    """Memoised optimize_cycle keyed by (task, start, slot, age)."""
    cache: dict = {}

    def oracle(task_id: int, start, t: int, age: float) -> CycleSolution:
        key = (task_id, tuple(round(float(c), 9) for c in start), int(t), round(float(age), 9))
        if key not in cache:
            try:
                cache[key] = optimize_cycle(start, sc.task(task_id), sc, t, age, cfg, backend=backend)
            except InfeasibleError as exc:
                cache[key] = exc
        hit = cache[key]
        if isinstance(hit, Exception):
            raise hit
        return hit

    oracle.cache = cache  # type: ignore[attr-defined]
    return oracle


def steady_spacing(tau) -> float:
    """Gap between consecutive updates of a task when all tasks are served round-robin."""
    return float(np.sum(tau))


def _tabulate(sc: Scenario, oracle: CycleOracle, start, age: float):
    rows = {}
    for task in sc.tasks:
        try:
            rows[task.id] = oracle(task.id, start, 0, age)
        except InfeasibleError:
            continue
    return rows


def build_action_table(sc: Scenario, oracle: CycleOracle | None = None, start=None,
                       spacing_rounds: int = 4) -> ActionTable:
    """Tabulate one cycle per task and seed action rewards with the steady-spacing age.

    Cycle shape depends on the age the task carries when it is picked, so the
    tabulated cycles are solved at the round-robin spacing age, iterated to a
    fixed point (cycle lengths determine the spacing and vice versa).
    """
    oracle = oracle or cycle_oracle(sc)
    start = canonical_start(sc) if start is None else start
    T = sc.T
    age = 0.0
    sols = _tabulate(sc, oracle, start, age)
    for _ in range(spacing_rounds):
        spacing = steady_spacing([s.span for s in sols.values()])
        if spacing == age:
            break
        age = spacing
        sols = _tabulate(sc, oracle, start, age) or sols
    ids = sorted(sols)
    tau = np.array([sols[i].span for i in ids], dtype=np.int64)
    off = np.array([sols[i].sense_end - sols[i].F for i in ids], dtype=np.int64)
    P = np.array([sols[i].success_prob for i in ids], dtype=float)
    rewards = np.full((len(ids), T + 1), NEG_INF)
    spacing = steady_spacing(tau)
    for i in range(len(ids)):
        starts = np.arange(0, T - tau[i] + 1)
        gap = np.minimum(starts + off[i], spacing)
        rewards[i, starts] = P[i] * gap * (T - (starts + tau[i]))
    return ActionTable(T, ids, tau, off, P, rewards, sols)


def dp_schedule(table: ActionTable, backend=None) -> Schedule:
    if table.N == 0:
        return Schedule([], 0.0, table.T)
    k = backend or kernels.backend
    value, chosen = k.dp_sweep(table.tau, table.rewards, table.T)
    acts = [Action(table.task_ids[i], t, int(table.tau[i]), float(table.rewards[i, t])) for i, t in chosen]
    return Schedule(acts, float(value), table.T)


def planned_total_aoi(table: ActionTable, schedule: Schedule, num_tasks: int) -> float:
    """Expected total AoI if every action runs exactly as tabulated."""
    idx = {tid: i for i, tid in enumerate(table.task_ids)}
    ups = []
    for a in schedule.actions:
        i = idx[a.task]
        ups.append((a.task, a.end, a.start + int(table.sense_offset[i]), float(table.success_prob[i])))
    return expected_total_aoi(num_tasks, table.T, ups)


def plan_dp(sc: Scenario, oracle: CycleOracle | None = None,
            backend=None) -> tuple[Schedule, ActionTable]:
    """DP plan whose action rewards are re-derived from each state's own history.

    The static table seeds every action with the steady-spacing age.  The
    planner instead carries, for every slot, the expected last successful
    sense end of each task along the best schedule into that slot, so an
    action's reward is the exact expected AoI reduction of appending it there.
    Action rewards in the returned schedule are those history-aware gains.
    """
    table = build_action_table(sc, oracle)
    if table.N == 0:
        return Schedule([], 0.0, table.T), table
    k = backend or kernels.backend
    value, chosen = k.dp_sweep_history(table.tau, table.sense_offset, table.success_prob, table.T)
    last = np.zeros(table.N)
    acts = []
    for i, t in chosen:
        tau, off, P = int(table.tau[i]), int(table.sense_offset[i]), float(table.success_prob[i])
        gain = P * (t + off - last[i]) * (table.T + 1 - (t + tau))
        last[i] = P * (t + off) + (1.0 - P) * last[i]
        acts.append(Action(table.task_ids[i], int(t), tau, float(gain)))
    return Schedule(acts, float(value), table.T), table


class AgeTracker:
    """Expected ages during planning, updated per completed cycle."""

    def __init__(self, task_ids):
        self.last = {tid: (0, 0.0) for tid in task_ids}

    def age(self, tid: int, t: int) -> float:
        c, v = self.last[tid]
        return v + (t - c)

    def complete(self, sol: CycleSolution) -> None:
        c = sol.completion
        P = sol.success_prob
        self.last[sol.task] = (c, P * (c - sol.sense_end) + (1.0 - P) * self.age(sol.task, c))


def _execute(sc: Scenario, oracle: CycleOracle, choose) -> list[CycleSolution]:
    """Run cycles back to back; ``choose(t, pos, ages)`` returns the next solution or None."""
    tracker = AgeTracker([t.id for t in sc.tasks])
    pos = canonical_start(sc)
    t = 0
    out = []
    while t < sc.T:
        sol = choose(t, pos, tracker)
        if sol is None:
            break
        out.append(sol)
        tracker.complete(sol)
        t = sol.completion
        pos = tuple(float(c) for c in sol.trajectory[-1])
    return out


def greedy_schedule(sc: Scenario, oracle: CycleOracle | None = None) -> list[CycleSolution]:
    oracle = oracle or cycle_oracle(sc)

    def choose(t, pos, tracker):
        best = None
        for task in sc.tasks:
            try:
                sol = oracle(task.id, pos, t, tracker.age(task.id, t))
            except InfeasibleError:
                continue
            if best is None or sol.g_avg > best.g_avg:
                best = sol
        return best

    return _execute(sc, oracle, choose)


def random_schedule(sc: Scenario, oracle: CycleOracle | None = None,
                    rng: np.random.Generator | None = None) -> list[CycleSolution]:
    oracle = oracle or cycle_oracle(sc)
    rng = rng if rng is not None else np.random.default_rng(0)
    ids = [t.id for t in sc.tasks]

    def choose(t, pos, tracker):
        for j in rng.permutation(len(ids)):
            tid = ids[int(j)]
            try:
                return oracle(tid, pos, t, tracker.age(tid, t))
            except InfeasibleError:
                continue
        return None

    return _execute(sc, oracle, choose)


def dp_policy(sc: Scenario, oracle: CycleOracle | None = None) -> list[CycleSolution]:
    """Execute the DP plan's task order with cycles re-optimised from the actual state."""
    oracle = oracle or cycle_oracle(sc)
    plan, _ = plan_dp(sc, oracle)
    order = [a.task for a in sorted(plan.actions, key=lambda a: a.start)]
    queue = iter(order)

    def choose(t, pos, tracker):
        for tid in queue:
            try:
                return oracle(tid, pos, t, tracker.age(tid, t))
            except InfeasibleError:
                continue
        return None

    return _execute(sc, oracle, choose)


def schedule_from_cycles(cycles, T: int) -> Schedule:
    """Executed cycles as a Schedule; each action's reward is its cycle's AoI gain."""
    acts = [Action(c.task, c.F, c.span, float(c.g_avg * c.span)) for c in cycles]
    return Schedule(acts, float(sum(a.reward for a in acts)), T)
