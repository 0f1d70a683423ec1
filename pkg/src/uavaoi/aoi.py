"""Per-task Age of Information bookkeeping and AoI gain."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

EXPECTED = "expected"
SAMPLED = "sampled"

EVENTS = ("none", "sense_start", "sense_end", "tx_start", "update_done")


class SequencingError(RuntimeError):
    pass


@dataclass(frozen=True)
class UpdateRecord:
    task: int
    start: int          # F, slot the cycle began
    sense_start: int    # S
    sense_end: int      # S + omega * t0
    tx_start: int       # T_n^i
    completion: int     # T_n^i + lambda
    omega: int
    success_prob: float
    success: bool | None = None


@dataclass(frozen=True)
class CycleEvaluation:
    aoi_gain: float
    avg_gain: float
    cycle_span: int


class AoiLedger:
    """Age trajectories A_n(t), t = 0..T, for N tasks.

    Built slot by slot with ``tick`` and ``apply_update``; ``ages[n, t]`` holds
    the value of task ``n`` (0-based row) in slot ``t``.
    """

    def __init__(self, num_tasks: int, horizon: int):
        self.horizon = int(horizon)
        self.ages = np.zeros((num_tasks, self.horizon + 1))
        self.slot = 0
        self.records: list[UpdateRecord] = []

    @property
    def num_tasks(self) -> int:
        return self.ages.shape[0]

    def current(self, row: int) -> float:
        return float(self.ages[row, self.slot])

    def tick(self, t: int) -> "AoiLedger":
        if t != self.slot + 1:
            raise SequencingError(f"tick to slot {t} from slot {self.slot}")
        if t > self.horizon:
            raise SequencingError(f"slot {t} beyond horizon {self.horizon}")
        self.ages[:, t] = self.ages[:, t - 1] + 1.0
        self.slot = t
        return self

    def apply_update(self, row: int, rec: UpdateRecord, mode: str = EXPECTED,
                     rng: np.random.Generator | None = None) -> "AoiLedger":
        """Overwrite the age in the completion slot; call after ``tick`` to that slot."""
        t = self.slot
        if rec.completion != t:
            raise SequencingError(f"update completes at {rec.completion}, ledger is at slot {t}")
        fresh = t - rec.sense_end
        stale = self.ages[row, t - 1] + 1.0
        if mode == EXPECTED:
            P = rec.success_prob
            self.ages[row, t] = P * fresh + (1.0 - P) * stale
        elif mode == SAMPLED:
            if rec.success is None:
                if rng is None:
                    raise ValueError("sampled mode needs an rng or a pre-drawn outcome")
                ok = bool(rng.random() < rec.success_prob)
                rec = UpdateRecord(**{**rec.__dict__, "success": ok})
            self.ages[row, t] = fresh if rec.success else stale
        else:
            raise ValueError(f"unknown mode {mode!r}")
        self.records.append(rec)
        return self

    def run_to(self, t: int) -> "AoiLedger":
        while self.slot < t:
            self.tick(self.slot + 1)
        return self

    def total_per_task(self) -> np.ndarray:
        return self.ages[:, 1:self.slot + 1].sum(axis=1)


def total_aoi(ledger: AoiLedger) -> float:
    """Sum over tasks and slots 1..T of A_n(t)."""
    return float(ledger.total_per_task().sum())


def replay(num_tasks: int, horizon: int, records: Iterable[UpdateRecord], mode: str = EXPECTED,
           rng: np.random.Generator | None = None) -> AoiLedger:
    """Build a full-horizon ledger from update records (task ids are 1-based)."""
    by_slot: dict[int, list[UpdateRecord]] = {}
    for rec in records:
        if rec.completion > horizon:
            raise SequencingError(f"update for task {rec.task} completes after the horizon")
        by_slot.setdefault(rec.completion, []).append(rec)
    led = AoiLedger(num_tasks, horizon)
    for t in range(1, horizon + 1):
        led.tick(t)
        for rec in by_slot.get(t, ()):
            led.apply_update(rec.task - 1, rec, mode, rng)
    return led


def expected_total_aoi(num_tasks: int, horizon: int, updates: Iterable[tuple[int, int, int, float]]) -> float:
    """Closed-form expected total AoI from (task, completion, sense_end, P) tuples.

    Sums the linear ramps between updates as arithmetic series instead of
    stepping every slot, so it is cheap enough to call inside planners.
    """
    per_task: dict[int, list[tuple[int, int, float]]] = {n: [] for n in range(1, num_tasks + 1)}
    for task, c, e, P in updates:
        per_task[task].append((c, e, P))
    total = 0.0
    for events in per_task.values():
        events.sort()
        slot, age = 0, 0.0
        for c, e, P in events:
            # ramp over slots slot+1 .. c-1 then the update at c
            k = c - 1 - slot
            total += k * age + k * (k + 1) / 2.0
            before = age + k
            age = P * (c - e) + (1.0 - P) * (before + 1.0)
            total += age
            slot = c
        k = horizon - slot
        total += k * age + k * (k + 1) / 2.0
    return total


def aoi_gain(t: int, T: int, prev_sense_end: int, this_sense_end: int, P: float,
             cycle_span: int) -> CycleEvaluation:
    """AoI gain of an update completing in slot ``t`` and its per-slot average."""
    if t > T:
        raise ValueError("completion slot beyond horizon")
    if this_sense_end <= prev_sense_end:
        raise ValueError("sense end must advance between updates")
    if cycle_span < 1:
        raise ValueError("cycle span must be >= 1")
    g = P * (this_sense_end - prev_sense_end) * (T - t)
    return CycleEvaluation(g, g / cycle_span, cycle_span)


def exact_age_before_update(sense_ends: list[int], probs: list[float]) -> float:
    """Expected age term of the i-th update from the full history of sense ends.

    ``sense_ends[k]`` and ``probs[k]`` belong to update k (oldest first); the
    last entry is the update being scored.  Older gaps are discounted by the
    failure probability of the update that followed them.
    """
    ends = [0] + list(sense_ends)
    i = len(sense_ends)
    value = float(ends[i] - ends[i - 1])
    weight = 1.0
    for k in range(i - 1, 0, -1):
        weight *= 1.0 - probs[k - 1]
        value += weight * (ends[k] - ends[k - 1])
    return value


def approx_age_before_update(sense_ends: list[int]) -> float:
    ends = [0] + list(sense_ends)
    return float(ends[-1] - ends[-2])


def trace_rows(ledger: AoiLedger, events: dict[tuple[int, int], str] | None = None) -> list[tuple]:
    """(slot, task_id, aoi, event) rows for CSV export."""
    events = events or {}
    rows = []
    for t in range(ledger.slot + 1):
        for n in range(ledger.num_tasks):
            rows.append((t, n + 1, float(ledger.ages[n, t]), events.get((t, n + 1), "none")))
    return rows
