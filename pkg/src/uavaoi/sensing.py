"""Probabilistic sensing: per-attempt success, repeated attempts, minimum repetitions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InfeasibleError(RuntimeError):
    """No decision satisfies the model's constraints."""


@dataclass(frozen=True)
class SensingParams:
    xi: float = 0.01
    t0: int = 200
    data_per_attempt: float = 20e6
    p_th: float = 0.9

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError("xi must be > 0")
        if int(self.t0) != self.t0 or self.t0 < 1:
            raise ValueError("t0 must be an integer >= 1")
        if not self.data_per_attempt > 0:
            raise ValueError("data_per_attempt must be > 0")
        if not 0 < self.p_th < 1:
            raise ValueError("p_th must lie in (0, 1)")

    @property
    def sense_rate(self) -> float:
        """R_s in bits per slot."""
        return self.data_per_attempt / self.t0

    def data_bits(self, omega: int) -> float:
        return self.sense_rate * omega * self.t0


def single_attempt_prob(d: float, sp: SensingParams) -> float:
    if d < 0:
        raise ValueError("sensing distance must be >= 0")
    return math.exp(-sp.xi * d)


def cycle_success_prob(p: float, omega: int) -> float:
    if omega < 1:
        raise ValueError("omega must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return 1.0 - (1.0 - p) ** omega


def min_repetitions(p: float, p_th: float) -> int:
    """Smallest omega with 1 - (1-p)**omega >= p_th."""
    if p <= 0.0:
        raise InfeasibleError("single-attempt success probability is zero")
    if p >= 1.0:
        return 1
    omega = max(1, math.ceil(math.log(1.0 - p_th) / math.log(1.0 - p)))
    # guard the ceil against rounding on either side; minimal w.r.t. cycle_success_prob
    while cycle_success_prob(p, omega) < p_th:
        omega += 1
    while omega > 1 and cycle_success_prob(p, omega - 1) >= p_th:
        omega -= 1
    return omega


def sample_success(p: float, rng: np.random.Generator) -> bool:
    return bool(rng.random() < p)
