"""Geometry, slot clock and UAV kinematics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class WorldConfig:
    horizon_T: int = 4000
    slot_duration: float = 0.01
    bs_height: float = 25.0
    num_tasks_N: int = 5
    rng_seed: int = 0
    layout_radius: float = 100.0

    def __post_init__(self):
        if self.horizon_T < 1:
            raise ValueError("horizon_T must be >= 1")
        if not self.slot_duration > 0:
            raise ValueError("slot_duration must be > 0")
        if not self.bs_height > 0:
            raise ValueError("bs_height must be > 0")
        if self.num_tasks_N < 0:
            raise ValueError("num_tasks_N must be >= 0")
        if not self.layout_radius > 0:
            raise ValueError("layout_radius must be > 0")

    @property
    def bs_position(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.bs_height])


@dataclass(frozen=True)
class TaskSpec:
    id: int
    x: float
    y: float

    @property
    def target_position(self) -> np.ndarray:
        return np.array([self.x, self.y, 0.0])


@dataclass(frozen=True)
class KinematicsParams:
    v_max: float = 20.0
    h_min: float = 25.0
    h_max: float = 100.0
    # the average sensing-flight speed; None means v_max
    v_bar: float | None = None

    def __post_init__(self):
        if not self.v_max > 0:
            raise ValueError("v_max must be > 0")
        if not 0 < self.h_min <= self.h_max:
            raise ValueError(f"need 0 < h_min <= h_max, got h_min={self.h_min}, h_max={self.h_max}")

    @property
    def average_speed(self) -> float:
        return self.v_max if self.v_bar is None else self.v_bar

    def step_length(self, slot_duration: float) -> float:
        """Meters covered in one slot at full speed."""
        return self.v_max * slot_duration


@dataclass(frozen=True)
class UavState:
    position: tuple
    slot: int = 0

    @property
    def xyz(self) -> np.ndarray:
        return np.asarray(self.position, dtype=float)


def distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(math.sqrt(float(np.dot(a - b, a - b))))


def clamp_height(point, kin: KinematicsParams) -> np.ndarray:
    p = np.array(point, dtype=float)
    p[2] = min(max(p[2], kin.h_min), kin.h_max)
    return p


def step_toward(state: UavState, goal, kin: KinematicsParams, slot_duration: float) -> UavState:
    """Advance one slot along the straight line to ``goal`` (height-clamped) at v_max."""
    here = state.xyz
    target = clamp_height(goal, kin)
    step = kin.step_length(slot_duration)
    gap = distance(here, target)
    if gap <= step:
        nxt = target
    else:
        nxt = here + (target - here) * (step / gap)
    return UavState(tuple(float(c) for c in nxt), state.slot + 1)


def hover_point(task: TaskSpec, kin: KinematicsParams) -> np.ndarray:
    """Closest feasible point to a ground target: straight above it at h_min."""
    return clamp_height(task.target_position, kin)


def point_along(start, end, travelled: float) -> np.ndarray:
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    length = distance(start, end)
    if length == 0.0 or travelled >= length:
        return end.copy()
    return start + (end - start) * (travelled / length)


def random_layout(world: WorldConfig, rng: np.random.Generator | None = None) -> list[TaskSpec]:
    """Targets placed uniformly in a disc of ``layout_radius`` around the BS."""
    if rng is None:
        rng = np.random.default_rng(world.rng_seed)
    r = world.layout_radius * np.sqrt(rng.uniform(0.0, 1.0, world.num_tasks_N))
    theta = rng.uniform(0.0, 2 * np.pi, world.num_tasks_N)
    return [TaskSpec(i + 1, float(r[i] * np.cos(theta[i])), float(r[i] * np.sin(theta[i])))
            for i in range(world.num_tasks_N)]


def check_kinematics(positions, kin: KinematicsParams, slot_duration: float, tol: float = 1e-9) -> None:
    """Raise if a per-slot position sequence breaks the speed or height limits."""
    pts = np.asarray(positions, dtype=float)
    if len(pts) == 0:
        return
    step = kin.step_length(slot_duration)
    if np.any(pts[:, 2] < kin.h_min - tol) or np.any(pts[:, 2] > kin.h_max + tol):
        raise AssertionError("height bound violated")
    if len(pts) > 1:
        moves = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if np.any(moves > step + tol):
            raise AssertionError(f"speed bound violated: max step {moves.max():.6f} > {step:.6f}")
