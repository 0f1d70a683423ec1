"""One update cycle: sensing flight, repeated sensing, transmission.

The cycle optimizer alternates two subproblems until the average AoI gain
stops improving:

* sensing: with the transmission length fixed, enumerate the total sensing
  time and, for each, pick the flight time from the stationarity condition;
* transmission: with sensing fixed, climb the rate gradient at full speed and
  transmit from the first slot whose SNR clears the threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .scenario import Scenario
from .sensing import InfeasibleError, SensingParams, min_repetitions
from .world import KinematicsParams, TaskSpec, distance, hover_point, point_along


@dataclass(frozen=True)
class IterationConfig:
    epsilon: float = 1e-6
    max_iters: int = 20
    root_tol: float = 1e-12
    fd_step: float = 0.5
    max_tx_slots: int = 50_000

    def __post_init__(self):
        if not self.epsilon > 0 or self.max_iters < 1 or not self.root_tol > 0:
            raise ValueError("need epsilon > 0, max_iters >= 1, root_tol > 0")


@dataclass(frozen=True)
class FlightTime:
    slots: int
    continuous: float   # NaN when there is no interior stationary point
    residual: float


@dataclass(frozen=True)
class SensingChoice:
    Ts: int
    Ts_f: int
    omega: int
    success_prob: float
    g_avg: float
    gains: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Transmission:
    flight_slots: int
    tx_slots: int
    positions: np.ndarray = field(repr=False)
    bits: float
    min_snr: float

    @property
    def Tt(self) -> int:
        return self.flight_slots + self.tx_slots


@dataclass
class CycleSolution:
    task: int
    F: int
    Ts_f: int
    omega: int
    S: int
    Ts: int
    Tx_start: int
    lam: int
    Tt: int
    trajectory: np.ndarray = field(repr=False)
    success_prob: float
    g_avg: float
    bits: float = 0.0
    min_tx_snr: float = math.inf
    converged: bool = True
    trace: list = field(default_factory=list)
    raw_trace: list = field(default_factory=list)

    @property
    def sense_end(self) -> int:
        return self.S + (self.Ts - self.Ts_f)

    @property
    def completion(self) -> int:
        return self.Tx_start + self.lam

    @property
    def span(self) -> int:
        return self.Ts + self.Tt

    def shifted(self, F: int) -> "CycleSolution":
        """Same cycle started at slot F."""
        d = F - self.F
        return CycleSolution(**{**self.__dict__, "F": F, "S": self.S + d, "Tx_start": self.Tx_start + d})

    def to_dict(self, with_trajectory: bool = True, extras: bool = False) -> dict:
        """The solution's fields; ``extras`` adds task id, bits and convergence info."""
        out = {"F": self.F, "Ts_f": self.Ts_f, "omega": self.omega, "S": self.S, "Ts": self.Ts,
               "Tx_start": self.Tx_start, "lambda": self.lam, "Tt": self.Tt,
               "success_prob": self.success_prob, "g_avg": self.g_avg}
        if with_trajectory:
            out["trajectory"] = self.trajectory.tolist()
        if extras:
            out.update(task=self.task, bits=self.bits, min_tx_snr=self.min_tx_snr,
                       converged=self.converged, iterations=len(self.trace))
        return out


def objective(P: float, age: float, Ts: int, Tt: int, remaining: int) -> float:
    """Average AoI gain of a cycle of Ts + Tt slots with ``remaining`` slots left."""
    span = Ts + Tt
    return P * (age + span) * (remaining - span) / span


def solve_flight_time(d: float, Ts: int, sp: SensingParams, kin: KinematicsParams,
                      slot_duration: float, max_flight: float | None = None,
                      root_tol: float = 1e-12, backend=None) -> FlightTime:
    """Sensing-flight slots for a target ``d`` meters away and Ts total sensing slots."""
    if Ts < sp.t0:
        raise InfeasibleError(f"Ts={Ts} cannot fit one sensing attempt of t0={sp.t0} slots")
    if not d > 0:
        raise ValueError("distance must be > 0")
    v = kin.average_speed * slot_duration
    # the UAV reaches the hover point during slot ceil(d / v) and then stays there
    upper = math.ceil(d / v - 1e-9) if max_flight is None else max_flight
    k = backend or kernels.backend
    slots, cont, res = k.flight_time(float(d), int(Ts), sp.xi, v, int(sp.t0), float(upper), root_tol)
    return FlightTime(int(slots), cont, res)


def _sensing_geometry(start, task: TaskSpec, sc: Scenario):
    return (np.asarray(start, dtype=float), hover_point(task, sc.kinematics), task.target_position)


def solve_sensing_time(start, task: TaskSpec, Tt: int, sc: Scenario, t: int, T: int | None = None,
                       age: float = 0.0, backend=None) -> SensingChoice:
    T = sc.T if T is None else T
    sp = sc.sensing
    remaining = T - t
    if Tt < 1:
        raise ValueError("Tt must be >= 1")
    if remaining - Tt < sp.t0 + 1:
        raise InfeasibleError(f"horizon: {remaining} slots left cannot hold Tt={Tt} plus one attempt")
    s, h, g = _sensing_geometry(start, task, sc)
    k = backend or kernels.backend
    gains, kf, om, te = k.sensing_scan(tuple(s), tuple(h), tuple(g), sp.xi, sc.v_model, sc.v_step,
                                       int(sp.t0), sp.p_th, float(age), int(Tt), int(remaining))
    gains = np.asarray(gains)
    if gains.size == 0 or not np.isfinite(gains).any():
        raise InfeasibleError(f"p_th: no sensing time reaches p_th={sp.p_th} within the horizon "
                              f"for task {task.id}")
    j = int(np.argmax(gains))  # first maximiser = smallest Ts
    Ts_f, omega = int(kf[j]), int(om[j])
    pos = _after_flight(s, h, Ts_f, sc.v_step)
    P = 1.0 - (1.0 - math.exp(-sp.xi * distance(pos, g))) ** omega
    return SensingChoice(int(te[j]), Ts_f, omega, P, float(gains[j]), gains)


def _after_flight(start, hover, slots: int, v_step: float) -> np.ndarray:
    return point_along(start, hover, slots * v_step)


def solve_transmission(after_sense, data_bits: float, sc: Scenario, cfg: IterationConfig | None = None,
                       backend=None) -> Transmission:
    if not data_bits > 0:
        raise ValueError("data_bits must be > 0")
    cfg = cfg or IterationConfig()
    ch = kernels.pack_channel(sc.channel)
    kin = sc.kinematics
    k = backend or kernels.backend
    fly, lam, pos, bits, min_snr = k.tx_rollout(tuple(float(c) for c in after_sense), float(data_bits), ch,
                                                sc.v_step, kin.h_min, kin.h_max,
                                                sc.world.slot_duration, int(cfg.max_tx_slots))
    if fly < 0:
        raise InfeasibleError(f"gamma_th: SNR threshold {sc.channel.snr_threshold} not reached "
                              f"within {cfg.max_tx_slots} slots")
    if lam < 0:
        raise InfeasibleError(f"transmission of {data_bits:.3g} bits not finished within "
                              f"{cfg.max_tx_slots} slots")
    return Transmission(int(fly), int(lam), np.asarray(pos), float(bits), float(min_snr))


def initial_tt(task: TaskSpec, sc: Scenario, cfg: IterationConfig | None = None, backend=None) -> int:
    """Transmission length from the target's hover point with the minimum repetitions."""
    h = hover_point(task, sc.kinematics)
    p = math.exp(-sc.sensing.xi * distance(h, task.target_position))
    omega = min_repetitions(p, sc.sensing.p_th)
    return solve_transmission(h, sc.sensing.data_bits(omega), sc, cfg, backend).Tt


def assemble(task: TaskSpec, start, F: int, choice: SensingChoice, tx: Transmission,
             sc: Scenario, g_avg: float) -> CycleSolution:
    s, h, g = _sensing_geometry(start, task, sc)
    flight = np.array([_after_flight(s, h, j, sc.v_step) for j in range(choice.Ts_f + 1)])
    hover = np.repeat(flight[-1:], choice.omega * sc.sensing.t0, axis=0)
    traj = np.vstack([flight, hover, tx.positions[1:]])
    S = F + choice.Ts_f
    sense_end = S + choice.omega * sc.sensing.t0
    return CycleSolution(task=task.id, F=F, Ts_f=choice.Ts_f, omega=choice.omega, S=S, Ts=choice.Ts,
                         Tx_start=sense_end + tx.flight_slots, lam=tx.tx_slots, Tt=tx.Tt,
                         trajectory=traj, success_prob=choice.success_prob, g_avg=g_avg,
                         bits=tx.bits, min_tx_snr=tx.min_snr)


def optimize_cycle(start, task: TaskSpec, sc: Scenario, t: int = 0, age: float = 0.0,
                   cfg: IterationConfig | None = None, T: int | None = None,
                   Tt_init: int | None = None, backend=None) -> CycleSolution:
    """Alternate sensing and transmission optimisation for one update of ``task``.

    An iterate is kept only if it raises the average gain; the first
    non-improving or repeated iterate ends the loop.  ``trace`` holds the
    accepted values, ``raw_trace`` every evaluated one.
    """
    cfg = cfg or IterationConfig()
    T = sc.T if T is None else T
    remaining = T - t
    Tt = initial_tt(task, sc, cfg, backend) if Tt_init is None else int(Tt_init)
    best: CycleSolution | None = None
    trace, raw = [], []
    seen = set()
    converged = False
    last_err = None
    for _ in range(cfg.max_iters):
        try:
            choice = solve_sensing_time(start, task, Tt, sc, t, T, age, backend)
        except InfeasibleError as exc:
            last_err = exc
            converged = True
            break
        s, h, _ = _sensing_geometry(start, task, sc)
        post = _after_flight(s, h, choice.Ts_f, sc.v_step)
        tx = solve_transmission(post, sc.sensing.data_bits(choice.omega), sc, cfg, backend)
        span = choice.Ts + tx.Tt
        g = objective(choice.success_prob, age, choice.Ts, tx.Tt, remaining) if span <= remaining else -math.inf
        raw.append(g)
        key = (choice.Ts, choice.Ts_f, choice.omega, tx.Tt)
        if best is None or g > best.g_avg:
            prev = best.g_avg if best is not None else None
            best = assemble(task, start, t, choice, tx, sc, g)
            if math.isfinite(g):
                trace.append(g)
            if prev is not None and math.isfinite(prev) and g - prev <= cfg.epsilon:
                converged = True
                break
        elif math.isfinite(best.g_avg) or key in seen:
            converged = True
            break
        if key in seen or tx.Tt == Tt:
            converged = True
            break
        seen.add(key)
        Tt = tx.Tt
    if best is None or not math.isfinite(best.g_avg):
        raise last_err or InfeasibleError(f"horizon: no feasible cycle for task {task.id} from slot {t}")
    best.converged = converged
    best.trace = trace
    best.raw_trace = raw
    return best


def check_cycle(sol: CycleSolution, sc: Scenario, tol: float = 1e-9) -> None:
    """Assert the structural constraints every emitted cycle must satisfy."""
    from .channel import snr
    from .world import check_kinematics

    sp = sc.sensing
    assert sol.Ts == sol.Ts_f + sol.omega * sp.t0, "Ts != Ts_f + omega t0"
    assert sol.Tt >= sol.lam >= 1, "Tt < lambda"
    assert sol.success_prob >= sp.p_th - tol, "sensing threshold violated"
    assert sol.bits >= sp.data_bits(sol.omega) * (1 - 1e-12), "transmitted bits short of sensed data"
    assert len(sol.trajectory) == sol.span + 1, "trajectory length mismatch"
    check_kinematics(sol.trajectory, sc.kinematics, sc.world.slot_duration)
    off = sol.Tx_start - sol.F
    for j in range(off, off + sol.lam):
        assert snr(sol.trajectory[j], sc.channel) >= sc.channel.snr_threshold * (1 - 1e-12), \
            "SNR below threshold inside transmission window"
