"""Air-to-ground link model: LoS probability, average pathloss, SNR and rate.

Logs in the pathloss terms are base 10 and the elevation angle is in degrees,
which is how the (alpha, beta) pair of the A2G LoS model is usually fitted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ChannelParams:
    carrier_freq: float = 2e9
    light_speed: float = 3e8
    eta_los: float = 1.0
    eta_nlos: float = 20.0
    alpha: float = 9.61
    beta: float = 0.16
    tx_power: float = 0.1
    noise_power: float = 10 ** (-96 / 10) / 1000.0
    bandwidth: float = 1e6
    snr_threshold: float = 10.0
    bs_height: float = 25.0
    # keep-out radius around the BS antenna; the A2G model is meaningless at d -> 0
    min_bs_distance: float = 10.0
    fd_step: float = 0.5

    def __post_init__(self):
        for name in ("carrier_freq", "light_speed", "tx_power", "noise_power", "bandwidth",
                     "snr_threshold", "bs_height", "min_bs_distance", "fd_step", "alpha", "beta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"channel parameter {name} must be > 0")
        if self.eta_nlos < self.eta_los:
            raise ValueError("eta_nlos must be >= eta_los")

    @property
    def bs_position(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.bs_height])


def _bs_distance(uav, ch: ChannelParams) -> tuple[float, float]:
    dx, dy, dz = float(uav[0]), float(uav[1]), float(uav[2]) - ch.bs_height
    d = math.sqrt(dx * dx + dy * dy + dz * dz)
    if d <= 0.0:
        raise ValueError("UAV coincides with the BS; pathloss undefined")
    return d, dz


def free_space_pathloss(d: float, ch: ChannelParams) -> float:
    """Distance-independent free-space term 20log10(f) + 20log10(4*pi/c), in dB."""
    if not d > 0:
        raise ValueError("distance must be > 0")
    return 20.0 * math.log10(ch.carrier_freq) + 20.0 * math.log10(4.0 * math.pi / ch.light_speed)


def elevation_deg(uav, ch: ChannelParams) -> float:
    d, dz = _bs_distance(uav, ch)
    return math.degrees(math.asin(max(-1.0, min(1.0, dz / d))))


def los_probability_from_angle(phi_deg: float, ch: ChannelParams) -> float:
    return 1.0 / (1.0 + ch.alpha * math.exp(-ch.beta * (phi_deg - ch.alpha)))


def los_probability(uav, ch: ChannelParams) -> float:
    return los_probability_from_angle(elevation_deg(uav, ch), ch)


def average_pathloss(uav, ch: ChannelParams) -> float:
    d, dz = _bs_distance(uav, ch)
    pr_los = los_probability_from_angle(math.degrees(math.asin(max(-1.0, min(1.0, dz / d)))), ch)
    base = free_space_pathloss(d, ch) + 20.0 * math.log10(d)
    return base + pr_los * ch.eta_los + (1.0 - pr_los) * ch.eta_nlos


def snr(uav, ch: ChannelParams) -> float:
    received = ch.tx_power / 10.0 ** (average_pathloss(uav, ch) / 10.0)
    return received / ch.noise_power


def rate_from_snr(gamma: float, ch: ChannelParams) -> float:
    return ch.bandwidth * math.log2(1.0 + gamma)


def rate(uav, ch: ChannelParams) -> float:
    """Uplink rate in bits/second."""
    return rate_from_snr(snr(uav, ch), ch)


def rate_gradient(uav, ch: ChannelParams, h: float | None = None) -> np.ndarray:
    """Central-difference gradient of ``rate`` in bits/s per meter."""
    h = ch.fd_step if h is None else h
    p = np.asarray(uav, dtype=float)
    g = np.empty(3)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        g[k] = (rate(p + e, ch) - rate(p - e, ch)) / (2.0 * h)
    return g


def channel_grid(xs, ys, zs, ch: ChannelParams) -> list[dict]:
    """Rows of x, y, z, pl_db, pr_los, snr_db, rate_bps over a position grid."""
    rows = []
    for x in xs:
        for y in ys:
            for z in zs:
                p = (float(x), float(y), float(z))
                try:
                    pl = average_pathloss(p, ch)
                except ValueError:
                    continue
                g = snr(p, ch)
                rows.append({"x": p[0], "y": p[1], "z": p[2], "pl_db": pl,
                             "pr_los": los_probability(p, ch),
                             "snr_db": float(linear_to_db(g)), "rate_bps": rate_from_snr(g, ch)})
    return rows
