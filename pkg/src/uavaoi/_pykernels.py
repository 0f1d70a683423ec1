"""Pure-Python kernels. ``_ckernels.pyx`` mirrors these line for line."""
from __future__ import annotations

import math

import numpy as np

SCAN_POINTS = 64
M_LO = 1e-9
M_HI = 1.0 - 1e-9
# below this c the root function is strictly decreasing and positive: no interior root
C_MONOTONE = -(2.0 - 2.0 * math.log(2.0))
NEG_INF = float("-inf")


def root_residual(m: float, c: float) -> float:
    """m ln m - (1-m) ln(1-m) - (1-m) c."""
    return m * math.log(m) - (1.0 - m) * math.log(1.0 - m) - (1.0 - m) * c


def _root_slope(m: float, c: float) -> float:
    return math.log(m) + math.log(1.0 - m) + 2.0 + c


def _refine(lo: float, hi: float, c: float, tol: float) -> float:
    """Newton steps kept inside a shrinking sign-change bracket [lo, hi]."""
    flo = root_residual(lo, c)
    x = 0.5 * (lo + hi)
    for _ in range(200):
        fx = root_residual(x, c)
        if abs(fx) <= tol or hi - lo <= 4e-16:
            return x
        if (fx < 0.0) == (flo < 0.0):
            lo, flo = x, fx
        else:
            hi = x
        d = _root_slope(x, c)
        nx = x - fx / d if d != 0.0 else lo - 1.0
        if not lo < nx < hi:
            nx = 0.5 * (lo + hi)
        x = nx
    return x


def flight_roots(c: float, tol: float = 1e-12) -> list[float]:
    """Interior roots m in (0, 1) of the stationarity condition for parameter c."""
    if c <= C_MONOTONE:
        return []
    roots = []
    step = (M_HI - M_LO) / (SCAN_POINTS - 1)
    prev_m = M_LO
    prev_f = root_residual(prev_m, c)
    for j in range(1, SCAN_POINTS):
        m = M_LO + j * step if j < SCAN_POINTS - 1 else M_HI
        f = root_residual(m, c)
        if prev_f == 0.0:
            roots.append(prev_m)
        elif (prev_f < 0.0) != (f < 0.0) and f != 0.0:
            roots.append(_refine(prev_m, m, c, tol))
        prev_m, prev_f = m, f
    return roots


def sensing_factor(k: float, d: float, Ts: float, xi: float, v: float, t0: int) -> float:
    """1 - (1 - exp(-xi * (d - v k)))**floor((Ts - k)/t0); zero when no full attempt fits."""
    n = math.floor((Ts - k) / t0 + 1e-12)
    if n < 1:
        return 0.0
    p = math.exp(-xi * max(d - v * k, 0.0))
    return 1.0 - (1.0 - p) ** n


def flight_time(d: float, Ts: int, xi: float, v: float, t0: int, upper: float,
                tol: float = 1e-12) -> tuple[int, float, float]:
    """Integer flight slots maximising the sensing factor, plus the continuous root.

    Returns (slots, continuous_root, residual); the root is NaN when the
    stationarity condition has no interior solution inside [0, upper].
    """
    up = int(math.floor(min(upper, Ts - t0) + 1e-9))
    if up < 0:
        return -1, math.nan, math.nan
    c = xi * (d - Ts * v)
    best_root, best_res = math.nan, math.nan
    anchors = [0.0, float(up)]
    for m in flight_roots(c, tol):
        x = (d + math.log(1.0 - m) / xi) / v
        if not 0.0 <= x <= up:
            continue
        if math.isnan(best_root):
            best_root, best_res = x, root_residual(m, c)
        anchors.append(x)
    cands = set()
    for x in anchors:
        cands.add(math.floor(x))
        cands.add(math.ceil(x))
        # attempt-aligned neighbours: no partially used attempt window
        n_lo = math.floor((Ts - x) / t0)
        for n in (n_lo - 1, n_lo, n_lo + 1, n_lo + 2):
            cands.add(Ts - n * t0)
    best_k, best_val = -1, -1.0
    for k in sorted(cands):
        if 0 <= k <= up:
            val = sensing_factor(k, d, Ts, xi, v, t0)
            if val > best_val + 1e-15:
                best_k, best_val = k, val
    return best_k, best_root, best_res


def sensing_scan(start, hover, target, xi: float, v_model: float, v_step: float, t0: int,
                 p_th: float, age: float, Tt: int, remaining: int):
    """Evaluate the one-cycle objective for every total sensing time Ts = t0 .. remaining - Tt.

    Returns arrays (gain, flight_slots, omega, ts_eff) indexed by Ts - t0;
    infeasible candidates carry gain = -inf.
    """
    sx, sy, sz = start
    hx, hy, hz = hover
    gx, gy, gz = target
    L = math.sqrt((hx - sx) ** 2 + (hy - sy) ** 2 + (hz - sz) ** 2)
    reach = math.ceil(L / v_step - 1e-9) if L > 0 else 0
    d0 = math.sqrt((gx - sx) ** 2 + (gy - sy) ** 2 + (gz - sz) ** 2)
    n_ts = remaining - Tt - t0 + 1
    if n_ts < 1:
        z = np.empty(0)
        return z, z.astype(np.int64), z.astype(np.int64), z.astype(np.int64)
    gain = np.full(n_ts, NEG_INF)
    kf = np.full(n_ts, -1, dtype=np.int64)
    om = np.zeros(n_ts, dtype=np.int64)
    te = np.zeros(n_ts, dtype=np.int64)
    for j in range(n_ts):
        Ts = t0 + j
        k, _, _ = flight_time(d0, Ts, xi, v_model, t0, reach)
        if k < 0:
            continue
        w = (Ts - k) // t0
        frac = min(k * v_step / L, 1.0) if L > 0 else 1.0
        px = sx + (hx - sx) * frac
        py = sy + (hy - sy) * frac
        pz = sz + (hz - sz) * frac
        dk = math.sqrt((gx - px) ** 2 + (gy - py) ** 2 + (gz - pz) ** 2)
        P = 1.0 - (1.0 - math.exp(-xi * dk)) ** w
        kf[j], om[j] = k, w
        ts_eff = k + w * t0
        te[j] = ts_eff
        span = ts_eff + Tt
        if P < p_th or span > remaining:
            continue
        gain[j] = P * (age + span) * (remaining - span) / span
    return gain, kf, om, te


def _pathloss(x: float, y: float, z: float, ch: tuple) -> float:
    fs, eta_l, eta_n, alpha, beta, H = ch[0], ch[1], ch[2], ch[3], ch[4], ch[5]
    dz = z - H
    d = math.sqrt(x * x + y * y + dz * dz)
    s = dz / d
    s = 1.0 if s > 1.0 else (-1.0 if s < -1.0 else s)
    phi = math.degrees(math.asin(s))
    pl = 1.0 / (1.0 + alpha * math.exp(-beta * (phi - alpha)))
    return fs + 20.0 * math.log10(d) + pl * eta_l + (1.0 - pl) * eta_n


def _snr(x, y, z, ch) -> float:
    return ch[6] / 10.0 ** (_pathloss(x, y, z, ch) / 10.0) / ch[7]


def _rate(x, y, z, ch) -> float:
    return ch[8] * math.log2(1.0 + _snr(x, y, z, ch))


def pack_channel(chp) -> tuple:
    """Flatten ChannelParams into the tuple layout the kernels index."""
    fs = 20.0 * math.log10(chp.carrier_freq) + 20.0 * math.log10(4.0 * math.pi / chp.light_speed)
    return (fs, chp.eta_los, chp.eta_nlos, chp.alpha, chp.beta, chp.bs_height, chp.tx_power,
            chp.noise_power, chp.bandwidth, chp.snr_threshold, chp.min_bs_distance, chp.fd_step)


def tx_rollout(start, data_bits: float, ch: tuple, v_step: float, h_min: float, h_max: float,
               slot: float, max_slots: int):
    """Gradient-ascent flight toward higher rate, transmitting once SNR clears the threshold.

    Returns (flight_slots, tx_slots, positions, bits, min_tx_snr); positions has
    one row per slot boundary.  flight_slots is -1 if the threshold is never
    met and tx_slots is -1 if the data does not finish within ``max_slots``.
    """
    H, gth, rmin, h = ch[5], ch[9], ch[10], ch[11]
    x, y, z = float(start[0]), float(start[1]), float(start[2])
    pos = [(x, y, z)]
    fly, lam, bits = 0, 0, 0.0
    min_snr = math.inf
    for _ in range(max_slots):
        g = _snr(x, y, z, ch)
        if lam > 0 or g >= gth:
            lam += 1
            bits += ch[8] * math.log2(1.0 + g) * slot
            min_snr = min(min_snr, g)
        else:
            fly += 1
        gx = (_rate(x + h, y, z, ch) - _rate(x - h, y, z, ch)) / (2 * h)
        gy = (_rate(x, y + h, z, ch) - _rate(x, y - h, z, ch)) / (2 * h)
        gz = (_rate(x, y, z + h, ch) - _rate(x, y, z - h, ch)) / (2 * h)
        gn = math.sqrt(gx * gx + gy * gy + gz * gz)
        if gn > 0.0:
            nx, ny, nz = x + v_step * gx / gn, y + v_step * gy / gn, z + v_step * gz / gn
            nz = min(max(nz, h_min), h_max)
            rx, ry, rz = nx, ny, nz - H
            rr = math.sqrt(rx * rx + ry * ry + rz * rz)
            if rr < rmin:
                if rr > 0.0:
                    nx, ny, nz = rx * rmin / rr, ry * rmin / rr, H + rz * rmin / rr
                else:
                    nx, ny, nz = x, y, z
                mx, my, mz = nx - x, ny - y, nz - z
                mm = math.sqrt(mx * mx + my * my + mz * mz)
                if mm > v_step:
                    nx, ny, nz = x + mx * v_step / mm, y + my * v_step / mm, z + mz * v_step / mm
                nz = min(max(nz, h_min), h_max)
            x, y, z = nx, ny, nz
        pos.append((x, y, z))
        if lam > 0 and bits >= data_bits:
            return fly, lam, np.array(pos), bits, min_snr
    if lam == 0:
        return -1, 0, np.array(pos), bits, min_snr
    return fly, -1, np.array(pos), bits, min_snr


def dp_sweep(tau, rewards, T: int):
    """Max-reward set of non-overlapping actions; action (i, t) occupies slots [t, t + tau[i]).

    ``rewards[i, t]`` is the reward for starting task i at slot t (-inf when
    unavailable).  Returns (value, [(i, t), ...]) in start order.
    """
    N = len(tau)
    best = [0.0] * (T + 1)
    pick = [-1] * (T + 1)
    for s in range(1, T + 1):
        b = best[s - 1]
        choice = -1
        for i in range(N):
            t = s - tau[i]
            if t < 0:
                continue
            r = rewards[i][t]
            if r == NEG_INF:
                continue
            cand = best[t] + r
            if cand > b:
                b, choice = cand, i
        best[s], pick[s] = b, choice
    chosen = []
    s = T
    while s > 0:
        i = pick[s]
        if i < 0:
            s -= 1
        else:
            s -= tau[i]
            chosen.append((i, s))
    chosen.reverse()
    return best[T], chosen


def dp_sweep_history(tau, off, prob, T: int):
    """Forward DP whose action rewards depend on the best path into the start slot.

    Each state keeps the expected last successful sense end of every task on
    its path, so an update of task i started at t scores
    P_i * (t + off_i - last_i) * (T + 1 - (t + tau_i)), the exact expected
    AoI reduction of appending it to that path.
    Returns (value, [(i, t), ...]).
    """
    N = len(tau)
    best = [0.0] * (T + 1)
    pick = [-1] * (T + 1)
    last = [[0.0] * N for _ in range(T + 1)]
    for s in range(1, T + 1):
        b = best[s - 1]
        choice = -1
        for i in range(N):
            t = s - tau[i]
            if t < 0:
                continue
            gain = prob[i] * (t + off[i] - last[t][i]) * (T + 1 - s)
            cand = best[t] + gain
            if cand > b:
                b, choice = cand, i
        best[s], pick[s] = b, choice
        if choice < 0:
            last[s] = last[s - 1]
        else:
            t = s - tau[choice]
            row = list(last[t])
            row[choice] = prob[choice] * (t + off[choice]) + (1.0 - prob[choice]) * row[choice]
            last[s] = row
    chosen = []
    s = T
    while s > 0:
        i = pick[s]
        if i < 0:
            s -= 1
        else:
            s -= tau[i]
            chosen.append((i, s))
    chosen.reverse()
    return best[T], chosen
