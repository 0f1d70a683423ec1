# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same signatures and results as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, log2, log10, exp, sqrt, asin, floor, ceil, fabs, INFINITY, NAN, isnan, M_PI
from libc.stdlib cimport malloc, realloc, free

cnp.import_array()

DEF SCAN_POINTS = 64
cdef double M_LO = 1e-9
cdef double M_HI = 1.0 - 1e-9
cdef double C_MONOTONE = -(2.0 - 2.0 * log(2.0))


cdef inline double _res(double m, double c) nogil:
    return m * log(m) - (1.0 - m) * log(1.0 - m) - (1.0 - m) * c


cdef inline double _slope(double m, double c) nogil:
    return log(m) + log(1.0 - m) + 2.0 + c


def root_residual(double m, double c):
    return _res(m, c)


cdef double _refine(double lo, double hi, double c, double tol) nogil:
    cdef double flo = _res(lo, c)
    cdef double x = 0.5 * (lo + hi)
    cdef double fx, d, nx
    cdef int it
    for it in range(200):
        fx = _res(x, c)
        if fabs(fx) <= tol or hi - lo <= 4e-16:
            return x
        if (fx < 0.0) == (flo < 0.0):
            lo = x
            flo = fx
        else:
            hi = x
        d = _slope(x, c)
        if d != 0.0:
            nx = x - fx / d
        else:
            nx = lo - 1.0
        if not (lo < nx < hi):
            nx = 0.5 * (lo + hi)
        x = nx
    return x


cdef int _roots(double c, double tol, double* out) nogil:
    cdef int n = 0, j
    cdef double step, prev_m, prev_f, m, f
    if c <= C_MONOTONE:
        return 0
    step = (M_HI - M_LO) / (SCAN_POINTS - 1)
    prev_m = M_LO
    prev_f = _res(prev_m, c)
    for j in range(1, SCAN_POINTS):
        if j < SCAN_POINTS - 1:
            m = M_LO + j * step
        else:
            m = M_HI
        f = _res(m, c)
        if prev_f == 0.0:
            if n < 8:
                out[n] = prev_m
                n += 1
        elif ((prev_f < 0.0) != (f < 0.0)) and f != 0.0:
            if n < 8:
                out[n] = _refine(prev_m, m, c, tol)
                n += 1
        prev_m = m
        prev_f = f
    return n


def flight_roots(double c, double tol=1e-12):
    cdef double buf[8]
    cdef int n = _roots(c, tol, buf)
    return [buf[i] for i in range(n)]


cdef inline double _factor(long k, double d, long Ts, double xi, double v, long t0) nogil:
    cdef long n = <long>floor((Ts - k) / <double>t0 + 1e-12)
    cdef double dist
    if n < 1:
        return 0.0
    dist = d - v * k
    if dist < 0.0:
        dist = 0.0
    return 1.0 - (1.0 - exp(-xi * dist)) ** n


def sensing_factor(double k, double d, double Ts, double xi, double v, long t0):
    cdef long n = <long>floor((Ts - k) / t0 + 1e-12)
    if n < 1:
        return 0.0
    return 1.0 - (1.0 - exp(-xi * max(d - v * k, 0.0))) ** n


cdef long _flight_time(double d, long Ts, double xi, double v, long t0, double upper, double tol,
                       double* root, double* resid) nogil:
    cdef double u = upper
    cdef long up, k, best_k = -1, n_lo, n
    cdef double c, x, val, best_val = -1.0
    cdef double roots[8]
    cdef double anchors[10]
    cdef int nr, na = 2, a, i, b
    if Ts - t0 < u:
        u = Ts - t0
    up = <long>floor(u + 1e-9)
    root[0] = NAN
    resid[0] = NAN
    if up < 0:
        return -1
    c = xi * (d - Ts * v)
    anchors[0] = 0.0
    anchors[1] = <double>up
    nr = _roots(c, tol, roots)
    for i in range(nr):
        x = (d + log(1.0 - roots[i]) / xi) / v
        if x < 0.0 or x > up:
            continue
        if isnan(root[0]):
            root[0] = x
            resid[0] = _res(roots[i], c)
        anchors[na] = x
        na += 1
    # candidates are visited in ascending order so ties keep the smallest slot count
    cdef long cands[16 * 10]
    cdef int nc = 0
    for a in range(na):
        x = anchors[a]
        cands[nc] = <long>floor(x); nc += 1
        cands[nc] = <long>ceil(x); nc += 1
        n_lo = <long>floor((Ts - x) / t0)
        for b in range(-1, 3):
            cands[nc] = Ts - (n_lo + b) * t0
            nc += 1
    # insertion sort, tiny arrays
    cdef long tmp
    for i in range(1, nc):
        tmp = cands[i]
        b = i - 1
        while b >= 0 and cands[b] > tmp:
            cands[b + 1] = cands[b]
            b -= 1
        cands[b + 1] = tmp
    for i in range(nc):
        k = cands[i]
        if i > 0 and k == cands[i - 1]:
            continue
        if 0 <= k <= up:
            val = _factor(k, d, Ts, xi, v, t0)
            if val > best_val + 1e-15:
                best_k = k
                best_val = val
    return best_k


def flight_time(double d, long Ts, double xi, double v, long t0, double upper, double tol=1e-12):
    cdef double root, resid
    cdef long k = _flight_time(d, Ts, xi, v, t0, upper, tol, &root, &resid)
    return k, root, resid


def sensing_scan(start, hover, target, double xi, double v_model, double v_step, long t0,
                 double p_th, double age, long Tt, long remaining):
    cdef double sx = start[0], sy = start[1], sz = start[2]
    cdef double hx = hover[0], hy = hover[1], hz = hover[2]
    cdef double gx = target[0], gy = target[1], gz = target[2]
    cdef double L = sqrt((hx - sx) ** 2 + (hy - sy) ** 2 + (hz - sz) ** 2)
    cdef long reach = 0
    if L > 0:
        reach = <long>ceil(L / v_step - 1e-9)
    cdef double d0 = sqrt((gx - sx) ** 2 + (gy - sy) ** 2 + (gz - sz) ** 2)
    cdef long n_ts = remaining - Tt - t0 + 1
    if n_ts < 1:
        z = np.empty(0)
        return z, z.astype(np.int64), z.astype(np.int64), z.astype(np.int64)
    gain_a = np.full(n_ts, -np.inf)
    kf_a = np.full(n_ts, -1, dtype=np.int64)
    om_a = np.zeros(n_ts, dtype=np.int64)
    te_a = np.zeros(n_ts, dtype=np.int64)
    cdef double[::1] gain = gain_a
    cdef cnp.int64_t[::1] kf = kf_a
    cdef cnp.int64_t[::1] om = om_a
    cdef cnp.int64_t[::1] te = te_a
    cdef long j, Ts, k, w, ts_eff, span
    cdef double frac, px, py, pz, dk, P, root, resid
    with nogil:
        for j in range(n_ts):
            Ts = t0 + j
            k = _flight_time(d0, Ts, xi, v_model, t0, <double>reach, 1e-12, &root, &resid)
            if k < 0:
                continue
            w = (Ts - k) // t0
            if L > 0:
                frac = k * v_step / L
                if frac > 1.0:
                    frac = 1.0
            else:
                frac = 1.0
            px = sx + (hx - sx) * frac
            py = sy + (hy - sy) * frac
            pz = sz + (hz - sz) * frac
            dk = sqrt((gx - px) ** 2 + (gy - py) ** 2 + (gz - pz) ** 2)
            P = 1.0 - (1.0 - exp(-xi * dk)) ** w
            kf[j] = k
            om[j] = w
            ts_eff = k + w * t0
            te[j] = ts_eff
            span = ts_eff + Tt
            if P < p_th or span > remaining:
                continue
            gain[j] = P * (age + span) * (remaining - span) / span
    return gain_a, kf_a, om_a, te_a


cdef struct Chan:
    double fs, eta_l, eta_n, alpha, beta, H, pt, noise, bw, gth, rmin, h


cdef inline double _pathloss(double x, double y, double z, Chan* ch) nogil:
    cdef double dz = z - ch.H
    cdef double d = sqrt(x * x + y * y + dz * dz)
    cdef double s = dz / d
    if s > 1.0:
        s = 1.0
    elif s < -1.0:
        s = -1.0
    cdef double phi = asin(s) * 180.0 / M_PI
    cdef double pl = 1.0 / (1.0 + ch.alpha * exp(-ch.beta * (phi - ch.alpha)))
    return ch.fs + 20.0 * log10(d) + pl * ch.eta_l + (1.0 - pl) * ch.eta_n


cdef inline double _snr(double x, double y, double z, Chan* ch) nogil:
    return ch.pt / 10.0 ** (_pathloss(x, y, z, ch) / 10.0) / ch.noise


cdef inline double _rate(double x, double y, double z, Chan* ch) nogil:
    return ch.bw * log2(1.0 + _snr(x, y, z, ch))


def rate(double x, double y, double z, tuple chan):
    cdef Chan ch = _unpack(chan)
    return _rate(x, y, z, &ch)


cdef Chan _unpack(tuple c):
    cdef Chan ch
    ch.fs, ch.eta_l, ch.eta_n, ch.alpha, ch.beta, ch.H = c[0], c[1], c[2], c[3], c[4], c[5]
    ch.pt, ch.noise, ch.bw, ch.gth, ch.rmin, ch.h = c[6], c[7], c[8], c[9], c[10], c[11]
    return ch


def tx_rollout(start, double data_bits, tuple chan, double v_step, double h_min, double h_max,
               double slot, long max_slots):
    cdef Chan ch = _unpack(chan)
    cdef double x = start[0], y = start[1], z = start[2]
    cdef long cap = 1024, n = 1, it
    cdef double* buf = <double*>malloc(3 * cap * sizeof(double))
    cdef double* grown
    cdef long fly = 0, lam = 0
    cdef double bits = 0.0, min_snr = INFINITY, g, gx, gy, gz, gn, nx, ny, nz, rx, ry, rz, rr
    cdef double mx, my, mz, mm, h = ch.h
    cdef int done = 0
    if buf == NULL:
        raise MemoryError()
    buf[0] = x; buf[1] = y; buf[2] = z
    with nogil:
        for it in range(max_slots):
            g = _snr(x, y, z, &ch)
            if lam > 0 or g >= ch.gth:
                lam += 1
                bits += ch.bw * log2(1.0 + g) * slot
                if g < min_snr:
                    min_snr = g
            else:
                fly += 1
            gx = (_rate(x + h, y, z, &ch) - _rate(x - h, y, z, &ch)) / (2 * h)
            gy = (_rate(x, y + h, z, &ch) - _rate(x, y - h, z, &ch)) / (2 * h)
            gz = (_rate(x, y, z + h, &ch) - _rate(x, y, z - h, &ch)) / (2 * h)
            gn = sqrt(gx * gx + gy * gy + gz * gz)
            if gn > 0.0:
                nx = x + v_step * gx / gn
                ny = y + v_step * gy / gn
                nz = z + v_step * gz / gn
                nz = min(max(nz, h_min), h_max)
                rx = nx
                ry = ny
                rz = nz - ch.H
                rr = sqrt(rx * rx + ry * ry + rz * rz)
                if rr < ch.rmin:
                    if rr > 0.0:
                        nx = rx * ch.rmin / rr
                        ny = ry * ch.rmin / rr
                        nz = ch.H + rz * ch.rmin / rr
                    else:
                        nx = x
                        ny = y
                        nz = z
                    mx = nx - x
                    my = ny - y
                    mz = nz - z
                    mm = sqrt(mx * mx + my * my + mz * mz)
                    if mm > v_step:
                        nx = x + mx * v_step / mm
                        ny = y + my * v_step / mm
                        nz = z + mz * v_step / mm
                    nz = min(max(nz, h_min), h_max)
                x = nx
                y = ny
                z = nz
            if n == cap:
                cap *= 2
                grown = <double*>realloc(buf, 3 * cap * sizeof(double))
                if grown == NULL:
                    done = -1
                    break
                buf = grown
            buf[3 * n] = x; buf[3 * n + 1] = y; buf[3 * n + 2] = z
            n += 1
            if lam > 0 and bits >= data_bits:
                done = 1
                break
    if done < 0:
        free(buf)
        raise MemoryError()
    pos = np.empty((n, 3))
    cdef double[:, ::1] pv = pos
    cdef long i
    for i in range(n):
        pv[i, 0] = buf[3 * i]; pv[i, 1] = buf[3 * i + 1]; pv[i, 2] = buf[3 * i + 2]
    free(buf)
    if done == 1:
        return fly, lam, pos, bits, min_snr
    if lam == 0:
        return -1, 0, pos, bits, min_snr
    return fly, -1, pos, bits, min_snr


def dp_sweep(tau, rewards, long T):
    cdef cnp.int64_t[::1] tv = np.ascontiguousarray(tau, dtype=np.int64)
    cdef double[:, ::1] rv = np.ascontiguousarray(rewards, dtype=np.float64)
    cdef long N = tv.shape[0]
    best_a = np.zeros(T + 1)
    pick_a = np.full(T + 1, -1, dtype=np.int64)
    cdef double[::1] best = best_a
    cdef cnp.int64_t[::1] pick = pick_a
    cdef long s, i, t, choice
    cdef double b, r, cand
    with nogil:
        for s in range(1, T + 1):
            b = best[s - 1]
            choice = -1
            for i in range(N):
                t = s - tv[i]
                if t < 0:
                    continue
                r = rv[i, t]
                if r == -INFINITY:
                    continue
                cand = best[t] + r
                if cand > b:
                    b = cand
                    choice = i
            best[s] = b
            pick[s] = choice
    chosen = []
    s = T
    while s > 0:
        i = pick[s]
        if i < 0:
            s -= 1
        else:
            s -= tv[i]
            chosen.append((int(i), int(s)))
    chosen.reverse()
    return float(best[T]), chosen


def dp_sweep_history(tau, off, prob, long T):
    cdef cnp.int64_t[::1] tv = np.ascontiguousarray(tau, dtype=np.int64)
    cdef cnp.int64_t[::1] ov = np.ascontiguousarray(off, dtype=np.int64)
    cdef double[::1] pv = np.ascontiguousarray(prob, dtype=np.float64)
    cdef long N = tv.shape[0]
    best_a = np.zeros(T + 1)
    pick_a = np.full(T + 1, -1, dtype=np.int64)
    last_a = np.zeros((T + 1, N))
    cdef double[::1] best = best_a
    cdef cnp.int64_t[::1] pick = pick_a
    cdef double[:, ::1] last = last_a
    cdef long s, i, j, t, choice
    cdef double b, cand
    with nogil:
        for s in range(1, T + 1):
            b = best[s - 1]
            choice = -1
            for i in range(N):
                t = s - tv[i]
                if t < 0:
                    continue
                cand = best[t] + pv[i] * (t + ov[i] - last[t, i]) * (T + 1 - s)
                if cand > b:
                    b = cand
                    choice = i
            best[s] = b
            pick[s] = choice
            if choice < 0:
                for j in range(N):
                    last[s, j] = last[s - 1, j]
            else:
                t = s - tv[choice]
                for j in range(N):
                    last[s, j] = last[t, j]
                last[s, choice] = pv[choice] * (t + ov[choice]) + (1.0 - pv[choice]) * last[t, choice]
    chosen = []
    s = T
    while s > 0:
        i = pick[s]
        if i < 0:
            s -= 1
        else:
            s -= tv[i]
            chosen.append((int(i), int(s)))
    chosen.reverse()
    return float(best[T]), chosen
