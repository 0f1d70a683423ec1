"""Time the compiled kernels against the pure-Python fallback on representative inputs.

    python benchmarks/bench_kernels.py [--repeat 3]

Prints one line per kernel: best-of-N wall time for each backend and the speedup.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from uavaoi import kernels
from uavaoi.scenario import make_scenario
from uavaoi.scheduler import canonical_start
from uavaoi.world import hover_point


def cases(sc):
    sp, kin = sc.sensing, sc.kinematics
    task = sc.tasks[0]
    start = canonical_start(sc)
    hover = tuple(hover_point(task, kin))
    target = tuple(task.target_position)
    ch = kernels.pack_channel(sc.channel)
    rng = np.random.default_rng(0)
    N, T = 5, 20_000
    tau = rng.integers(200, 1500, N)
    rewards = rng.uniform(0, 1e6, (N, T + 1))
    off = tau // 2
    prob = rng.uniform(0.9, 1.0, N)
    return {
        "flight_time x1000": lambda k: [k.flight_time(80.0, 400 + j, sp.xi, sc.v_model, sp.t0, 400.0)
                                        for j in range(1000)],
        "sensing_scan T=4000": lambda k: k.sensing_scan(start, hover, target, sp.xi, sc.v_model, sc.v_step,
                                                        sp.t0, sp.p_th, 0.0, 300, 4000),
        "tx_rollout 40 Mb": lambda k: k.tx_rollout(hover, 4e7, ch, sc.v_step, kin.h_min, kin.h_max,
                                                   sc.world.slot_duration, 50_000),
        "dp_sweep N=5 T=20000": lambda k: k.dp_sweep(tau, rewards, T),
        "dp_sweep_history N=5 T=20000": lambda k: k.dp_sweep_history(tau, off, prob, T),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    sc = make_scenario(layout_seed=0)
    backends = [("python", kernels.python_backend)]
    if kernels.compiled_backend is not None:
        backends.append(("cython", kernels.compiled_backend))
    else:
        print("compiled kernels not built; timing the Python fallback only")
    print(f"{'kernel':32s}" + "".join(f"{name:>12s}" for name, _ in backends) + "     speedup")
    for label, fn in cases(sc).items():
        times = [min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)) for _, k in backends]
        line = f"{label:32s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) == 2:
            line += f"  {times[0] / times[1]:9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
