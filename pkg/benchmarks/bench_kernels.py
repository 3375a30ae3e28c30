"""Compare the compiled and numpy likelihood kernels.

    python benchmarks/bench_kernels.py [--sizes 1000,20000,50000,200000] [--repeat 50]

Reports per-call time for each backend, their relative agreement, and the
wall time of one full point fit on 50,000 pitches with each backend.
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from zonefit import _pykernels, kernels
from zonefit.fit import FitConfig, fit
from zonefit.synth import SynthConfig, generate
from zonefit.zone import ZoneParams

try:
    from zonefit import _ckernels
except ImportError:
    _ckernels = None

PARAMS = (0.02, 2.48, 0.91, 1.1, 19.0, 7.5)
TRUE = ZoneParams(0.0, 2.5, 0.9, 1.11, 20.0, 8.0)


def best_time(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def sample(n: int):
    rng = np.random.default_rng(n)
    x = rng.uniform(-2, 2, n)
    y = rng.uniform(0.5, 4.5, n)
    sign = np.where(rng.random(n) < 0.4, 1.0, -1.0)
    return x, y, sign


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1000,20000,50000,200000")
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--threads", default="1,2,4")
    ap.add_argument("--skip-fit", action="store_true")
    args = ap.parse_args()

    print(f"cpus: {os.cpu_count()}  default backend: {kernels.BACKEND}")
    if _ckernels is None:
        print("compiled kernel not built; only the numpy backend is available")
    sizes = [int(s) for s in args.sizes.split(",")]
    threads = [int(t) for t in args.threads.split(",")]

    header = f"{'n':>8} {'numpy ms':>10}"
    if _ckernels is not None:
        header += "".join(f" {f'ext t={t} ms':>12}" for t in threads) + f" {'speedup':>8} {'rel diff':>9}"
    print(header)
    for n in sizes:
        x, y, sign = sample(n)
        t_py = best_time(lambda: _pykernels.nll(x, y, sign, None, *PARAMS), args.repeat)
        line = f"{n:>8} {1e3 * t_py:>10.3f}"
        if _ckernels is not None:
            before = _ckernels.get_num_threads()
            ext_times = []
            for t in threads:
                _ckernels.set_num_threads(t)
                ext_times.append(best_time(lambda: _ckernels.nll(x, y, sign, None, *PARAMS), args.repeat))
            _ckernels.set_num_threads(before)
            a = _pykernels.nll(x, y, sign, None, *PARAMS)
            b = _ckernels.nll(x, y, sign, None, *PARAMS)
            line += "".join(f" {1e3 * t:>12.3f}" for t in ext_times)
            line += f" {t_py / min(ext_times):>7.2f}x {abs(a - b) / abs(a):>9.1e}"
        print(line)

    if args.skip_fit:
        return
    d = generate(SynthConfig(TRUE, n=50000, seed=42))
    cfg = FitConfig(n_bootstrap=0)
    backends = [("numpy", _pykernels.nll)] + ([("compiled", _ckernels.nll)] if _ckernels else [])
    original = kernels.nll
    try:
        for name, fn in backends:
            kernels.nll = fn
            start = time.perf_counter()
            res = fit(d, cfg)
            elapsed = time.perf_counter() - start
            print(f"full fit, 50k pitches, {name:>8}: {elapsed:6.2f} s  ({res.n_evals} evaluations)")
    finally:
        kernels.nll = original


if __name__ == "__main__":
    main()
