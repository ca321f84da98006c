"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel is timed on both backends with identical inputs. The outputs
are checked for agreement before any timing is reported.
"""
from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from psalink import kernels


def _cases():
    r = 1000
    taus = np.full(r + 1, math.exp(-0.05 * 0.1))
    gains = 1.0 / taus[:-1]
    buf = np.zeros(r + 1)
    theta = np.linspace(0.2, 1.0, r)
    gout = np.zeros(r)
    return {
        "fold_link R=1000": lambda m: m.fold_link(taus, gains, 200.0, 0.0, 0.5, 0.5, buf),
        "project_gains R=1000": lambda m: m.project_gains(taus, theta, 200.0, 0.0, 0.5, 0.5, 201.0, gout),
        "rk4 amplitude 1e4 steps": lambda m: m.rk4_integrate(m.PROFILE_CONSTANT, 0.05, 0.05, 0.0, 0.0, 100.0,
                                                             10_000, 200.0, 0.0, 0.5, 0.5),
        "rk4 power 1e4 steps": lambda m: m.rk4_integrate(m.PROFILE_POWER, 0.05, 0.0, 100.0, 200.0, 100.0,
                                                         10_000, 200.0, 0.0, 0.5, 0.5),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    if len(backends) < 2:
        print("compiled backend not built; only the Python kernels are available")
    print(f"{'kernel':<26}" + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}")
    for label, fn in _cases().items():
        outs = [np.asarray(fn(m), dtype=float) for m in backends.values()]
        for o in outs[1:]:
            if not np.allclose(o, outs[0], rtol=1e-12, atol=0.0):
                raise SystemExit(f"{label}: backends disagree: {outs}")
        times = []
        for m in backends.values():
            n, _ = timeit.Timer(lambda: fn(m)).autorange()
            times.append(min(timeit.repeat(lambda: fn(m), number=n, repeat=args.repeat)) / n)
        speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else ""
        print(f"{label:<26}" + "".join(f"{t * 1e6:>11.1f} us" for t in times) + speed)


if __name__ == "__main__":
    main()
