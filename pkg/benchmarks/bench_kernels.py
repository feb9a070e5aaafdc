"""Time the numpy and compiled kernel backends on the same workloads.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from emothresh._backend import BACKENDS
from emothresh.emo import EmoParams, optimize
from emothresh.image_io import normalize
from emothresh.objectives import HistogramObjective
from emothresh.suite import load_suite


def workloads(dist, backend):
    obj = HistogramObjective("otsu", dist, backend=backend)
    kern = obj.kernels
    rng = np.random.default_rng(0)
    X = rng.random((50, 5)) * 255
    f = obj(X)
    q = np.exp(-(f.max() - f) / max(f.max() - f.min(), 1e-12))
    lam, up = rng.random((50, 5, 10)), rng.random((50, 5, 10)) < 0.5
    lo, hi = np.zeros(5), np.full(5, 255.0)
    return {
        "evaluate 50x5": lambda: obj(X),
        "forces 50x5": lambda: kern.forces(X, f, q),
        "local search 50x5x10": lambda: obj.local_search(X, f, lam, up, 0.025 * (hi - lo), lo, hi),
        "exhaustive k=2": lambda: obj.exhaustive(2),
        "optimize k=3 (1 run)": lambda: optimize("otsu", dist, 3, EmoParams(), seed=1, backend=backend),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    dist = normalize(load_suite()["trimodal"])
    names = sorted(BACKENDS)
    table = {}
    for name in names:
        for label, fn in workloads(dist, name).items():
            n, _ = timeit.Timer(fn).autorange()
            best = min(timeit.repeat(fn, number=n, repeat=args.repeat)) / n
            table.setdefault(label, {})[name] = best
    print(f"{'workload':24s}" + "".join(f"{n:>14s}" for n in names) + ("      speedup" if len(names) > 1 else ""))
    for label, row in table.items():
        line = f"{label:24s}" + "".join(f"{row[n] * 1e3:11.3f} ms" for n in names)
        if len(names) > 1:
            line += f"{row['python'] / row['cython']:12.1f}x"
        print(line)


if __name__ == "__main__":
    main()
