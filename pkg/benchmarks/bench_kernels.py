"""Compare the compiled kernels with the numpy fallback.

Each kernel is timed directly with both implementations on identical inputs,
and one end-to-end solve is timed per backend in a fresh interpreter (the
backend is chosen at import time, see ``FRACKIRCHHOFF_PURE_PYTHON``).

    python benchmarks/bench_kernels.py [--repeat 5] [--n 4096]
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from frackirchhoff._kernels import _fallback

try:
    from frackirchhoff._kernels import _core
except ImportError:
    _core = None

SOLVE_SNIPPET = """
import json, time
from frackirchhoff import BACKEND, ProblemParams, solve_mountain_pass
from frackirchhoff.fiber import ScalarQuartic, classify_fiber
from frackirchhoff.variational import Regime
t0 = time.perf_counter()
rep = solve_mountain_pass(ProblemParams(1, 1, 1, 0.9, 4.5, 4.8, 1.0))
t1 = time.perf_counter()
for k in range(2000):
    classify_fiber(ScalarQuartic(1.0, 1.0, 0.01 + 1e-5 * k, 0.01, 5.0, 1.0).to_profile(), Regime.MIXED)
t2 = time.perf_counter()
print(json.dumps({"backend": BACKEND, "solve": t1 - t0, "classify_2000": t2 - t1, "level": rep.level}))
"""


def _cases(n):
    rng = np.random.default_rng(0)
    u = rng.normal(size=n)
    w = rng.uniform(size=n)
    ext = rng.normal(size=n + 4)
    x = rng.uniform(0.0, (n - 1) * 0.01, size=n)
    coef, expo = (1.0, 1.0, -1.0, -0.01), (1.8, 3.6, 0.75, 4.05)
    return {
        "power_sums": lambda m: m.power_sums(u, w, 3.0, 4.7),
        "power_terms": lambda m: m.power_terms(u, 1.5, 3.0, 4.7),
        "lagrange4": lambda m: m.lagrange4(ext, 0.01, x),
        "fiber_eval": lambda m: m.fiber_eval(coef, expo, 1, 0.3),
        "fiber_root": lambda m: m.fiber_root(coef, expo, 0, -1.0, 2.0, 1e-12, 200),
    }


def _best(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def kernel_table(n, repeat):
    rows = []
    for name, call in _cases(n).items():
        t_py = _best(lambda: call(_fallback), repeat)
        t_cy = _best(lambda: call(_core), repeat) if _core is not None else float("nan")
        rows.append((name, t_py, t_cy))
    return rows


def end_to_end():
    out = {}
    for label, env in (("cython", {}), ("python", {"FRACKIRCHHOFF_PURE_PYTHON": "1"})):
        proc = subprocess.run(
            [sys.executable, "-c", SOLVE_SNIPPET], env=dict(os.environ, **env),
            capture_output=True, text=True, check=True,
        )
        out[label] = json.loads(proc.stdout)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=4096)
    args = ap.parse_args(argv)

    if _core is None:
        print("compiled kernels not built; only the fallback is timed")
    print(f"{'kernel':<12} {'fallback [us]':>14} {'compiled [us]':>14} {'speed-up':>9}")
    for name, t_py, t_cy in kernel_table(args.n, args.repeat):
        print(f"{name:<12} {t_py * 1e6:>14.2f} {t_cy * 1e6:>14.2f} {t_py / t_cy:>8.1f}x")

    res = end_to_end()
    print()
    print(f"{'backend':<8} {'solve [s]':>10} {'2000 fibers [s]':>16}  level")
    for label, r in res.items():
        print(f"{r['backend']:<8} {r['solve']:>10.3f} {r['classify_2000']:>16.3f}  {r['level']:.15g}")


if __name__ == "__main__":
    main()
