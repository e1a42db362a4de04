"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--skip-end-to-end]

Prints one CSV row per case: case, size, cython_s, python_s, speedup.
The end-to-end rows run ``vmclosure_all`` in a subprocess per backend,
with ``CIRCUITMC_PURE_PYTHON=1`` forcing the fallback.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from circuitmc import _fallback

try:
    from circuitmc import _kernels
except ImportError:
    sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation` first")

END_TO_END = """
import time
from circuitmc.rankr import ClosureConfig, vmclosure_all
from circuitmc.simgen import SimConfig, draw
d = draw(SimConfig({n}, {n}, 2, 0.8, 0.05, seed=1))
cfg = ClosureConfig(rank={r}, iterations=100)
vmclosure_all(d.observed, cfg)
best = float("inf")
for _ in range({repeat}):
    t = time.perf_counter()
    vmclosure_all(d.observed, cfg)
    best = min(best, time.perf_counter() - t)
print(best)
"""


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def hole_det_cases(repeat):
    rng = np.random.default_rng(0)
    for s in (3, 4, 6):
        for count in (100, 10_000):
            blocks = rng.standard_normal((count, s, s))
            yield (
                f"hole_dets s={s}",
                count,
                best_of(lambda: _kernels.hole_dets(blocks), repeat),
                best_of(lambda: _fallback.hole_dets(blocks), repeat),
            )


def enumeration_cases(repeat):
    rng = np.random.default_rng(1)
    for n, r in ((30, 2), (60, 2), (25, 3)):
        mask = (rng.random((n, n)) < 0.8).astype(np.uint8)
        rows = np.flatnonzero(mask[:, 0]).astype(np.intp)
        cols = np.flatnonzero(mask[0]).astype(np.intp)
        yield (
            f"enumerate_minors r={r}",
            n,
            best_of(lambda: _kernels.enumerate_minors(mask, rows, cols, r), repeat),
            best_of(lambda: _fallback.enumerate_minors(mask, rows, cols, r), repeat),
        )


def end_to_end(n, r, repeat, pure):
    env = dict(os.environ)
    env.pop("CIRCUITMC_PURE_PYTHON", None)
    if pure:
        env["CIRCUITMC_PURE_PYTHON"] = "1"
    code = END_TO_END.format(n=n, r=r, repeat=repeat)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--skip-end-to-end", action="store_true")
    args = parser.parse_args(argv)

    print("case,size,cython_s,python_s,speedup")
    rows = [*hole_det_cases(args.repeat), *enumeration_cases(args.repeat)]
    if not args.skip_end_to_end:
        for n, r in ((20, 2), (40, 2), (30, 3)):
            rows.append(
                (
                    f"vmclosure_all r={r}",
                    n,
                    end_to_end(n, r, 3, pure=False),
                    end_to_end(n, r, 3, pure=True),
                )
            )
    for case, size, fast, slow in rows:
        print(f"{case},{size},{fast:.6f},{slow:.6f},{slow / fast:.2f}", flush=True)


if __name__ == "__main__":
    main()
