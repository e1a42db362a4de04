"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script
(``python tests/test_acceptance.py``), which prints the eleven lines and
exits nonzero if any check fails.
"""

from __future__ import annotations

import csv
import io
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.stats import spearmanr

from circuitmc.baselines import riegel_predict
from circuitmc.bench import time_method
from circuitmc.cli import main as cli_main
from circuitmc.core import DegenerateMinorError, MaskedMatrix, masked_mse
from circuitmc.matrixio import write_matrix_csv
from circuitmc.methods import MethodOptions
from circuitmc.rank1 import faccro_all
from circuitmc.rankr import ClosureConfig, minor_weight, solve_minor, vmclosure_all
from circuitmc.simgen import SimConfig, draw
from circuitmc.spectral import (
    RefineConfig,
    refine,
    refine_trace,
    singular_vector_alignment,
    smcb,
    spectral_gaps,
)

SEEDS = range(20)


def _max_rel(est, truth, where):
    return float(np.max(np.abs(est[where] - truth[where]) / np.abs(truth[where])))


def noiseless_rank_one():
    start = time.perf_counter()
    worst, cells = 0.0, 0
    for seed in SEEDS:
        d = draw(SimConfig(30, 30, 1, 0.7, 0.0, seed=seed))
        out = faccro_all(d.observed)
        ev = ~d.observed.mask & ~out.unestimable
        cells += int(ev.sum())
        worst = max(worst, _max_rel(out.values, d.truth, ev))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and elapsed < 5.0
    return ok, f"max rel err {worst:.2e} over {cells} cells, {elapsed:.2f} s"


def noiseless_rank_r():
    start = time.perf_counter()
    worst, cells = 0.0, 0
    cfg = ClosureConfig(rank=2, iterations=100)
    for seed in SEEDS:
        d = draw(SimConfig(20, 20, 2, 0.9, 0.0, seed=seed))
        out = vmclosure_all(d.observed, cfg)
        ev = ~d.observed.mask & (out.rank_used == 2)
        cells += int(ev.sum())
        worst = max(worst, _max_rel(out.values, d.truth, ev))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and elapsed < 30.0
    return ok, f"max rel err {worst:.2e} over {cells} cells, {elapsed:.2f} s"


def _scan_root(B):
    """Independent root of x -> det(B with hole x): grid scan for a sign change, then bisection."""
    def f(x):
        C = B.copy()
        C[-1, -1] = x
        return np.linalg.det(C)

    bound = 10.0 * (np.abs(B[:-1, :]).max() + np.abs(B[:, :-1]).max() + 1.0) ** 2
    grid = np.linspace(-bound, bound, 4001)
    vals = np.array([f(x) for x in grid])
    k = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if k.size == 0:
        return None
    return brentq(f, grid[k[0]], grid[k[0] + 1], xtol=1e-14, rtol=1e-15)


def minor_oracle():
    rng = np.random.default_rng(2024)
    worst_truth = worst_scan = 0.0
    degenerate = unscanned = 0
    for _ in range(500):
        r = int(rng.integers(1, 4))
        T = rng.standard_normal((r + 1, r)) @ rng.standard_normal((r, r + 1))
        try:
            *_, x = solve_minor(T)
        except DegenerateMinorError:
            degenerate += 1
            continue
        worst_truth = max(worst_truth, abs(x - T[-1, -1]) / max(abs(T[-1, -1]), 1e-300))
        root = _scan_root(T)
        if root is None:
            unscanned += 1
            continue
        worst_scan = max(worst_scan, abs(x - root) / max(1.0, abs(root)))
    ok = worst_truth < 1e-8 and worst_scan < 1e-6 and unscanned == 0
    return ok, (
        f"truth rel err {worst_truth:.2e}, scan err {worst_scan:.2e}, "
        f"{degenerate} degenerate, {unscanned} unbracketed"
    )


def weight_spot_values():
    add = minor_weight(-12.0, -10.0, "additive")
    mult = minor_weight(-12.0, -10.0, "multiplicative")
    ok = add == 3.5 and mult == 7 / 12
    return ok, f"additive {add!r}, multiplicative {mult!r}"


def taylor_proxy_ranking():
    rng = np.random.default_rng(123)
    deltas, stds = [], []
    for _ in range(200):
        U = np.abs(rng.standard_normal((3, 2)))
        V = np.abs(rng.standard_normal((3, 2)))
        T = U @ V.T
        B = T * np.exp(0.01 * rng.standard_normal(T.shape))
        a0, a1, _ = solve_minor(B)
        deltas.append(minor_weight(a0, a1, "additive"))
        xs = [solve_minor(T * np.exp(0.01 * rng.standard_normal(T.shape)))[2] for _ in range(50)]
        stds.append(np.std(xs))
    rho = float(spearmanr(deltas, stds).statistic)
    return rho > 0.5, f"Spearman {rho:.3f}"


def spectral_separation():
    gap_wins = align_wins = 0
    for seed in SEEDS:
        d = draw(SimConfig(50, 50, 2, 0.5, 0.0, seed=seed))
        F = faccro_all(d.observed).values
        M = d.observed.mean_fill()
        gap_wins += spectral_gaps(F, 1)[0] > spectral_gaps(M, 1)[0]
        align_wins += singular_vector_alignment(F, d.truth, 2) > singular_vector_alignment(M, d.truth, 2)
    n = len(SEEDS)
    ok = gap_wins >= 0.9 * n and align_wins >= 0.9 * n
    return ok, f"first gap larger {gap_wins}/{n}, alignment higher {align_wins}/{n}"


def initialisation_ordering():
    wins = better = worse = 0
    cfg = RefineConfig(rank=2)
    for seed in SEEDS:
        d = draw(SimConfig(50, 50, 2, 0.6, 0.1, seed=seed))
        A = d.observed
        truth = MaskedMatrix.full(d.truth)
        ev = ~A.mask
        a = masked_mse(truth, refine(A, smcb(A, faccro_all(A).values, 2), cfg), ev)
        b = masked_mse(truth, refine(A, A.mean_fill(), cfg), ev)
        wins += a <= b
        better += a < b * (1 - 1e-3)
        worse += a > b * (1 + 1e-3)
    n = len(SEEDS)
    return wins >= 0.8 * n, (
        f"smcb(faccro) init <= mean-fill init {wins}/{n}; "
        f"by more than 0.1%: better {better}, worse {worse}"
    )


def runtime_ordering():
    d = draw(SimConfig(150, 150, 2, 0.5, 0.0, seed=1))
    opts = MethodOptions(rank=2, seed=1)
    t_smcb = time_method("smcb(faccro)", d.observed, opts, repeats=3)
    t_svt = time_method("svt", d.observed, opts, repeats=3)
    t_os = time_method("optspace-like", d.observed, opts, repeats=3)
    return t_smcb < t_svt, f"smcb(faccro) {t_smcb:.3f} s, svt {t_svt:.3f} s, optspace-like {t_os:.3f} s"


def refine_monotone():
    rng = np.random.default_rng(99)
    worst = 0.0
    sweeps = 0
    for k in range(20):
        m, n = (int(v) for v in rng.integers(10, 40, size=2))
        r = int(rng.integers(1, 4))
        kind = "multiplicative" if k % 2 else "additive"
        d = draw(SimConfig(m, n, r, float(rng.uniform(0.3, 0.9)), float(rng.uniform(0, 0.3)), kind, seed=k))
        init = d.observed.mean_fill() if k % 3 else rng.standard_normal((m, n))
        res = refine_trace(d.observed, init, RefineConfig(rank=r + k % 2, max_iters=100, rel_tol=1e-12))
        obj = np.array(res.objective)
        sweeps += len(obj) - 1
        rises = (obj[1:] - obj[:-1]) / np.maximum(obj[:-1], 1e-300)
        worst = max(worst, float(rises.max(initial=-np.inf)))
    return worst <= 1e-12, f"largest relative rise {worst:.2e} over {sweeps} sweeps"


def _strip_runtime(text):
    rows = list(csv.reader(io.StringIO(text)))
    for col in ("runtime_seconds", "seconds"):
        if rows and col in rows[0]:
            k = rows[0].index(col)
            return [r[:k] + r[k + 1 :] for r in rows]
    return rows


def cli_determinism():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        d = draw(SimConfig(15, 6, 2, 0.8, 0.05, seed=3))
        data = tmp / "data.csv"
        write_matrix_csv(data, d.observed)
        commands = {
            "simulate": ["simulate", "--rows", "10", "--cols", "8", "--noise-level", "0.1"],
            "complete": ["complete", str(data), "--method", "vmclosure", "--rank", "2", "--iterations", "20"],
            "sweep-accuracy": ["sweep-accuracy", "--rows", "12", "--cols", "12", "--values", "0.5,0.8",
                               "--trials", "2", "--methods", "faccro,svt,mos(smcb+faccro)"],
            "sweep-timing": ["sweep-timing", "--sizes", "12,16", "--methods", "faccro,svt", "--repeats", "1"],
            "eval-real": ["eval-real", str(data), "--deletions", "10", "--methods",
                          "faccro,optspace-like,riegel", "--distances", "400,800,1500,3000,5000,10000",
                          "--bootstrap", "100"],
            "spectrum": ["spectrum", "--rows", "20", "--cols", "20", "--gaps", "4", "--trials", "2"],
        }
        differing = []
        for name, args in commands.items():
            outs = []
            for run in range(2):
                path = tmp / f"{name}-{run}.csv"
                if cli_main([*args, "--seed", "7", "--out", str(path)]) != 0:
                    differing.append(f"{name} (exit)")
                    break
                outs.append(_strip_runtime(path.read_text()))
            else:
                if outs[0] != outs[1]:
                    differing.append(name)
    ok = not differing
    return ok, "all subcommands identical" if ok else "differ: " + ", ".join(differing)


def riegel_closed_form():
    got = riegel_predict(1200.0, 5000.0, 10000.0)
    want = 1200.0 * 2.0**1.06
    rel = abs(got - want) / want
    t, d = 1200.0, 5000.0
    two = riegel_predict(riegel_predict(t, d, 2 * d), 2 * d, 4 * d)
    once = riegel_predict(t, d, 4 * d)
    comp = abs(two - once) / once
    return rel < 1e-9 and comp < 1e-9, f"prediction {got:.4f} s (rel err {rel:.1e}), composition rel err {comp:.1e}"


CRITERIA = [
    ("1 noiseless rank-1 exactness", noiseless_rank_one),
    ("2 noiseless rank-2 exactness", noiseless_rank_r),
    ("3 minor solver oracle", minor_oracle),
    ("4 weighting spot values", weight_spot_values),
    ("5 proxy ranking validity", taylor_proxy_ranking),
    ("6 spectral separation", spectral_separation),
    ("7 initialisation ordering", initialisation_ordering),
    ("8 runtime ordering", runtime_ordering),
    ("9 refinement monotonicity", refine_monotone),
    ("10 CLI determinism", cli_determinism),
    ("11 Riegel closed form", riegel_closed_form),
]


def _line(label, ok, detail):
    return f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"


@pytest.mark.parametrize("label, check", CRITERIA, ids=[c[0].split(" ", 1)[1].replace(" ", "-") for c in CRITERIA])
def test_criterion(label, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(label, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for label, check in CRITERIA:
        ok, detail = check()
        results.append(ok)
        print(_line(label, ok, detail), flush=True)
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
