"""Command-line entry point: ``circuitmc <subcommand> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench
from .baselines import SvtConfig
from .core import CompletionError
from .matrixio import (
    format_matrix_csv,
    format_records,
    read_matrix_csv,
    write_mask_csv,
    write_matrix_csv,
)
from .methods import MethodOptions, parse_method, parse_methods, run_method
from .simgen import SimConfig, draw

log = logging.getLogger("circuitmc")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _names(text: str) -> list[str]:
    # split on commas outside parentheses
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


def _weighting(text: str) -> str:
    return {"add": "additive", "mult": "multiplicative"}.get(text, text)


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    g.add_argument("--out", type=Path, default=None, help="output CSV path (default stdout)")
    g.add_argument("--trials", type=int, default=20, help="trials per sweep point (default 20)")
    g.add_argument("--header", action="store_true", help="input matrix CSV has a header line")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _sim_flags(p: argparse.ArgumentParser, rows=50, cols=50, rank=2, p_obs=0.5, eps=0.0):
    p.add_argument("--rows", type=int, default=rows)
    p.add_argument("--cols", type=int, default=cols)
    p.add_argument("--rank", type=int, default=rank, help="rank of the simulated truth")
    p.add_argument("--observe-prob", type=float, default=p_obs)
    p.add_argument("--noise-level", type=float, default=eps)
    p.add_argument(
        "--noise-kind", choices=["multiplicative", "additive"], default="multiplicative"
    )


def _method_flags(p: argparse.ArgumentParser):
    p.add_argument(
        "--method-rank", type=int, default=None,
        help="rank used by the methods (default: estimated from the spectrum)",
    )
    p.add_argument("--max-rank", type=int, default=10)
    p.add_argument("--iterations", type=int, default=100, help="minors per entry for vmclosure")
    p.add_argument("--weighting", choices=["add", "mult", "additive", "multiplicative"], default=None)
    p.add_argument("--svt-max-iters", type=int, default=300)


def _options(args, data_positive: bool = True) -> MethodOptions:
    weighting = _weighting(args.weighting) if args.weighting else (
        "multiplicative" if data_positive else "additive"
    )
    distances = tuple(_floats(args.distances)) if getattr(args, "distances", None) else None
    return MethodOptions(
        rank=args.method_rank,
        max_rank=args.max_rank,
        iterations=args.iterations,
        weighting_mode=weighting,
        svt=SvtConfig(max_iters=args.svt_max_iters),
        distances=distances,
        seed=args.seed,
    )


def _emit(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)


def cmd_simulate(args) -> None:
    config = SimConfig(
        rows=args.rows, cols=args.cols, rank=args.rank, observe_prob=args.observe_prob,
        noise_level=args.noise_level, noise_kind=args.noise_kind, seed=args.seed,
    )
    sim = draw(config)
    _emit(args, format_matrix_csv(sim.observed))
    if args.mask_out:
        write_mask_csv(args.mask_out, sim.observed.mask)
    if args.truth_out:
        write_matrix_csv(args.truth_out, sim.truth)


def cmd_complete(args) -> None:
    A = read_matrix_csv(args.input, header=args.header)
    name = args.method
    if args.init and name in ("smcb", "mos"):
        name = f"{name}({args.init})"
    spec = parse_method(name)
    if args.rank is not None:
        args.method_rank = args.rank
    positive = bool((A.values[A.mask] > 0).all())
    out = run_method(spec, A, _options(args, positive))
    _emit(args, format_matrix_csv(out))


def _sweep_options(args) -> MethodOptions:
    if args.method_rank is None and not args.estimate_rank:
        args.method_rank = args.rank
    return _options(args)


def cmd_sweep_accuracy(args) -> None:
    base = SimConfig(
        rows=args.rows, cols=args.cols, rank=args.rank, observe_prob=args.observe_prob,
        noise_level=args.noise_level, noise_kind=args.noise_kind, seed=args.seed,
    )
    spec = bench.SweepSpec(
        axis=args.axis,
        values=_floats(args.values),
        base_config=base,
        methods=_names(args.methods),
        trials=args.trials,
        seed=args.seed,
        options=_sweep_options(args),
        p_means=args.p_means,
        jobs=args.jobs,
    )
    _emit(args, format_records(bench.run_accuracy_sweep(spec)))


def cmd_sweep_timing(args) -> None:
    template = SimConfig(
        rows=2, cols=2, rank=args.rank, observe_prob=args.observe_prob,
        noise_level=args.noise_level, noise_kind=args.noise_kind, seed=args.seed,
    )
    sizes = [int(s) for s in _floats(args.sizes)]
    records = bench.run_timing_sweep(
        sizes, template, _names(args.methods), seed=args.seed,
        options=_sweep_options(args), repeats=args.repeats,
    )
    _emit(args, bench.format_timing_csv(records))


def cmd_eval_real(args) -> None:
    A = read_matrix_csv(args.input, header=args.header)
    methods = _names(args.methods)
    parse_methods(methods)
    distances = _floats(args.distances) if args.distances else None
    positive = bool((A.values[A.mask] > 0).all())
    records = bench.run_realdata_eval(
        A, args.deletions, methods, distances=distances, seed=args.seed,
        options=_options(args, positive), tag=Path(args.input).stem,
        bootstrap_iterations=args.bootstrap,
    )
    _emit(args, format_records(records))


def cmd_spectrum(args) -> None:
    config = SimConfig(
        rows=args.rows, cols=args.cols, rank=args.rank, observe_prob=args.observe_prob,
        noise_level=args.noise_level, noise_kind=args.noise_kind, seed=args.seed,
    )
    rows = bench.run_spectrum_report(
        config, _names(args.inits), trials=args.trials, gaps=args.gaps, seed=args.seed,
        k=args.vector, options=_options(args),
    )
    _emit(args, bench.format_spectrum_csv(rows))


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(
        prog="circuitmc",
        description="Low-rank matrix completion by determinantal circuits, with benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="draw a synthetic masked matrix")
    _sim_flags(p)
    p.add_argument("--mask-out", type=Path, default=None, help="write the 0/1 mask here")
    p.add_argument("--truth-out", type=Path, default=None, help="write the noiseless truth here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("complete", parents=[common], help="complete a matrix CSV")
    p.add_argument("input", type=Path)
    p.add_argument("--method", default="faccro")
    p.add_argument("--init", default=None, help="initialiser for smcb/mos, e.g. faccro or smcb+faccro")
    p.add_argument("--rank", type=int, default=None, help="target rank (default: estimated)")
    p.add_argument("--distances", default=None, help="comma-separated column distances for riegel")
    _method_flags(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("sweep-accuracy", parents=[common], help="MSE over a parameter sweep")
    _sim_flags(p)
    p.add_argument("--axis", choices=bench.AXES, default="observe_prob")
    p.add_argument("--values", default="0.3,0.5,0.7")
    p.add_argument("--methods", default="svt,optspace-like,smcb(faccro),vmclosure,mos(smcb+faccro)")
    p.add_argument(
        "--p-means", choices=["observe", "missing"], default="observe",
        help="whether observe_prob axis values are observation or missing probabilities",
    )
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument(
        "--estimate-rank", action="store_true",
        help="estimate the method rank from the spectrum instead of using --rank",
    )
    _method_flags(p)
    p.set_defaults(func=cmd_sweep_accuracy)

    p = sub.add_parser("sweep-timing", parents=[common], help="runtime versus matrix size")
    _sim_flags(p)
    p.add_argument("--sizes", default="20,50,100,150")
    p.add_argument("--methods", default="svt,optspace-like,smcb(faccro)")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument(
        "--estimate-rank", action="store_true",
        help="estimate the method rank from the spectrum instead of using --rank",
    )
    _method_flags(p)
    p.set_defaults(func=cmd_sweep_timing)

    p = sub.add_parser("eval-real", parents=[common], help="random-deletion evaluation on a matrix CSV")
    p.add_argument("input", type=Path)
    p.add_argument("--deletions", type=int, default=100)
    p.add_argument("--methods", default="mos(smcb+faccro),svt,optspace-like")
    p.add_argument("--distances", default=None, help="comma-separated column distances (enables riegel)")
    p.add_argument("--bootstrap", type=int, default=1000, help="bootstrap iterations")
    _method_flags(p)
    p.set_defaults(func=cmd_eval_real)

    p = sub.add_parser("spectrum", parents=[common], help="spectral gaps of completions")
    _sim_flags(p)
    p.add_argument("--inits", default="faccro,meanfill")
    p.add_argument("--gaps", type=int, default=10)
    p.add_argument("--vector", type=int, default=2, help="singular vector index for alignment")
    _method_flags(p)
    p.set_defaults(func=cmd_spectrum, trials=1)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except CompletionError as exc:
        print(f"circuitmc: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
