"""Command-line front end.

Every command prints ``key=value`` lines on standard output.  Exit codes:
0 success, 1 usage error, 2 parse error, 3 numerical/domain error.
"""

from __future__ import annotations

import argparse
import math
import statistics
import sys
import time
from pathlib import Path
from typing import Sequence

from .core import DomainError, kendall_tau
from .em import CoarsenConfig, compute_tau, fit, fit_pl_em
from .fileio import (
    ParseError,
    parse_preferences,
    parse_scores,
    parse_truth,
    write_dic_curve,
    write_preferences,
    write_scores,
    write_truth,
)
from .gibbs import GibbsConfig, SamplerError, diagnose
from .synth import SynthSpec, generate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _alpha(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"alpha must be positive: {text!r}")
    return value


def _calibration(text: str):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto': {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError("calibration must be positive")
    return value


def _grid(text: str) -> list[float]:
    values = [_alpha(tok.strip()) for tok in text.split(",")]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise argparse.ArgumentTypeError("alpha grid must be strictly ascending")
    return values


def _read(path: str, missing_code: int) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        if missing_code == EXIT_USAGE:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
        raise ParseError(f"cannot read {path}: {exc.strerror}", 1) from exc


def _fmt(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.12g}"


def cmd_aggregate(args) -> int:
    ds = parse_preferences(_read(args.input, EXIT_USAGE))
    config = CoarsenConfig(alpha=args.alpha, iterations=args.iters, calibration=args.c)
    result = fit(ds, config)
    Path(args.out).write_text(write_scores(result.theta, ds), encoding="utf-8")
    print(f"N={ds.n_prefs}")
    print(f"M={ds.n_items}")
    print(f"tau={_fmt(result.tau_n)}")
    print(f"objective={_fmt(result.objective_trace[-1])}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    ds = parse_preferences(_read(args.input, EXIT_USAGE))
    gc = GibbsConfig(samples=args.samples, seed=args.seed)
    points, selected = diagnose(ds, args.alpha_grid, gc=gc)
    Path(args.out).write_text(write_dic_curve(points), encoding="utf-8")
    print(f"points={len(points)}")
    print(f"selected_alpha={_fmt(selected)}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    table = parse_scores(_read(args.scores, EXIT_USAGE))
    truth = parse_truth(_read(args.truth, EXIT_USAGE), table.item_ids)
    print(f"kendall_tau={kendall_tau(table.ranking, truth):.4f}")
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        spec = SynthSpec(n_items=args.items, n_prefs=args.prefs, length=args.len,
                         noise_fraction=args.noise, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    ds, truth, theta = generate(spec)
    prefix = args.out_prefix
    outputs = {
        "prefs": write_preferences(ds),
        "truth": write_truth(truth, ds),
        "theta": write_scores(theta, ds),
    }
    for suffix, text in outputs.items():
        path = Path(f"{prefix}.{suffix}")
        path.write_text(text, encoding="utf-8")
        print(f"{suffix}={path}")
    return EXIT_OK


def _timed(fn, ds, config) -> float:
    start = time.perf_counter()
    fn(ds, config)
    return time.perf_counter() - start


def run_bench(ds, iters: int, repeats: int) -> dict[str, float]:
    """Time CoarsenRank (alpha = N) against PL-EM, interleaving the runs."""
    coarse = CoarsenConfig(alpha=float(ds.n_prefs), iterations=iters)
    plain = CoarsenConfig(alpha=math.inf, iterations=iters)
    fit(ds, coarse)  # warm caches on the dataset
    a, b = [], []
    for _ in range(repeats):
        a.append(_timed(fit, ds, coarse))
        b.append(_timed(fit_pl_em, ds, plain))
    out = {
        "coarsen_mean": statistics.fmean(a),
        "coarsen_std": statistics.pstdev(a),
        "plem_mean": statistics.fmean(b),
        "plem_std": statistics.pstdev(b),
    }
    out["ratio"] = out["coarsen_mean"] / out["plem_mean"]
    return out


def cmd_bench(args) -> int:
    ds = parse_preferences(_read(args.input, EXIT_PARSE))
    stats = run_bench(ds, args.iters, args.repeats)
    print(f"tau={_fmt(compute_tau(ds.n_prefs, float(ds.n_prefs)))}")
    print(f"coarsenrank={stats['coarsen_mean']:.6f}+-{stats['coarsen_std']:.6f}")
    print(f"pl_em={stats['plem_mean']:.6f}+-{stats['plem_std']:.6f}")
    for key, value in stats.items():
        print(f"{key}={value:.6g}")
    return EXIT_OK


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coarsenrank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("aggregate", help="fit item scores with CoarsenRank EM")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha", required=True, type=_alpha, help="positive real or 'inf'")
    p.add_argument("--iters", type=_positive_int, default=15)
    p.add_argument("--c", type=_calibration, default="auto", help="score total or 'auto' (N/2)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("diagnose", help="DIC curve over a grid of alpha values")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha-grid", required=True, type=_grid, help="e.g. 10,100,inf")
    p.add_argument("--samples", type=_positive_int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("evaluate", help="Kendall tau between a scores file and a truth file")
    p.add_argument("--scores", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("generate", help="synthetic PL preferences with noise")
    p.add_argument("--items", type=_positive_int, required=True)
    p.add_argument("--prefs", type=_positive_int, required=True)
    p.add_argument("--len", type=_positive_int, default=2)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="wall time of CoarsenRank vs PL-EM")
    p.add_argument("--input", required=True)
    p.add_argument("--iters", type=_positive_int, default=15)
    p.add_argument("--repeats", type=_positive_int, default=50)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DomainError, SamplerError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
