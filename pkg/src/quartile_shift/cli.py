"""Command-line interface: analyze, simulate, weights, dist."""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import __version__
from .attributable import mw_null_distribution
from .datasets import EXAMPLES
from .hypergeom import EXACT_BUDGET, BudgetExceededError, g2_null_distribution, make_design, support
from .rank import (
    PRESETS,
    d2_null_distribution,
    deviate_test,
    fit_test,
    resolve_weights,
    t_null_distribution,
    t_statistic,
)
from .report import (
    DEFAULT_LEVELS,
    InputError,
    analyze,
    boxplot_rows,
    dumps,
    gmm_curve_rows,
    make_sample,
    p4,
    parse_grouped,
    parse_values,
    pcurve_rows,
    render_text,
    write_table,
)
from .shift_table import change_points
from .simulation import ESTIMATORS, SimulationConfig, run_simulation
from .weights import band_scores, efficiency_table

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_INVARIANT = 0, 1, 2, 3


class InvariantError(RuntimeError):
    """An internal consistency check failed."""


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_data(args):
    if args.example:
        return EXAMPLES[args.example]()
    if args.data:
        return parse_grouped(args.data)
    if args.x and args.y:
        return make_sample(parse_values(args.x), parse_values(args.y))
    raise InputError("give --x and --y, --data, or --example")


def _levels(text: str | None):
    if not text:
        return DEFAULT_LEVELS
    try:
        alphas = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"--alpha expects numbers, got {text!r}") from None
    if not all(0 < a < 1 for a in alphas):
        raise InputError("every alpha must lie in (0, 1)")
    return tuple(1 - a for a in alphas)


def _weights_list(text: str) -> list[str]:
    """Preset names separated by commas, or a single custom ``w1,w2,w3,w4``."""
    parts = [p.strip().lower() for p in text.split(",") if p.strip()]
    names = parts if all(p in PRESETS for p in parts) else [text]
    try:
        for w in names:
            resolve_weights(w)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return names


def cmd_analyze(args) -> int:
    data = _load_data(args)
    weights = _weights_list(args.weights)
    traj = change_points(data)
    doc = analyze(data, weights, args.mode, _levels(args.alpha), args.attributable_alpha, traj=traj)
    _check_report(doc)
    _emit(dumps(doc) if args.format == "json" else render_text(doc), args.out)
    mode = doc["metadata"]["rank_mode"]
    if args.pcurve:
        write_table(args.pcurve, ["lower", "upper", "p_d2", "p_g2"], pcurve_rows(traj, weights[0], mode))
    if args.gmm_curve:
        write_table(args.gmm_curve, ["lower", "upper", "g2_excess"], gmm_curve_rows(traj))
    if args.boxplot_data:
        write_table(args.boxplot_data, ["sample", "min", "lower_hinge", "median", "upper_hinge", "max"],
                    boxplot_rows(data, doc))
    return EXIT_OK


def _check_report(doc: dict) -> None:
    for name, m in doc["methods"].items():
        for cs in m.get("confidence_sets", []):
            ivs = cs["intervals"]
            if any(not a <= b for a, b in ivs) or any(not ivs[i][1] < ivs[i + 1][0] for i in range(len(ivs) - 1)):
                raise InvariantError(f"{name}: confidence set is not a sorted disjoint union")
    ab = doc.get("attributable", {})
    if "lower_bound" in ab and not 0 <= ab["lower_bound"] <= ab["v_observed"]:
        raise InvariantError("attributable bound outside [0, V]")


def cmd_simulate(args) -> int:
    est = tuple(e.strip().lower() for e in args.estimators.split(","))
    try:
        config = SimulationConfig(
            sampler=args.dist, n=args.n, m=args.m, reps=args.reps, seed=args.seed,
            estimators=est, true_delta=args.true_delta, alpha=args.alpha, ci_mode=args.ci_mode,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        report = run_simulation(config, workers=args.threads)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _emit(dumps(report.to_dict()), args.out)
    return EXIT_OK


def cmd_weights(args) -> int:
    dists = [d.strip() for d in args.dist.split(",")]
    try:
        models = {d: band_scores(d, args.lam) for d in dists}
        table = efficiency_table(dists, args.lam)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    doc = {
        "lambda": args.lam,
        "models": {
            d: {
                "eta": m.eta,
                "Sigma": m.Sigma,
                "Sigma_ginv": m.Sigma_ginv,
                "optimal_w": m.optimal_w,
                "max_efficacy": m.max_efficacy,
            }
            for d, m in models.items()
        },
        "efficiency_vs_optimal": table,
    }
    _emit(dumps(doc), args.out)
    return EXIT_OK


def _dist_rows(args):
    stat = args.statistic
    if stat == "mw":
        dist = mw_null_distribution(args.n, args.m)
        tails = dist.tails()
        return ["v", "prob", "upper_tail"], [(v, float(p), float(t)) for v, (p, t) in enumerate(zip(dist.pmf, tails))], dist
    design = make_design(args.n + args.m, args.n)
    if stat == "table":
        tables, probs = support(design, args.budget)
        return ["a1", "a2", "a3", "a4", "prob"], [tuple(int(v) for v in t) + (float(p),) for t, p in zip(tables, probs)], None
    if not design.within_budget(args.budget):
        raise BudgetExceededError(f"exact enumeration needs {design.support_bound} tables; use a smaller design")
    if stat == "g2":
        nd = g2_null_distribution(design)
    elif stat == "t":
        nd = t_null_distribution(design, resolve_weights(args.weights))
    else:
        nd = d2_null_distribution(design, resolve_weights(args.weights))
    tails = nd.tails()
    return ["value", "prob", "upper_tail"], [(float(v), float(p), float(t)) for v, p, t in zip(nd.values, nd.probs, tails)], nd


def cmd_dist(args) -> int:
    if args.at_delta is not None:
        data = _load_data(args)
        args.n, args.m = data.n, data.m
    if args.n is None or args.m is None:
        raise InputError("give --n and --m (or data with --at-delta)")
    if args.n < 1 or args.m < 1:
        raise InputError("need n, m >= 1")
    if args.statistic != "mw" and args.n + args.m < 4:
        raise InputError("quartile tables need n + m >= 4")
    header, rows, dist = _dist_rows(args)
    lines = []
    if args.at_delta is not None:
        if args.statistic not in ("t", "d2", "g2"):
            raise InputError("--at-delta applies to t, d2 and g2")
        traj = change_points(data)
        if args.statistic == "g2":
            res = fit_test(traj, args.at_delta, "exact", args.budget)
            lines.append(f"# G2({args.at_delta}) = {res.statistic:.6g}; exact p = {p4(res.exact_p)}")
        elif args.statistic == "d2":
            res = deviate_test(traj, args.at_delta, args.weights, "exact", args.budget)
            lines.append(f"# D2({args.at_delta}) = {res.statistic:.6g}; exact p = {p4(res.exact_p)}")
        else:
            t = t_statistic(traj.counts_at(args.at_delta), args.weights)
            lines.append(f"# T({args.at_delta}) = {t:.6g}; Pr(T >= t) = {p4(dist.upper_tail(t))}")
    if args.tail is not None:
        p = dist.upper_tail(args.tail) if dist is not None else None
        if p is None:
            raise InputError("--tail needs a scalar statistic (t, d2, g2, mw)")
        lines.append(f"# Pr({args.statistic} >= {args.tail:g}) = {p4(p)}")
    body = "\t".join(header) + "\n" + "".join("\t".join(repr(v) for v in row) + "\n" for row in rows)
    sys.stdout.write("".join(s + "\n" for s in lines))
    if args.out:
        Path(args.out).write_text(body)
    elif args.tail is None and args.at_delta is None:
        sys.stdout.write(body)
    return EXIT_OK


def _add_data_flags(p):
    p.add_argument("--x", help="control observations, one per line")
    p.add_argument("--y", help="treated observations, one per line")
    p.add_argument("--data", help="delimited file with group and value columns")
    p.add_argument("--example", choices=sorted(EXAMPLES), help="bundled dataset")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quartile-shift", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="estimates, confidence sets and fit tests for a dataset")
    _add_data_flags(p)
    p.add_argument("--weights", default="hl,mood,mert", help="presets (hl,mood,mert) or one custom w1,w2,w3,w4")
    p.add_argument("--mode", choices=("exact", "asymptotic", "auto"), default="auto")
    p.add_argument("--alpha", help="comma-separated alphas (default 1/3, 0.10, 0.05)")
    p.add_argument("--attributable-alpha", type=float, default=0.05)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--pcurve", help="write per-segment exact p-values of D2 and G2")
    p.add_argument("--gmm-curve", help="write per-run G2 minus its minimum")
    p.add_argument("--boxplot-data", help="write five-number summaries of x, y - HL, y - GMM")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte Carlo comparison of the estimators")
    p.add_argument("--dist", choices=("normal", "cauchy", "ne"), default="normal")
    p.add_argument("--n", type=int, default=24)
    p.add_argument("--m", type=int, default=24)
    p.add_argument("--reps", type=int, default=5000)
    p.add_argument("--seed", type=int, default=20061)
    p.add_argument("--estimators", default=",".join(ESTIMATORS))
    p.add_argument("--true-delta", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--ci-mode", choices=("asymptotic", "exact", "auto"), default="asymptotic")
    p.add_argument("--threads", type=int, default=1, help="worker processes (results do not depend on it)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("weights", help="band scores, optimal weights and efficiencies")
    p.add_argument("--dist", default="normal,cauchy", help="comma-separated: normal, cauchy, ne")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("dist", help="exact null distributions")
    p.add_argument("--n", type=int, help="treated sample size")
    p.add_argument("--m", type=int, help="control sample size")
    p.add_argument("--statistic", choices=("table", "t", "d2", "g2", "mw"), default="table")
    p.add_argument("--weights", default="hl")
    p.add_argument("--tail", type=float, help="print Pr(statistic >= value)")
    p.add_argument("--at-delta", type=float, help="evaluate the statistic on data at this shift")
    p.add_argument("--budget", type=int, default=EXACT_BUDGET)
    p.add_argument("--out")
    _add_data_flags(p)
    p.set_defaults(func=cmd_dist)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceededError as exc:
        print(f"refused: {exc}; try --mode asymptotic", file=sys.stderr)
        return EXIT_BUDGET
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
