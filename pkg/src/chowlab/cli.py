"""Command line entry point: ``chowlab <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .logheight import LogHeight, UndecidableError

EXIT_OK, EXIT_UNDECIDABLE, EXIT_CONFIG = 0, 2, 3


def _fractions(text: str) -> list:
    return [Fraction(x.strip()) for x in text.split(",") if x.strip()]


def _read_text(path: str) -> str:
    with open(path) as fh:
        return fh.read().strip()


def _load_variety(path: str):
    from .variety import variety_from_json

    with open(path) as fh:
        return variety_from_json(json.load(fh))


def _jsonable(obj):
    if isinstance(obj, LogHeight):
        return obj.to_json()
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _monomial_text(mon) -> str:
    parts = [f"x{i}" if e == 1 else f"x{i}^{e}" for i, e in enumerate(mon) if e]
    return " ".join(parts) or "1"


def _emit(data) -> None:
    print(json.dumps(_jsonable(data), indent=2))


def cmd_measure(args) -> int:
    from .measure import SampleConfig, h_star, sphere_integral
    from .poly import parse_poly

    f = parse_poly(_read_text(args.poly), homogeneous=False)
    cfg = SampleConfig(args.samples, args.seed, args.jobs, args.normalization)
    est = h_star(f, cfg) if args.height else sphere_integral(f, cfg)
    _emit(est.to_json())
    return EXIT_OK


def cmd_hilbert(args) -> int:
    from .variety import hilbert_function, hilbert_weight

    Y = _load_variety(args.variety)
    out = {"m": args.m, "H": hilbert_function(Y, args.m)}
    if args.weights:
        s, mons = hilbert_weight(Y, args.m, _fractions(args.weights))
        out["s"] = s
        out["monomials"] = [_monomial_text(mon) for mon in mons]
    _emit(out)
    return EXIT_OK


def cmd_chow(args) -> int:
    from .chow import chow_form, modified_chow_form, normalized_chow_weight, chow_weight

    Y = _load_variety(args.variety)
    out = {}
    if args.delta:
        G = modified_chow_form(Y, args.delta)
        out["modified_form"] = G.body.to_text() if args.show else f"{G.body.num_terms()} terms"
    F = chow_form(Y)
    out["form"] = F.body.to_text() if args.show else f"{F.body.num_terms()} terms"
    out["degree"] = F.degree
    if args.weights:
        c = _fractions(args.weights)
        out["e"] = chow_weight(F, c)
        out["E_contribution"] = normalized_chow_weight(Y, c)
    _emit(out)
    return EXIT_OK


def cmd_theight(args) -> int:
    from .twisted import E_Y, WeightFamily, report_to_json, twisted_height, verify_lemma_5_4

    Y = _load_variety(args.variety)
    with open(args.weights) as fh:
        cf = WeightFamily.from_labels(json.load(fh), Y.R)
    logQ = LogHeight(rational=Fraction(args.Q_log))
    y = _fractions(args.point)
    out = {"log_H": twisted_height(logQ, cf, y, prec=args.precision_bits), "E_Y": E_Y(Y, cf)}
    if args.transfer:
        out["transfer"] = report_to_json(
            verify_lemma_5_4(Y, cf, Fraction(args.transfer), y, logQ, prec=args.precision_bits))
    _emit(out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    from .bounds import (TheoremInputs, bounds_A, bounds_B, check_B2_identity,
                         systems_bound, to_log10)

    delta = Fraction(args.delta)
    t = TheoremInputs(args.n, args.N or args.n, args.d, args.s, args.C, args.Delta, delta)
    A = bounds_A(t)
    out = {"A2": A["A2"], "log10_A1": to_log10(A["logA1"]), "log10_A3": to_log10(A["logA3"]),
           "systems_bound": systems_bound(args.n, args.s, delta),
           "B2_identity": check_B2_identity(t)}
    if args.D:
        B = bounds_B(args.n, args.D, args.R or args.n, delta)
        out.update({"B2": B["B2"], "log10_B1": to_log10(B["logB1"]),
                    "log10_B3": to_log10(B["logB3"])})
    _emit(out)
    return EXIT_OK


def cmd_census(args) -> int:
    from .census import (ConfigError, ExperimentConfig, GuardExceeded, HEADER, run_census,
                         write_report)

    try:
        config = ExperimentConfig.load(args.config)
    except (ConfigError, OSError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_census(config, jobs=args.jobs, precision=args.precision_bits)
    except GuardExceeded as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(HEADER)
    paths = write_report(report, args.out) if args.out else []
    summary = report.summary()
    summary.pop("header")
    summary["files"] = paths
    _emit(summary)
    if not args.out:
        sys.stdout.write(report.solutions_tsv())
    return report.exit_code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chowlab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", help="Monte Carlo sphere measure of a polynomial")
    m.add_argument("--poly", required=True, help="file holding one polynomial")
    m.add_argument("--samples", type=int, default=200_000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--jobs", type=int, default=1)
    m.add_argument("--normalization", choices=("half", "full"), default="half")
    m.add_argument("--height", action="store_true", help="report h*(f) instead of m(f)")
    m.set_defaults(func=cmd_measure)

    h = sub.add_parser("hilbert", help="Hilbert function and Hilbert weight")
    h.add_argument("--variety", required=True)
    h.add_argument("--m", type=int, required=True)
    h.add_argument("--weights", default="")
    h.set_defaults(func=cmd_hilbert)

    c = sub.add_parser("chow", help="Chow form and Chow weight")
    c.add_argument("--variety", required=True)
    c.add_argument("--delta", type=int, default=0)
    c.add_argument("--weights", default="")
    c.add_argument("--show", action="store_true", help="print the forms in full")
    c.set_defaults(func=cmd_chow)

    t = sub.add_parser("theight", help="twisted height of a point")
    t.add_argument("--variety", required=True)
    t.add_argument("--weights", required=True, help='JSON file {"inf": [...], "2": [...]}')
    t.add_argument("--Q-log", dest="Q_log", required=True, help="log Q as a rational")
    t.add_argument("--point", required=True, help="comma separated coordinates")
    t.add_argument("--transfer", default="", help="delta: also run the dual-weight transfer check")
    t.add_argument("--precision-bits", type=int, default=256)
    t.set_defaults(func=cmd_theight)

    b = sub.add_parser("bounds", help="explicit bounds")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--N", type=int, default=0)
    b.add_argument("--d", type=int, default=1)
    b.add_argument("--s", type=int, default=1)
    b.add_argument("--C", type=int, default=1)
    b.add_argument("--Delta", type=int, default=1)
    b.add_argument("--delta", required=True)
    b.add_argument("--D", type=int, default=0, help="degree of Y for the B bounds")
    b.add_argument("--R", type=int, default=0)
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("census", help="run a solution census")
    s.add_argument("--config", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--precision-bits", type=int, default=None)
    s.add_argument("--out", default="")
    s.set_defaults(func=cmd_census)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UndecidableError as exc:
        print(f"undecidable: {exc}", file=sys.stderr)
        return EXIT_UNDECIDABLE
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
