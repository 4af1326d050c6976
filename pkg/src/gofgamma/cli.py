"""Command-line interface.

Exit codes: 0 fail to reject, 1 reject, 2 usage or data error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

from . import __version__
from .alternatives import KINDS, bahadur_slope, make_alt, power_simulation, weibull
from .data import FIXTURES, DatasetError, fixture, parse_dataset
from .gof import Sample, t_statistic
from .hankel import default_rule
from .nulldist import DEFAULT_SEED, McProtocol, NullApprox, simulate_null
from .specfun import DomainError
from .spectrum import (eigenvalues_to_trace, scree_m, solve_eigenvalues, spectral_params,
                       trace_s, trace_s0)

EXIT_ACCEPT, EXIT_REJECT, EXIT_ERROR = 0, 1, 2
SEED_ENV = "GOFGAMMA_SEED"
TABLE_ALPHAS = (0.5, 0.75, 1.0, 3.0, 5.0, 10.0, 20.0, 50.0)


class UsageError(ValueError):
    pass


@dataclass
class TestReport:
    """Outcome of one goodness-of-fit test."""

    __test__ = False  # not a pytest class

    alpha: float
    n: int
    statistic: float
    method: str
    m: int | None
    critical_value: float
    p_value: float
    decision: str
    level: float = 0.05
    seed: int | None = None
    protocol: dict | None = None
    library_version: str = __version__
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        expect = "reject" if self.statistic > self.critical_value else "fail_to_reject"
        if self.decision != expect:
            raise ValueError("decision inconsistent with statistic and critical value")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p-value outside [0, 1]")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TestReport":
        return cls(**json.loads(text))

    @property
    def exit_code(self) -> int:
        return EXIT_REJECT if self.decision == "reject" else EXIT_ACCEPT


def fmt(x: float) -> str:
    """Scientific notation with four significant digits."""
    return f"{x:.3e}"


def _alpha(value: str) -> float:
    a = float(value)
    if not math.isfinite(a) or a < 0.5:
        raise argparse.ArgumentTypeError(
            f"alpha={value} unsupported: the statistic uses Bessel order nu = alpha - 1, "
            "which must satisfy nu >= -1/2, i.e. alpha >= 1/2")
    return a


def _level(value: str) -> float:
    v = float(value)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("level must lie in (0, 1)")
    return v


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get(SEED_ENV)
    return int(env) if env else DEFAULT_SEED


def _protocol(args) -> McProtocol:
    return McProtocol(batches=args.batches, reps_per_batch=args.reps, trim=args.trim,
                      seed=_seed(args))


def _load(source: str) -> Sample:
    if source == "-":
        return parse_dataset(sys.stdin.read() + "\n")
    if source.startswith("fixture:"):
        return fixture(source.split(":", 1)[1])
    return parse_dataset(source)


def run_test(args) -> TestReport:
    """Run the test described by parsed CLI arguments."""
    sample = _load(args.data)
    alpha, level = args.alpha, args.level
    stat = t_statistic(sample, alpha)
    if args.method == "spectral":
        m = args.m or scree_m(alpha, args.eps)
        e = solve_eigenvalues(spectral_params(alpha), m)
        approx = NullApprox(m, e.deltas, level)
        crit, pval = approx.critical_value, approx.p_value(stat)
        return TestReport(alpha, sample.n, stat, "spectral", m, crit, pval,
                          "reject" if stat > crit else "fail_to_reject", level,
                          extra={"deltas": list(e.deltas)})
    proto = _protocol(args)
    sim = simulate_null(alpha, sample.n, proto, level)
    crit, pval = sim.critical_value, sim.p_value(stat)
    return TestReport(alpha, sample.n, stat, "mc", None, crit, pval,
                      "reject" if stat > crit else "fail_to_reject", level,
                      seed=proto.seed, protocol=asdict(proto),
                      extra={"batch_quantiles": list(sim.quantiles)})


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print("\n".join(lines))


def cmd_test(args) -> int:
    rep = run_test(args)
    if args.json:
        print(rep.to_json())
    else:
        lines = [
            f"alpha          {rep.alpha:g}",
            f"n              {rep.n}",
            f"statistic      {fmt(rep.statistic)}",
            f"method         {rep.method}" + (f" (m={rep.m})" if rep.m else ""),
            f"critical value {fmt(rep.critical_value)}  (level {rep.level:g})",
            f"p-value        {fmt(rep.p_value)}",
            f"decision       {rep.decision}",
        ]
        if rep.seed is not None:
            lines.append(f"seed           {rep.seed}")
        print("\n".join(lines))
    return rep.exit_code


def cmd_tables(args) -> int:
    alphas = args.alpha or list(TABLE_ALPHAS)
    if args.table == "scree":
        rows = [{"alpha": a, "m": scree_m(a, args.eps)} for a in alphas]
        _emit(args, {"table": "scree", "eps": args.eps, "rows": rows},
              [f"eps = {args.eps:g}", "alpha      m"]
              + [f"{r['alpha']:<10g} {r['m']}" for r in rows])
    elif args.table == "trace":
        rows = []
        for a in alphas:
            p = spectral_params(a)
            rows.append({"alpha": a, "trace_s0": trace_s0(p), "trace_s": trace_s(p)})
        _emit(args, {"table": "trace", "rows": rows},
              ["alpha      Tr(S0)      Tr(S)"]
              + [f"{r['alpha']:<10g} {fmt(r['trace_s0'])}  {fmt(r['trace_s'])}" for r in rows])
    else:
        payload, lines = {"table": "eigen", "rows": []}, []
        for a in alphas:
            p = spectral_params(a)
            e = solve_eigenvalues(p, args.m) if args.m else eigenvalues_to_trace(p)
            payload["rows"].append({**e.to_dict(), "trace_s": trace_s(p)})
            lines.append(f"alpha = {a:g}  Tr(S) = {fmt(trace_s(p))}  sum = {fmt(sum(e.deltas))}")
            lines += [f"  delta_{k:<3d} {fmt(d)}" for k, d in enumerate(e.deltas, start=1)]
        _emit(args, payload, lines)
    return EXIT_ACCEPT


def cmd_simulate(args) -> int:
    sim = simulate_null(args.alpha, args.n, _protocol(args), args.level)
    payload = {**sim.to_dict(), "library_version": __version__}
    _emit(args, payload, [
        f"alpha {args.alpha:g}, n {args.n}, level {args.level:g}",
        f"critical value {fmt(sim.critical_value)}",
        "batch percentiles " + " ".join(fmt(q) for q in sim.quantiles),
    ])
    return EXIT_ACCEPT


def _model(name: str, alpha: float):
    if name.startswith("weibull:"):
        return weibull(float(name.split(":", 1)[1]))
    if name in KINDS:
        return make_alt(name, alpha)
    raise UsageError(f"unknown model {name!r}; use one of {KINDS} or weibull:<shape>")


def cmd_power(args) -> int:
    model = _model(args.model, args.alpha)
    proto = _protocol(args)
    crit = args.critical
    if crit is None:
        m = args.m or scree_m(args.alpha, args.eps)
        e = solve_eigenvalues(spectral_params(args.alpha), m)
        crit = NullApprox(m, e.deltas, args.level).critical_value
    rate = power_simulation(model, args.n, args.level, proto, crit, alpha=args.alpha)
    payload = {"model": args.model, "alpha": args.alpha, "n": args.n, "level": args.level,
               "critical": crit, "rejection_rate": rate, "seed": proto.seed}
    _emit(args, payload, [f"{args.model}: n {args.n}, critical {fmt(crit)}, "
                          f"rejection rate {fmt(rate)}"])
    return EXIT_ACCEPT


def cmd_slope(args) -> int:
    model = make_alt(args.model, args.alpha)
    p = spectral_params(args.alpha)
    e = solve_eigenvalues(p, 1)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        b2, slope = bahadur_slope(args.theta, model.h_limit, args.alpha, e,
                                  default_rule(args.alpha))
    notes = [str(w.message) for w in caught]
    payload = {"model": args.model, "alpha": args.alpha, "theta": args.theta,
               "b2": b2, "slope": slope, "delta_1": e.deltas[0], "warnings": notes}
    _emit(args, payload, [f"b2 {fmt(b2)}  slope {fmt(slope)}  delta_1 {fmt(e.deltas[0])}"]
          + [f"warning: {n}" for n in notes])
    return EXIT_ACCEPT


def cmd_fixtures(args) -> int:
    names = [args.name] if args.name else sorted(FIXTURES)
    if args.json:
        print(json.dumps({n: list(FIXTURES[n]) for n in names}))
    else:
        for n in names:
            if len(names) > 1:
                print(f"# {n}")
            print("\n".join(f"{v:g}" for v in FIXTURES[n]))
    return EXIT_ACCEPT


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gofgamma", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, alpha_required=True):
        p.add_argument("--alpha", type=_alpha, required=alpha_required)
        p.add_argument("--level", type=_level, default=0.05)
        p.add_argument("--json", action="store_true")

    def mc(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--batches", type=int, default=10)
        p.add_argument("--reps", type=int, default=10_000)
        p.add_argument("--trim", type=float, default=0.2)

    t = sub.add_parser("test", help="test a data set")
    t.add_argument("data", help="file path, '-' for stdin, or fixture:<name>")
    common(t)
    t.add_argument("--method", choices=("spectral", "mc"), default="spectral")
    t.add_argument("--m", type=int, default=None)
    t.add_argument("--eps", type=float, default=1e-10)
    mc(t)
    t.set_defaults(func=cmd_test)

    tb = sub.add_parser("tables", help="scree bounds, eigenvalues or traces")
    tb.add_argument("table", choices=("scree", "eigen", "trace"))
    tb.add_argument("--alpha", type=_alpha, action="append")
    tb.add_argument("--eps", type=float, default=1e-10)
    tb.add_argument("--m", type=int, default=None)
    tb.add_argument("--json", action="store_true")
    tb.set_defaults(func=cmd_tables)

    s = sub.add_parser("simulate-null", help="Monte Carlo critical value")
    common(s)
    s.add_argument("--n", type=int, required=True)
    mc(s)
    s.set_defaults(func=cmd_simulate)

    pw = sub.add_parser("power", help="rejection rate under an alternative")
    common(pw)
    pw.add_argument("--n", type=int, required=True)
    pw.add_argument("--model", required=True)
    pw.add_argument("--critical", type=float, default=None)
    pw.add_argument("--m", type=int, default=None)
    pw.add_argument("--eps", type=float, default=1e-10)
    mc(pw)
    pw.set_defaults(func=cmd_power, batches=1, reps=2000)

    sl = sub.add_parser("slope", help="approximate Bahadur slope")
    common(sl)
    sl.add_argument("--theta", type=float, required=True)
    sl.add_argument("--model", choices=KINDS, default="contamination")
    sl.set_defaults(func=cmd_slope)

    fx = sub.add_parser("fixtures", help="print embedded data sets")
    fx.add_argument("name", nargs="?", choices=sorted(FIXTURES))
    fx.add_argument("--json", action="store_true")
    fx.set_defaults(func=cmd_fixtures)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (UsageError, DatasetError, DomainError, ValueError) as exc:
        print(f"gofgamma: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
