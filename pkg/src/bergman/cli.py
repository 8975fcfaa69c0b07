"""``bergman`` command line: eval, sweep, verify, figure, surface.

Exit codes: 0 success, 1 verification failure or unmet assumptions,
2 method not applicable at the point, 3 term budget exhausted, 64 usage.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .exceptions import BergmanError, InapplicableAssumptions, RegimeOutOfRange, TermBudgetExceeded
from .io import to_csv, to_json
from .oracle import SeriesConfig
from .regimes import evaluate
from .regimes.common import ApproxResult
from .surface_bounds import (
    SurfaceParams,
    check_assumptions,
    dominance_check,
    log_envelope_T15,
    log_envelope_T15_proof_form,
    log_envelope_T16,
    t16_extra_condition,
    wk_threshold,
)
from .verifier import (
    THEOREMS,
    GridSpec,
    neck_profile,
    reference_profile_table,
    report_csv,
    report_json_obj,
    summarize,
    verify_all,
)

EXIT_OK, EXIT_FAIL, EXIT_REGIME, EXIT_BUDGET, EXIT_USAGE = 0, 1, 2, 3, 64
ENV_REL_TOL = "BERGMAN_REL_TOL"
DEFAULT_REL_TOL = 1e-13
METHODS = ("auto", "oracle", "inside", "lattice", "neck", "outside")
RECORD_COLUMNS = ("k", "t", "method", "value_log", "value", "rel_err", "envelope")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which means something else here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_real(s: str) -> float:
    try:
        x = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
    if not (math.isfinite(x) and x > 0):
        raise argparse.ArgumentTypeError(f"expected a positive finite number, got {s!r}")
    return x


def _real(s: str) -> float:
    try:
        x = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {s!r}")
    return x


def _kernel_k(s: str) -> int:
    try:
        k = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if k < 3:
        raise argparse.ArgumentTypeError("k must be at least 3")
    return k


def _count(s: str) -> int:
    try:
        n = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _k_list(s: str) -> tuple[int, ...]:
    parts = [p for p in s.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty k list")
    return tuple(_kernel_k(p.strip()) for p in parts)


def _config(args: argparse.Namespace) -> SeriesConfig:
    """Flag, then environment, then the built-in default."""
    tol = getattr(args, "rel_tol", None)
    if tol is None:
        env = os.environ.get(ENV_REL_TOL)
        if env is not None and env.strip():
            try:
                tol = _positive_real(env)
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"{ENV_REL_TOL}: {exc}") from None
        else:
            tol = DEFAULT_REL_TOL
    try:
        return SeriesConfig(rel_tol=tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _record(k: int, t: float, res: ApproxResult) -> dict:
    log_v = res.value.log
    representable = res.value.value.representable()
    return {
        "k": k,
        "t": t,
        "method": res.regime.label(),
        "value_log": log_v,
        "value": res.value.to_real() if representable else "overflow",
        "rel_err": res.value.rel_err,
        "envelope": res.envelope,
    }


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------ commands

def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _config(args)
    try:
        res = evaluate(args.k, args.t, args.method, cfg)
    except TermBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (RegimeOutOfRange, BergmanError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REGIME
    rec = _record(args.k, args.t, res)
    if args.csv:
        _emit(to_csv(RECORD_COLUMNS, [[rec[c] for c in RECORD_COLUMNS]]), None)
    else:
        _emit(to_json(rec), None)
    return EXIT_OK


def _sweep_grid(lo: float, hi: float, n: int, log_spacing: bool) -> list[float]:
    if n == 1:
        return [lo]
    if log_spacing:
        pts = np.exp(np.linspace(math.log(lo), math.log(hi), n))
    else:
        pts = np.linspace(lo, hi, n)
    out = [float(x) for x in pts]
    out[0], out[-1] = lo, hi
    return out


def cmd_sweep(args: argparse.Namespace) -> int:
    if not args.t_min < args.t_max and args.points > 1:
        raise UsageError("--t-min must be below --t-max")
    cfg = _config(args)
    rows = []
    for t in sorted(_sweep_grid(args.t_min, args.t_max, args.points, args.log_spacing)):
        try:
            rec = _record(args.k, t, evaluate(args.k, t, args.method, cfg))
            rows.append([rec[c] for c in RECORD_COLUMNS] + [""])
        except BergmanError as exc:
            rows.append([args.k, t, "error", None, None, None, None, f"{type(exc).__name__}: {exc}"])
    _emit(to_csv(RECORD_COLUMNS + ("reason",), rows), args.out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = _config(args)
    theorems = THEOREMS if args.theorem == "all" else (args.theorem,)
    grid = GridSpec(args.k_list, args.points, args.seed)
    checks = verify_all(grid, theorems, cfg)
    if args.csv:
        _emit(report_csv(checks), args.out)
    else:
        _emit(to_json(report_json_obj(checks)), args.out)
    summary = summarize(checks)
    for tid, s in summary.items():
        print(f"{tid}: {s['pass']} passed, {s['fail']} failed, {s['skip']} skipped", file=sys.stderr)
    failed = [c for c in checks if c.status == "fail"]
    for c in failed:
        print(f"FAIL {c.theorem_id} k={c.k} t={c.t} part={c.part} params={c.params} margin={c.margin}",
              file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_figure(args: argparse.Namespace) -> int:
    if args.profile == "neck-reference":
        rows = reference_profile_table(args.samples)
        _emit(to_csv(("x", "h"), rows), args.out)
        return EXIT_OK
    if args.k is None or args.b is None:
        raise UsageError("--profile neck needs --k and --b")
    cfg = _config(args)
    try:
        rows = neck_profile(args.k, args.b, args.samples, cfg)
    except RegimeOutOfRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except TermBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    table = [[r.u, r.t, r.b, r.log_lower, r.log_upper, r.log_oracle] for r in rows]
    _emit(to_csv(("u", "t", "b", "log_lower", "log_upper", "log_oracle"), table), args.out)
    return EXIT_OK


def _log_entry(log_v: float) -> dict:
    return {"log": log_v, "value": math.exp(log_v) if log_v < 709.0 else "overflow"}


def cmd_surface(args: argparse.Namespace) -> int:
    try:
        p = SurfaceParams(args.k, args.epsilon, args.lambda_, args.R, args.d)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep = check_assumptions(p)
    applicable = rep.first_three
    out: dict = {
        "params": {"k": p.k, "epsilon": p.epsilon, "lambda": p.lambda_, "R": p.R, "d": p.d},
        "assumptions": {**{f"a{i + 1}": v for i, v in enumerate(rep.as_list())},
                        "binding_margins": rep.binding_margins},
        "constants": {"a0": p.a0, "a1": p.a1, "a2": p.a2, "t1": p.t1, "wk_threshold": wk_threshold(p.k)},
    }
    try:
        dom = dominance_check(p)
        out["dominance"] = {"log_I": dom.I.log, "log_II": dom.II.log, "log_III": dom.III.log,
                            "I_gt_II": dom.I_gt_II, "II_gt_III": dom.II_gt_III}
        t15 = log_envelope_T15(p, enforce=False)
        out["envelope_T15"] = {**_log_entry(t15), "applicable": applicable,
                               "log_proof_form": log_envelope_T15_proof_form(p)}
        if args.t is not None:
            if args.t < wk_threshold(p.k):
                out["envelope_T16"] = "outside_W_k"
            else:
                extra = t16_extra_condition(p)
                out["envelope_T16"] = {**_log_entry(log_envelope_T16(p, args.t, enforce=False)),
                                       "applicable": applicable and extra, "extra_condition": extra}
    except InapplicableAssumptions as exc:
        out["error"] = str(exc)
        applicable = False
    _emit(to_json(out), None)
    return EXIT_OK if applicable else EXIT_FAIL


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bergman", description="Bergman kernel of the punctured Poincare disk.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    e = sub.add_parser("eval", help="evaluate the kernel at one point")
    e.add_argument("--k", type=_kernel_k, required=True, help="series exponent (kernel for power k+1)")
    e.add_argument("--t", type=_positive_real, required=True, help="t = -log|z|^2")
    e.add_argument("--method", choices=METHODS, default="auto")
    e.add_argument("--rel-tol", type=_positive_real, default=None)
    fmt = e.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", help="evaluate on a t grid, CSV out")
    s.add_argument("--k", type=_kernel_k, required=True)
    s.add_argument("--t-min", type=_positive_real, required=True)
    s.add_argument("--t-max", type=_positive_real, required=True)
    s.add_argument("--points", type=_count, required=True)
    s.add_argument("--log-spacing", action="store_true")
    s.add_argument("--method", choices=METHODS, default="auto")
    s.add_argument("--rel-tol", type=_positive_real, default=None)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="check the inequalities on a grid")
    v.add_argument("--theorem", choices=THEOREMS + ("all",), required=True)
    v.add_argument("--k-list", type=_k_list, required=True, help="comma separated, e.g. 55,100,500")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--points", type=_count, default=10, help="seeded points per interval")
    v.add_argument("--rel-tol", type=_positive_real, default=None)
    v.add_argument("--csv", action="store_true", help="CSV report instead of JSON")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("figure", help="profile data for plotting")
    f.add_argument("--profile", choices=("neck-reference", "neck"), required=True)
    f.add_argument("--k", type=_kernel_k)
    f.add_argument("--b", type=_count)
    f.add_argument("--samples", type=_count, default=512)
    f.add_argument("--rel-tol", type=_positive_real, default=None)
    f.add_argument("--out")
    f.set_defaults(func=cmd_figure)

    u = sub.add_parser("surface", help="effective constants for a punctured surface")
    u.add_argument("--k", type=_kernel_k, required=True)
    u.add_argument("--epsilon", type=_positive_real, required=True)
    u.add_argument("--lambda", dest="lambda_", type=_real, required=True)
    u.add_argument("--R", type=_positive_real, required=True)
    u.add_argument("--d", type=_positive_real, required=True)
    u.add_argument("--t", type=_positive_real)
    u.set_defaults(func=cmd_surface)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bergman: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
