"""Grid sweeps that test each proven inequality against the exact series.

Every check compares a left side with a right side in log domain. ``margin``
is the slack after widening both sides by their certified evaluation errors
in the inequality's favour, so ``passed == False`` is a genuine
counterexample and never a rounding artefact. ``resolved`` repeats the
comparison with the errors working against the inequality; a passing check
with ``resolved == False`` sits inside numerical noise.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from .exceptions import BergmanError, ConvexityViolation, RegimeOutOfRange
from .io import fmt_cell, to_csv
from .numerics import LOG_2PI, log_factorial, logaddexp_scalar
from .oracle import DEFAULT_CONFIG, KernelPoint, SeriesConfig, power_series_ratio, rho, rho_shifted
from .regimes.inside import (
    convexity_margin,
    f_b,
    inside_range_max,
    lattice_neighbours_log,
    locate_interior_minimum,
    log_E,
    log_h,
    probe_log_ratio,
    probe_point,
    stirling_lattice_condition,
)
from .regimes.neck import neck_range_ok, reference_profile, rho_neck_bounds
from .regimes.outside import log_outside_envelope, rho_outside

THEOREMS = (
    "T1_1a", "T1_1b", "Cor_Stirling", "T1_2", "T1_3", "Cor_Limit",
    "T1_4_lattice", "T1_4_interior", "L_f1", "L_fb", "Poisson_identity",
)
_ORDER = {name: i for i, name in enumerate(THEOREMS)}

LOG2 = math.log(2.0)
LIMIT_TOL = 1e-3
T13_FIXED_T = (0.01, 0.1, 1.0, 2.0 * math.pi / math.e)
NECK_B_SAMPLE = 16
LFB_MAX_B = 64


@dataclass(frozen=True)
class GridSpec:
    k_list: tuple[int, ...]
    points_per_interval: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "k_list", tuple(int(k) for k in self.k_list))
        if not self.k_list:
            raise ValueError("k_list must not be empty")
        if self.points_per_interval < 1:
            raise ValueError("points_per_interval must be positive")


@dataclass(frozen=True)
class TheoremCheck:
    """One inequality at one point, or one skipped grid point.

    ``status`` is ``"pass"``, ``"fail"`` or ``"skip"``; a skip carries a
    ``reason`` and no numbers.
    """

    theorem_id: str
    k: int
    t: float | None
    part: str
    params: dict = field(default_factory=dict)
    lhs: float | None = None
    rhs: float | None = None
    margin: float | None = None
    passed: bool | None = None
    resolved: bool | None = None
    status: str = "skip"
    reason: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _check(tid, k, t, part, params, lhs, lhs_err, rhs, rhs_err) -> TheoremCheck:
    """Claim ``exp(lhs) <= exp(rhs)``; ``*_err`` are relative errors of each side."""
    def lo(x, e):
        return x + math.log1p(-e) if e < 1 else -math.inf

    def hi(x, e):
        return x + math.log1p(e)

    if lhs == -math.inf:
        fav = worst = math.inf
    else:
        fav = hi(rhs, rhs_err) - lo(lhs, lhs_err)
        worst = lo(rhs, rhs_err) - hi(lhs, lhs_err)
    ok = fav >= 0
    return TheoremCheck(tid, k, t, part, dict(params), lhs, rhs, fav, ok, worst >= 0,
                        "pass" if ok else "fail")


def _skip(tid, k, t, part, params, reason) -> TheoremCheck:
    return TheoremCheck(tid, k, t, part, dict(params), reason=reason)


def _rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([seed, *[int(abs(x)) for x in keys]])


def _uniform_points(rng: np.random.Generator, lo: float, hi: float, n: int) -> list[float]:
    """``n`` seeded points strictly inside ``(lo, hi)``, sorted."""
    pts = sorted(float(x) for x in rng.uniform(lo, hi, size=n))
    return [x for x in pts if lo < x < hi]


# -------------------------------------------------------------- lattice points

def _t1_1a(k, grid, cfg):
    """``0 < eps_1 <= 2^(k+1) e^-t`` on the stated domain ``t <= k``."""
    tid = "T1_1a"
    if k < 3:
        return [_skip(tid, k, None, "upper", {}, "k < 3")]
    ts = [float(k)] + _uniform_points(_rng(grid.seed, 1, k), 0.0, float(k), grid.points_per_interval)
    out = []
    for t in ts:
        eps = power_series_ratio(k, t, 1, exclude=(1,), cfg=cfg)
        out.append(_check(tid, k, t, "upper", {}, eps.log, eps.rel_err,
                          (k + 1) * LOG2 - t, 4e-16 * (k + t + 1)))
    return out


def _t1_1b_candidates(k):
    return range(2, max(2, math.ceil(math.sqrt(2.0 * k))) + 1)


def _t1_1b(k, grid, cfg):
    """``S < eps_b < 2S`` at ``t = k/b`` for ``b >= 2`` with ``k/(b(b+1)) >= log 2``."""
    tid = "T1_1b"
    out = []
    for b in _t1_1b_candidates(k):
        t = k / b
        prm = {"b": b}
        if k / (b * (b + 1)) < LOG2:
            out.append(_skip(tid, k, t, "lower", prm, "k/(b(b+1)) < log 2"))
            out.append(_skip(tid, k, t, "upper", prm, "k/(b(b+1)) < log 2"))
            continue
        log_s = lattice_neighbours_log(k, b)
        s_err = 4e-16 * (2 * k + 1)
        eps = f_b(k, t, b, cfg, exclude=(0,))
        rest = f_b(k, t, b, cfg, exclude=(-1, 0, 1))
        # S < eps  <=>  rest > 0, where rest drops c = -1, 0, 1; the margin is
        # log(eps/S) computed from rest/S so it keeps its precision
        x = rest.log - log_s
        fav = math.log1p(math.exp(x) * (1 + rest.rel_err)) if x > -math.inf else -math.inf
        worst = math.log1p(math.exp(x) * (1 - rest.rel_err)) if x > -math.inf else -math.inf
        ok = x > -math.inf
        out.append(TheoremCheck(tid, k, t, "lower", {**prm, "log_rest_over_s": x}, log_s, log_s + fav,
                                fav, ok, ok and worst >= 0, "pass" if ok else "fail"))
        out.append(_check(tid, k, t, "upper", prm, eps.log, eps.rel_err, log_s + LOG2, s_err))
    return out


def _cor_stirling(k, grid, cfg):
    """``oracle = k^(3/2)/(b (2 pi)^(3/2)) (1 + 1/(12k) + eps_b)`` with ``eps_b < 9/k^2``."""
    tid = "Cor_Stirling"
    out = []
    for b in range(1, max(1, math.ceil(math.sqrt(k))) + 1):
        t = k / b
        prm = {"b": b}
        if k < 79:
            out.append(_skip(tid, k, t, "upper", prm, "k < 79"))
            continue
        if not stirling_lattice_condition(k, b):
            out.append(_skip(tid, k, t, "upper", prm, "k/(2b^2) - k/(3b^3) < 3 log k"))
            continue
        o = rho_shifted(k, t, cfg)
        log_model = 1.5 * math.log(k) - math.log(b) - 1.5 * LOG_2PI
        lhs = o.log - log_model
        eps_b = math.expm1(lhs) - 1.0 / (12 * k)
        prm["eps_b"] = eps_b
        rhs = math.log1p(1.0 / (12 * k) + 9.0 / (k * k))
        out.append(_check(tid, k, t, "upper", prm, lhs, o.rel_err + 8e-16 * (k + 1), rhs, 4e-16))
    return out


# -------------------------------------------------------------- two-term interior

def _t1_2(k, grid, cfg):
    tid = "T1_2"
    out = []
    amax_thm = inside_range_max(k)
    amax_prop = math.sqrt(k) / math.log(k) if k > 1 else 0.0
    for a in range(1, max(3, int(math.floor(amax_prop))) + 1):
        lo, hi = k / (a + 1), k / a
        prm = {"a": a}
        pts = _uniform_points(_rng(grid.seed, 2, k, a), lo, hi, grid.points_per_interval)
        thm_ok = k >= 55 and a <= amax_thm
        thm_reason = "k < 55" if k < 55 else "a > sqrt(k)/log(k) - 1"
        prop_ok = k >= 55 and a <= amax_prop
        prop_reason = "k < 55" if k < 55 else "a > sqrt(k)/log(k)"

        for t in pts:
            if not thm_ok:
                out.append(_skip(tid, k, t, "envelope", prm, thm_reason))
                continue
            # oracle - two-term model = the other terms, all positive
            rest = power_series_ratio(k, t, a, exclude=(a, a + 1), cfg=cfg)
            lf = log_factorial(k - 1)
            lhs = rest.log + log_h(k, t, a) - LOG_2PI - lf
            rhs = logaddexp_scalar(log_E(k, a), log_E(k, a + 1)) + (k + 1) * math.log(k) - k - LOG_2PI - lf
            out.append(_check(tid, k, t, "envelope", prm, lhs, rest.rel_err + 8e-16 * k * math.log(k),
                              rhs, 8e-16 * k * math.log(k)))

        if not thm_ok:
            out.append(_skip(tid, k, None, "convex", prm, thm_reason))
        else:
            # smallest relative second difference v[i-1] + v[i+1] - 2 v[i] over v[i]
            m = convexity_margin(k, a)
            out.append(TheoremCheck(tid, k, None, "convex", prm, -m, 0.0, m, m >= 0, m >= 0,
                                    "pass" if m >= 0 else "fail"))

        try:
            mn = locate_interior_minimum(k, a) if prop_ok else None
        except ConvexityViolation as exc:
            mn = None
            prop_ok, prop_reason = False, str(exc)
        if not thm_ok or mn is None:
            out.append(_skip(tid, k, None, "minimum", prm, thm_reason if not thm_ok else prop_reason))
        else:
            lunit = (k + 1) * math.log(k) - k - LOG_2PI - log_factorial(k - 1)
            rhs_base = lunit + math.log(1.0 / a + 1.0 / (a + 1))
            flags = {f"holds_{c}": mn.value.log <= rhs_base - k / (c * a * a) for c in (16, 17, 66)}
            out.append(_check(tid, k, mn.t_min, "minimum", {**prm, **flags}, mn.value.log, mn.value.rel_err,
                              rhs_base - k / (17.0 * a * a), 8e-16 * k * math.log(k)))
        if mn is None:
            out.append(_skip(tid, k, None, "min_location", prm, prop_reason))
        else:
            lt = math.log(mn.t_min)
            left = lt - math.log((k + 2) / (a + 1))
            right = math.log(k / a) - lt
            margin = min(left, right)
            out.append(TheoremCheck(tid, k, mn.t_min, "min_location", prm,
                                    math.log((k + 2) / (a + 1)), lt, margin, margin > 0, margin > 1e-12,
                                    "pass" if margin > 0 else "fail"))
        if not prop_ok:
            out.append(_skip(tid, k, None, "probe", prm, prop_reason))
        else:
            s = probe_point(k, a)
            lhs = probe_log_ratio(k, a)
            out.append(_check(tid, k, s, "probe", prm, lhs, 8e-16 * k * math.log(k), -k / (17.0 * a * a), 0.0))
    return out


# -------------------------------------------------------------- outer region

def _t1_3(k, grid, cfg):
    tid = "T1_3"
    if k < 3:
        return [_skip(tid, k, None, "envelope", {}, "k < 3")]
    rng = _rng(grid.seed, 3, k)
    extra = np.exp(rng.uniform(math.log(0.01), math.log(k), size=grid.points_per_interval))
    ts = sorted(set(T13_FIXED_T) | {float(x) for x in extra})
    out = []
    for t in ts:
        o = rho_shifted(k, t, cfg)
        r = math.exp(o.log - math.log(k / (2.0 * math.pi)))
        dev = abs(r - 1.0)
        err = o.rel_err * r + 4e-16
        env_log = log_outside_envelope(k, t)
        fav_dev = max(dev - err, 0.0)
        lhs = math.log(dev) if dev > 0 else -math.inf
        fav = env_log - (math.log(fav_dev) if fav_dev > 0 else -math.inf)
        worst = env_log - math.log(dev + err)
        ok = fav >= 0
        out.append(TheoremCheck(tid, k, t, "envelope", {}, lhs, env_log, fav, ok, worst >= 0,
                                "pass" if ok else "fail"))
        if 2.0 * math.pi / t >= math.e:
            out.append(_check(tid, k, t, "exp_decay", {}, env_log, 1e-15 * (k + 1), -float(k), 0.0))
    return out


def limit_t(k: int) -> float:
    """Radius used for the boundary limit, ``1e-6`` up to ``k = 100`` and growing as ``k^2`` after."""
    return 1e-6 * max(1.0, k / 100.0) ** 2


def _cor_limit(k, grid, cfg):
    """``rho(k, t) 2pi/k -> 1`` as ``t -> 0``, within 1e-3 at :func:`limit_t`.

    ``literal`` uses the kernel for bundle power ``k`` as written;
    ``shifted`` uses power ``k + 1``, the index of the outside expansion.
    """
    tid = "Cor_Limit"
    if k < 3:
        return [_skip(tid, k, None, p, {}, "k < 3") for p in ("literal", "shifted")]
    t = limit_t(k)
    big = replace(cfg, max_terms=max(cfg.max_terms, 1_000_000_000))
    out = []
    for part, enc in (("literal", rho(KernelPoint(k, t), big)), ("shifted", rho_shifted(k, t, big))):
        r = math.exp(enc.log - math.log(k / (2.0 * math.pi)))
        dev = abs(r - 1.0)
        err = enc.rel_err * r + 4e-16
        lhs = math.log(dev) if dev > 0 else -math.inf
        rhs = math.log(LIMIT_TOL)
        fav_dev = max(dev - err, 0.0)
        fav = rhs - (math.log(fav_dev) if fav_dev > 0 else -math.inf)
        worst = rhs - math.log(dev + err)
        out.append(TheoremCheck(tid, k, t, part, {"ratio": r}, lhs, rhs, fav, fav >= 0, worst >= 0,
                                "pass" if fav >= 0 else "fail"))
    return out


# -------------------------------------------------------------- neck

def neck_b_range(k: int) -> list[int]:
    if k < 3:
        return []
    return [b for b in range(4, int(math.floor(math.sqrt(k) * math.log(k))) + 1)]


def neck_b_sample(k: int, n: int = NECK_B_SAMPLE) -> list[int]:
    """Up to ``n`` evenly spread ``b`` from the neck range, always including ``round(sqrt k)``."""
    bs = neck_b_range(k)
    if len(bs) <= n:
        return bs
    pick = {bs[round(i * (len(bs) - 1) / (n - 1))] for i in range(n)}
    mid = int(round(math.sqrt(k)))
    if mid in bs:
        pick.add(mid)
    return sorted(pick)


def _neck_checks(tid, k, t, b, prm, cfg):
    try:
        nb = rho_neck_bounds(k, t, b, cfg)
    except RegimeOutOfRange as exc:
        return [_skip(tid, k, t, p, prm, str(exc)) for p in ("lower", "upper")]
    o = rho_shifted(k, t, cfg)
    prm = {**prm, "lower_trivial": nb.lower_trivial}
    return [
        _check(tid, k, t, "lower", prm, nb.lower.log, nb.lower.rel_err, o.log, o.rel_err),
        _check(tid, k, t, "upper", prm, o.log, o.rel_err, nb.upper.log, nb.upper.rel_err),
    ]


def _t1_4_lattice(k, grid, cfg):
    tid = "T1_4_lattice"
    bs = neck_b_range(k)
    if not bs:
        return [_skip(tid, k, None, p, {}, "no b with 3 < b <= sqrt(k) log k") for p in ("lower", "upper")]
    out = []
    for b in bs:
        out.extend(_neck_checks(tid, k, k / b, b, {"b": b, "u": 0.0}, cfg))
    return out


def _t1_4_interior(k, grid, cfg):
    tid = "T1_4_interior"
    bs = neck_b_sample(k)
    if not bs:
        return [_skip(tid, k, None, p, {}, "no b with 3 < b <= sqrt(k) log k") for p in ("lower", "upper")]
    out = []
    for b in bs:
        for t in _uniform_points(_rng(grid.seed, 4, k, b), k / (b + 1), k / b, grid.points_per_interval):
            out.extend(_neck_checks(tid, k, t, b, {"b": b, "u": 1.0 - t * b / k}, cfg))
    return out


# -------------------------------------------------------------- lemmas

def _l_f1(k, grid, cfg):
    """``0 < f_1(k) - 1 < 2^k e^-k / (1 - e^{-k/2})``."""
    tid = "L_f1"
    if k < 3:
        return [_skip(tid, k, None, "upper", {"b": 1}, "k < 3")]
    eps = f_b(k, float(k), 1, cfg, exclude=(0,))
    rhs = k * LOG2 - k - math.log(-math.expm1(-k / 2.0))
    return [_check(tid, k, float(k), "upper", {"b": 1}, eps.log, eps.rel_err, rhs, 8e-16 * (k + 1))]


def _l_fb(k, grid, cfg):
    """``0 < f_b(k/b) - 1 < [(1+1/b)^k e^{-k/b} + (1-1/b)^k e^{k/b}] / (1 - e^{-k/(b(b-1))})``."""
    tid = "L_fb"
    out = []
    for b in range(2, min(LFB_MAX_B, max(2, k)) + 1):
        t = k / b
        eps = f_b(k, t, b, cfg, exclude=(0,))
        rhs = lattice_neighbours_log(k, b) - math.log(-math.expm1(-k / (b * (b - 1))))
        out.append(_check(tid, k, t, "upper", {"b": b}, eps.log, eps.rel_err, rhs, 8e-16 * (2 * k + 1)))
    return out


def _poisson_identity(k, grid, cfg):
    """Resummed and direct series agree within their combined certified errors."""
    tid = "Poisson_identity"
    if k < 3:
        return [_skip(tid, k, None, "agreement", {}, "k < 3")]
    hi = k / 4.0
    if hi <= 0.01:
        return [_skip(tid, k, None, "agreement", {}, "k/4 <= 0.01")]
    n = grid.points_per_interval
    ts = [float(x) for x in np.exp(np.linspace(math.log(0.01), math.log(hi), n))] if n > 1 else [0.01]
    out = []
    for t in ts:
        o = rho_shifted(k, t, cfg)
        p = rho_outside(k, t, cfg).value
        top = max(o.log, p.log)
        d = abs(math.exp(o.log - top) - math.exp(p.log - top))
        lhs = top + math.log(d) if d > 0 else -math.inf
        rhs = logaddexp_scalar(o.log + math.log(o.rel_err), p.log + math.log(p.rel_err))
        ok = lhs <= rhs
        out.append(TheoremCheck(tid, k, t, "agreement", {}, lhs, rhs, rhs - lhs, ok, ok,
                                "pass" if ok else "fail"))
    return out


_DRIVERS: dict[str, Callable] = {
    "T1_1a": _t1_1a,
    "T1_1b": _t1_1b,
    "Cor_Stirling": _cor_stirling,
    "T1_2": _t1_2,
    "T1_3": _t1_3,
    "Cor_Limit": _cor_limit,
    "T1_4_lattice": _t1_4_lattice,
    "T1_4_interior": _t1_4_interior,
    "L_f1": _l_f1,
    "L_fb": _l_fb,
    "Poisson_identity": _poisson_identity,
}


def _sort_key(c: TheoremCheck):
    t = -1.0 if c.t is None else c.t
    return (_ORDER[c.theorem_id], c.k, t, c.part, sorted((k, str(v)) for k, v in c.params.items()))


def verify_theorem(theorem_id: str, grid: GridSpec, cfg: SeriesConfig = DEFAULT_CONFIG) -> list[TheoremCheck]:
    """Checks for one theorem over every ``k`` in the grid, sorted.

    Points outside a theorem's hypotheses become ``skip`` entries; an
    evaluation that cannot be completed (budget, cancellation) is also a
    skip with the error message as reason.
    """
    if theorem_id not in _DRIVERS:
        raise ValueError(f"unknown theorem id {theorem_id!r}; expected one of {', '.join(THEOREMS)}")
    out: list[TheoremCheck] = []
    for k in grid.k_list:
        try:
            out.extend(_DRIVERS[theorem_id](k, grid, cfg))
        except BergmanError as exc:
            out.append(_skip(theorem_id, k, None, "evaluation", {}, f"{type(exc).__name__}: {exc}"))
    return sorted(out, key=_sort_key)


def verify_all(grid: GridSpec, theorems: Iterable[str] = THEOREMS,
               cfg: SeriesConfig = DEFAULT_CONFIG) -> list[TheoremCheck]:
    out: list[TheoremCheck] = []
    for tid in theorems:
        out.extend(verify_theorem(tid, grid, cfg))
    return sorted(out, key=_sort_key)


def summarize(checks: Iterable[TheoremCheck]) -> dict[str, dict[str, int]]:
    """Per theorem: counts of passed, failed and skipped entries."""
    summary: dict[str, dict[str, int]] = {}
    for c in checks:
        s = summary.setdefault(c.theorem_id, {"pass": 0, "fail": 0, "skip": 0})
        s[c.status] += 1
    return {k: summary[k] for k in sorted(summary, key=_ORDER.__getitem__)}


REPORT_COLUMNS = ("theorem_id", "k", "t", "part", "params", "lhs", "rhs", "margin",
                  "passed", "resolved", "status", "reason")


def _params_text(p: dict) -> str:
    return ";".join(f"{k}={fmt_cell(v)}" for k, v in p.items())


def report_json_obj(checks: Iterable[TheoremCheck]) -> list[dict]:
    return [c.as_dict() for c in checks]


def report_csv(checks: Iterable[TheoremCheck]) -> str:
    rows = []
    for c in checks:
        d = c.as_dict()
        d["params"] = _params_text(c.params)
        rows.append([d[col] for col in REPORT_COLUMNS])
    return to_csv(REPORT_COLUMNS, rows)


# -------------------------------------------------------------- figure data

def reference_profile_table(samples: int = 512) -> list[tuple[float, float]]:
    """``(x, h(x))`` at ``x_i = 4 i / samples``, ``i = 0..samples``."""
    if samples < 1:
        raise ValueError("samples must be positive")
    return [(4.0 * i / samples, reference_profile(4.0 * i / samples)) for i in range(samples + 1)]


@dataclass(frozen=True)
class NeckRow:
    u: float
    t: float
    b: int
    log_lower: float
    log_upper: float
    log_oracle: float


def neck_profile(k: int, b: int, samples: int = 64, cfg: SeriesConfig = DEFAULT_CONFIG) -> list[NeckRow]:
    """Sandwich and exact kernel from ``t = k/b`` down to ``t = k/(b+1)``.

    ``u = 1 - t b / k`` runs over ``[0, 1/(b+1)]``; the last row is the next
    lattice point and is evaluated with index ``b + 1``.
    """
    if not neck_range_ok(k, b):
        raise RegimeOutOfRange(f"b={b} outside (3, sqrt(k) log k] at k={k}")
    if samples < 1:
        raise ValueError("samples must be positive")
    rows = []
    for i in range(samples + 1):
        u = i / (samples * (b + 1))
        t = k / b if i == 0 else (k / (b + 1) if i == samples else k * (1.0 - u) / b)
        bb = b + 1 if i == samples else b
        if not neck_range_ok(k, bb):
            continue
        nb = rho_neck_bounds(k, t, bb, cfg)
        o = rho_shifted(k, t, cfg)
        rows.append(NeckRow(u, t, bb, nb.lower.log, nb.upper.log, o.log))
    return rows


__all__ = [
    "GridSpec",
    "NeckRow",
    "THEOREMS",
    "TheoremCheck",
    "limit_t",
    "neck_b_range",
    "neck_b_sample",
    "neck_profile",
    "reference_profile_table",
    "report_csv",
    "report_json_obj",
    "summarize",
    "verify_all",
    "verify_theorem",
]
