"""Near the puncture: lattice points and the two-term model between them.

All functions take ``k`` as the series exponent, so they approximate
``oracle.rho_shifted(k, t)``, the kernel for bundle power ``k + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import ConvexityViolation, RegimeOutOfRange
from ..numerics import (
    EPS,
    LOG_2PI,
    Enclosure,
    LogValue,
    compose_rel,
    concave_log_sum,
    factorial_rel_err,
    log_factorial,
    logaddexp_scalar,
    rounding_rel,
    safe_exp,
)
from ..oracle import DEFAULT_CONFIG, SeriesConfig
from .common import INSIDE, LATTICE, ApproxResult, Regime, lattice_index

LOG2 = math.log(2.0)
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def f_b(k: int, t: float, b: int, cfg: SeriesConfig = DEFAULT_CONFIG,
        exclude=()) -> Enclosure:
    """``sum_{c >= 1-b} (1 + c/b)**k exp(-c t)``, peak outward.

    ``exclude`` drops the listed ``c`` so that e.g. ``f_b - 1`` is computed
    without cancellation.
    """
    if b < 1:
        raise ValueError("b must be a positive integer")
    if not t > 0:
        raise ValueError("t must be positive")

    def logterm(c: np.ndarray) -> np.ndarray:
        cf = c.astype(np.float64)
        with np.errstate(divide="ignore"):
            return k * np.log1p(cf / b) - cf * t

    # maximiser of k log(1 + c/b) - c t
    start = max(1 - b, int(round(k / t - b)))
    s = concave_log_sum(logterm, start, lower=1 - b, rel_tol=cfg.rel_tol,
                        max_terms=cfg.max_terms, exclude=exclude)
    ends = [abs(k * math.log1p(c / b)) + abs(c * t) for c in (s.n_lo, s.n_hi) if c > -b]
    return Enclosure(LogValue.from_log(s.log_sum), compose_rel(s.rel_err, rounding_rel(*ends)))


def lattice_neighbours_log(k: int, b: int) -> float:
    """``log[(1+1/b)^k e^{-k/b} + (1-1/b)^k e^{k/b}]``, the lower sandwich term."""
    up = k * math.log1p(1.0 / b) - k / b
    down = k * math.log1p(-1.0 / b) + k / b if b > 1 else -math.inf
    return logaddexp_scalar(up, down)


def _log_unit(k: int) -> float:
    """``log(k^(k+1) e^-k / (2 pi (k-1)!))``."""
    return (k + 1) * math.log(k) - k - LOG_2PI - log_factorial(k - 1)


def b1_domain_min(k: int) -> float:
    """Smallest ``t`` where ``eps_1 <= 2^(k+1) e^-t`` is proven.

    For ``a >= 2`` consecutive terms of ``eps_1 = sum_{a>=2} a^k e^{-(a-1)t}``
    shrink by at least ``(3/2)^k e^-t``; once that ratio is at most 1/2 the
    sum is at most twice its first term ``2^k e^-t``.
    """
    return k * math.log(1.5) + LOG2


def rho_lattice_b1(k: int, t: float) -> ApproxResult:
    """Leading term ``t^(k+1) e^-t / (2 pi (k-1)!)`` with ``0 < eps_1 <= 2^(k+1) e^-t``.

    Admitted for ``t >= k log(3/2) + log 2``: this covers the lattice point
    ``t = k`` and everything closer to the puncture.
    """
    if k < 3:
        raise RegimeOutOfRange("need k >= 3")
    if not t >= b1_domain_min(k):
        raise RegimeOutOfRange(f"t={t} below k log(3/2) + log 2 = {b1_domain_min(k)}")
    lf = log_factorial(k - 1)
    log_val = (k + 1) * math.log(t) - t - LOG_2PI - lf
    log_env = (k + 1) * LOG2 - t
    ferr = factorial_rel_err(k - 1)
    return ApproxResult(
        Enclosure(LogValue.from_log(log_val), rounding_rel((k + 1) * math.log(t), t, lf)),
        safe_exp(log_env) + ferr,
        Regime(LATTICE, b=1),
        {"log_envelope": log_env, "factorial_err": ferr, "one_sided": True},
    )


def rho_lattice(k: int, b: int) -> ApproxResult:
    """Value at the lattice point ``t = k/b`` for ``b >= 2``.

    The true kernel is ``value * (1 + eps)`` with ``S < eps < 2S``; the
    envelope is ``2S`` and ``S`` is kept as ``details["log_lower"]``.
    """
    if b < 2 or k / (b * (b + 1)) < LOG2:
        raise RegimeOutOfRange(f"b={b} violates b >= 2 and k/(b(b+1)) >= log 2 at k={k}")
    log_val = _log_unit(k) - math.log(b)
    log_s = lattice_neighbours_log(k, b)
    ferr = factorial_rel_err(k - 1)
    return ApproxResult(
        Enclosure(LogValue.from_log(log_val), rounding_rel((k + 1) * math.log(k), k, log_factorial(k - 1))),
        safe_exp(log_s + LOG2) + ferr,
        Regime(LATTICE, b=b),
        {"log_lower": log_s, "log_envelope": log_s + LOG2, "factorial_err": ferr, "one_sided": True},
    )


def stirling_lattice_condition(k: int, b: int) -> bool:
    return k >= 79 and b >= 1 and k / (2 * b * b) - k / (3 * b ** 3) >= 3 * math.log(k)


def rho_lattice_stirling(k: int, b: int) -> ApproxResult:
    """Factorial-free lattice value ``k^(3/2)/(b (2 pi)^(3/2)) (1 + 1/(12k))``, error below ``9/k^2``."""
    if not stirling_lattice_condition(k, b):
        raise RegimeOutOfRange(f"(k={k}, b={b}) fails k >= 79 and k/(2b^2) - k/(3b^3) >= 3 log k")
    log_val = 1.5 * math.log(k) - math.log(b) - 1.5 * LOG_2PI + math.log1p(1.0 / (12 * k))
    return ApproxResult(
        Enclosure(LogValue.from_log(log_val), rounding_rel(1.5 * math.log(k), 1.5 * LOG_2PI)),
        9.0 / k ** 2,
        Regime(LATTICE, b=b),
        {"form": "stirling", "one_sided": True},
    )


# ------------------------------------------------------------- two-term model

def log_h(k: int, t: float, a: int) -> float:
    """``log(t^(k+1) a^k e^(-a t))``."""
    return (k + 1) * math.log(t) + k * math.log(a) - a * t


def two_term_log(k: int, t: float, a: int) -> float:
    return logaddexp_scalar(log_h(k, t, a), log_h(k, t, a + 1))


def two_term_log_derivative(k: int, t: float, a: int) -> float:
    """``d/dt log(h_a + h_{a+1})``; its sign is the sign of the model's slope."""
    la, lb = log_h(k, t, a), log_h(k, t, a + 1)
    m = max(la, lb)
    wa, wb = math.exp(la - m), math.exp(lb - m)
    return ((k + 1) / t - (wa * a + wb * (a + 1)) / (wa + wb))


def log_E(k: int, a: int) -> float:
    """``log(2 (1+1/a)^k e^(-k/a))``."""
    return LOG2 + k * math.log1p(1.0 / a) - k / a


def inside_range_max(k: int) -> float:
    """Largest ``a`` admitted by the two-term theorem."""
    return math.sqrt(k) / math.log(k) - 1.0


def rho_inside_two_term(k: int, t: float, a: int) -> ApproxResult:
    """``(h_a + h_{a+1}) / (2 pi (k-1)!)`` on ``(k/(a+1), k/a)``.

    The proven error is absolute, ``E_a + E_{a+1}`` in units of
    ``k^(k+1) e^-k / (2 pi (k-1)!)``; ``envelope`` is that divided by the
    value, and the absolute form is kept in ``details``.
    """
    if k < 55:
        raise RegimeOutOfRange("two-term model needs k >= 55")
    if not (1 <= a <= inside_range_max(k)):
        raise RegimeOutOfRange(f"a={a} outside [1, sqrt(k)/log(k) - 1] at k={k}")
    if not (k / (a + 1) < t < k / a):
        raise RegimeOutOfRange(f"t={t} outside (k/(a+1), k/a)")
    lf = log_factorial(k - 1)
    l2 = two_term_log(k, t, a)
    log_val = l2 - LOG_2PI - lf
    log_abs = logaddexp_scalar(log_E(k, a), log_E(k, a + 1))
    log_rel = log_abs + (k + 1) * math.log(k) - k - l2
    ferr = factorial_rel_err(k - 1)
    return ApproxResult(
        Enclosure(LogValue.from_log(log_val), rounding_rel((k + 1) * math.log(t), a * t, k * math.log(a + 1), lf)),
        safe_exp(log_rel) + ferr,
        Regime(INSIDE, a=a),
        {"log_abs_envelope": log_abs, "log_envelope": log_rel, "log_unit": _log_unit(k),
         "factorial_err": ferr, "one_sided": True},
    )


@dataclass(frozen=True)
class InteriorMinimum:
    t_min: float
    value: Enclosure
    in_predicted_interval: bool
    min_second_difference: float


def _golden_section(f, lo: float, hi: float, tol: float) -> float:
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def convexity_margin(k: int, a: int, samples: int = 100,
                     lo: float | None = None, hi: float | None = None) -> float:
    """Smallest relative second difference of ``h_a + h_{a+1}`` on an open grid.

    Entries are ``(v[i-1] + v[i+1] - 2 v[i]) / v[i]`` with ``v`` rescaled by
    its maximum so nothing overflows; positive throughout means convex on
    the grid. The default grid spans the whole open interval.
    """
    lo = k / (a + 1) if lo is None else lo
    hi = k / a if hi is None else hi
    ts = [lo + (hi - lo) * (i + 1) / (samples + 1) for i in range(samples)]
    ls = [two_term_log(k, t, a) for t in ts]
    top = max(ls)
    v = [math.exp(x - top) for x in ls]
    return min((v[i - 1] + v[i + 1] - 2.0 * v[i]) / v[i] for i in range(1, samples - 1))


def convexity_tolerance(k: int, a: int) -> float:
    """Rounding slack for :func:`convexity_margin`: each ``log v`` is off by ``~EPS (k+1) log t``."""
    return 16.0 * EPS * ((k + 1) * abs(math.log(k / a)) + k + 1.0)


def convex_core(k: int, a: int) -> tuple[float, float]:
    """Sub-interval where both ``h_a`` and ``h_{a+1}`` are convex.

    ``h_a'' / h_a = ((k+1-a t)^2 - (k+1)) / t^2`` vanishes at
    ``a t = k + 1 +- sqrt(k+1)``; the band between those roots is concave and
    reaches into ``(k/(a+1), k/a)`` from both ends.
    """
    r = math.sqrt(k + 1.0)
    return (k + 1.0 + r) / (a + 1), (k + 1.0 - r) / a


def _minimum_bracket(k: int, a: int, samples: int = 400) -> tuple[float, float]:
    lo, hi = k / (a + 1), k / a
    ts = [lo + (hi - lo) * (i + 1) / (samples + 1) for i in range(samples)]
    slope = [two_term_log_derivative(k, t, a) for t in ts]
    turns = [i for i in range(samples - 1) if slope[i] < 0 <= slope[i + 1]]
    if len(turns) != 1:
        raise ConvexityViolation(
            f"{len(turns)} slope sign changes from - to + at k={k}, a={a}; no unique interior minimum")
    i = turns[0]
    return ts[max(i - 1, 0)], ts[min(i + 2, samples - 1)]


def locate_interior_minimum(k: int, a: int) -> InteriorMinimum:
    """Golden-section minimiser of ``h_a + h_{a+1}`` on ``(k/(a+1), k/a)``.

    The two-term model is not convex on the whole interval (see
    :func:`convex_core`), and ``h_{a+1}`` peaks inside it, so the search is
    bracketed around the one descending-to-ascending turn of the slope first.
    The admitted range is ``a <= sqrt(k)/log k``, one step wider than the
    two-term envelope.
    """
    if k < 55:
        raise RegimeOutOfRange("need k >= 55")
    if not (1 <= a <= math.sqrt(k) / math.log(k)):
        raise RegimeOutOfRange(f"a={a} outside [1, sqrt(k)/log(k)] at k={k}")
    lo, hi = _minimum_bracket(k, a)
    t_min = _golden_section(lambda t: two_term_log(k, t, a), lo, hi, 1e-8 * k / a)
    lf = log_factorial(k - 1)
    val = Enclosure(LogValue.from_log(two_term_log(k, t_min, a) - LOG_2PI - lf),
                    compose_rel(factorial_rel_err(k - 1), rounding_rel((k + 1) * math.log(t_min), a * t_min, lf)))
    inside = (k + 2) / (a + 1) < t_min < k / a
    core_lo, core_hi = convex_core(k, a)
    return InteriorMinimum(t_min, val, inside, convexity_margin(k, a, lo=core_lo, hi=core_hi))


def probe_point(k: int, a: int) -> float:
    """``s_a = k log((a+1)/a)``, where the two terms balance."""
    return k * math.log1p(1.0 / a)


def probe_log_ratio(k: int, a: int) -> float:
    """``log[(h_a + h_{a+1})(s_a) / (h_a(k/a) + h_{a+1}(k/(a+1)))]``."""
    s = probe_point(k, a)
    peaks = logaddexp_scalar(log_h(k, k / a, a), log_h(k, k / (a + 1), a + 1))
    return two_term_log(k, s, a) - peaks
