"""Log-domain arithmetic, certified series summation and factorial bounds.

Magnitudes such as ``k**(k+1) * exp(-k)`` overflow a double long before the
interesting range of ``k``; everything here therefore carries the natural log
of a nonnegative quantity instead of the quantity itself.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .exceptions import TermBudgetExceeded

EPS = sys.float_info.epsilon
LOG_2PI = math.log(2.0 * math.pi)
HALF_LOG_2PI = 0.5 * LOG_2PI
_EXP_LIMIT = math.log(sys.float_info.max)

_EXACT_FACTORIAL_MAX = 20
_LOG_FACT_TABLE = [0.0]
for _i in range(1, _EXACT_FACTORIAL_MAX + 1):
    _LOG_FACT_TABLE.append(math.fsum(math.log(j) for j in range(2, _i + 1)))


@dataclass(frozen=True)
class LogValue:
    """A nonnegative real stored as ``(is_zero, log_mag)``."""

    is_zero: bool
    log_mag: float = 0.0

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(True, 0.0)

    @classmethod
    def from_log(cls, log_mag: float) -> "LogValue":
        if log_mag == -math.inf:
            return cls.zero()
        if math.isnan(log_mag) or log_mag == math.inf:
            raise ValueError(f"log magnitude must be finite, got {log_mag}")
        return cls(False, float(log_mag))

    @classmethod
    def from_real(cls, x: float) -> "LogValue":
        if x < 0:
            raise ValueError("LogValue holds nonnegative numbers only")
        if x == 0:
            return cls.zero()
        return cls(False, math.log(x))

    @property
    def log(self) -> float:
        """``log`` of the value, ``-inf`` for zero."""
        return -math.inf if self.is_zero else self.log_mag

    def to_real(self) -> float:
        if self.is_zero:
            return 0.0
        if self.log_mag > _EXP_LIMIT:
            return math.inf
        return math.exp(self.log_mag)

    def representable(self) -> bool:
        return self.is_zero or self.log_mag <= _EXP_LIMIT

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.is_zero or other.is_zero:
            return LogValue.zero()
        return LogValue(False, self.log_mag + other.log_mag)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.is_zero:
            raise ZeroDivisionError("division by a zero LogValue")
        if self.is_zero:
            return self
        return LogValue(False, self.log_mag - other.log_mag)

    def __add__(self, other: "LogValue") -> "LogValue":
        return log_add(self, other)

    def __pow__(self, p: float) -> "LogValue":
        if self.is_zero:
            if p <= 0:
                raise ZeroDivisionError("zero to a nonpositive power")
            return self
        return LogValue(False, self.log_mag * p)

    def scale(self, log_factor: float) -> "LogValue":
        """Multiply by ``exp(log_factor)``."""
        if self.is_zero:
            return self
        return LogValue(False, self.log_mag + log_factor)


@dataclass(frozen=True)
class Enclosure:
    """A value with a guaranteed relative error bound."""

    value: LogValue
    rel_err: float

    @property
    def log(self) -> float:
        return self.value.log

    def to_real(self) -> float:
        return self.value.to_real()

    def log_bounds(self) -> tuple[float, float]:
        """Log of the lower and upper ends of the enclosure."""
        lo = self.value.log + math.log1p(-self.rel_err) if self.rel_err < 1 else -math.inf
        return lo, self.value.log + math.log1p(self.rel_err)

    def contains_log(self, log_x: float) -> bool:
        lo, hi = self.log_bounds()
        return lo <= log_x <= hi


def compose_rel(*errs: float) -> float:
    """Relative error of a product whose factors carry the given relative errors."""
    acc = 1.0
    for e in errs:
        acc *= 1.0 + e
    return acc - 1.0


def rounding_rel(*magnitudes: float) -> float:
    """Relative error from rounding an exponent assembled from terms of the given sizes."""
    return 4.0 * EPS * (math.fsum(abs(m) for m in magnitudes) + 1.0)


def log_add(a: LogValue, b: LogValue) -> LogValue:
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    hi, lo = (a.log_mag, b.log_mag) if a.log_mag >= b.log_mag else (b.log_mag, a.log_mag)
    return LogValue(False, hi + math.log1p(math.exp(lo - hi)))


def log_sum(terms: Iterable[LogValue]) -> LogValue:
    logs = [t.log_mag for t in terms if not t.is_zero]
    if not logs:
        return LogValue.zero()
    m = max(logs)
    return LogValue(False, m + math.log(math.fsum(math.exp(x - m) for x in logs)))


def logaddexp_scalar(x: float, y: float) -> float:
    if x == -math.inf:
        return y
    if y == -math.inf:
        return x
    hi, lo = (x, y) if x >= y else (y, x)
    return hi + math.log1p(math.exp(lo - hi))


def log_sub(x: float, y: float) -> float:
    """``log(exp(x) - exp(y))`` for ``x > y``; ``-inf`` when the difference is not positive."""
    if y == -math.inf:
        return x
    if y >= x:
        return -math.inf
    return x + math.log(-math.expm1(y - x))


def safe_exp(x: float) -> float:
    if x > _EXP_LIMIT:
        return math.inf
    return math.exp(x)


# ---------------------------------------------------------------- factorials

def stirling_log(n: int) -> float:
    """``log(sqrt(2 pi) n^(n+1/2) e^-n)``."""
    return HALF_LOG_2PI + (n + 0.5) * math.log(n) - n


def robbins_bounds(n: int) -> tuple[float, float]:
    """Strict lower and upper bounds on ``log n! - stirling_log(n)``."""
    return 1.0 / (12 * n + 1), 1.0 / (12 * n)


def log_factorial(n: int) -> float:
    """``log(n!)``: exact accumulation up to 20, Stirling series beyond.

    Beyond 20 the series is cut after the ``n**-7`` term; it alternates, so
    the remainder is below the first omitted term ``1/(1188 n^9)``, far
    inside the Robbins sandwich.
    """
    if n < 0:
        raise ValueError("factorial of a negative integer")
    if n <= _EXACT_FACTORIAL_MAX:
        return _LOG_FACT_TABLE[n]
    x = 1.0 / n
    x2 = x * x
    corr = x * (1.0 / 12 - x2 * (1.0 / 360 - x2 * (1.0 / 1260 - x2 / 1680)))
    return stirling_log(n) + corr


def robbins_log_factorial(n: int) -> float:
    """Midpoint of the Robbins sandwich; absolute error below ``1/(12n) - 1/(12n+1)``."""
    lo, hi = robbins_bounds(n)
    return stirling_log(n) + 0.5 * (lo + hi)


def log_factorial_error(n: int) -> float:
    """Absolute error bound on :func:`log_factorial`, rounding included."""
    if n <= _EXACT_FACTORIAL_MAX:
        return 4.0 * EPS * (_LOG_FACT_TABLE[n] + 1.0)
    return 1.0 / (1188.0 * float(n) ** 9) + 4.0 * EPS * (n * math.log(n) + n + 1.0)


def factorial_rel_err(n: int) -> float:
    return math.expm1(log_factorial_error(n))


def concave_tail_bound(f_at_x0: float, f_prime_at_x0: float) -> float:
    """Upper bound for the integral of ``exp(f)`` over ``[x0, inf)``, ``f`` concave."""
    if not f_prime_at_x0 < 0:
        raise ValueError("tail bound needs a strictly negative slope at x0")
    return safe_exp(f_at_x0) / (-f_prime_at_x0)


# ------------------------------------------------------ certified summation

@dataclass(frozen=True)
class SeriesSum:
    """Result of :func:`concave_log_sum`.

    ``tail_rel`` bounds the omitted mass relative to the computed sum; the
    sum itself is a lower bound for the full series.
    """

    log_sum: float
    tail_rel: float
    n_lo: int
    n_hi: int
    n_terms: int

    @property
    def rel_err(self) -> float:
        """Tail plus floating summation error."""
        return self.tail_rel + 2.0 * EPS * (math.log2(max(self.n_terms, 1)) + 4.0)


class _Accumulator:
    __slots__ = ("m", "s")

    def __init__(self) -> None:
        self.m = -math.inf
        self.s = 0.0

    def add(self, v: np.ndarray) -> None:
        bm = float(np.max(v)) if v.size else -math.inf
        if bm == -math.inf:
            return
        if bm > self.m:
            self.s = self.s * math.exp(self.m - bm) if self.s else 0.0
            self.m = bm
        self.s += float(np.sum(np.exp(v - self.m)))

    @property
    def log(self) -> float:
        return self.m + math.log(self.s) if self.s > 0 else -math.inf


def concave_log_sum(
    logterm: Callable[[np.ndarray], np.ndarray],
    start: int,
    lower: int | None = None,
    upper: int | None = None,
    *,
    rel_tol: float,
    max_terms: int,
    exclude: Iterable[int] = (),
) -> SeriesSum:
    """Sum ``exp(logterm(n))`` over integers ``lower <= n <= upper``.

    ``logterm`` must be vectorised over int64 arrays and concave in ``n``.
    Summation runs outward from ``start`` in growing blocks. A direction stops
    at its bound or once the geometric tail certificate
    ``exp(logterm(n)) / (1 - r)`` with ``r = exp(logterm(n+1) - logterm(n)) < 1``
    drops below ``rel_tol`` times the running sum; concavity makes ``r`` an
    upper bound for every later term ratio.
    """
    if lower is not None and upper is not None and lower > upper:
        return SeriesSum(-math.inf, 0.0, start, start, 0)
    if lower is not None:
        start = max(start, lower)
    if upper is not None:
        start = min(start, upper)
    excl = np.array(sorted(set(int(e) for e in exclude)), dtype=np.int64)
    log_tol = math.log(rel_tol)
    acc = _Accumulator()
    n_terms = 0
    tails = []

    def block(lo: int, hi: int) -> np.ndarray:
        n = np.arange(lo, hi, dtype=np.int64)
        v = np.asarray(logterm(n), dtype=np.float64)
        if excl.size:
            v = np.where(np.isin(n, excl), -np.inf, v)
        return v

    def certificate(n: int, step: int) -> float | None:
        pair = np.asarray(logterm(np.array([n, n + step], dtype=np.int64)), dtype=np.float64)
        l0, l1 = float(pair[0]), float(pair[1])
        if l0 == -math.inf:
            return -math.inf
        if not l1 < l0:
            return None
        return l0 - math.log(-math.expm1(l1 - l0))

    # upward, start included
    n = start
    size = 512
    hi_reached = start - 1
    while True:
        stop = n + size if upper is None else min(n + size, upper + 1)
        acc.add(block(n, stop))
        n_terms += stop - n
        hi_reached = stop - 1
        n = stop
        if upper is not None and n > upper:
            break
        tail = certificate(n, 1)
        if tail is not None and (tail == -math.inf or tail <= log_tol + acc.log):
            tails.append(tail)
            break
        if n_terms > max_terms:
            raise TermBudgetExceeded(f"{n_terms} terms summed without a tail certificate")
        size = min(size * 2, 1 << 20)

    # downward
    m = start - 1
    size = 512
    lo_reached = start
    while lower is None or m >= lower:
        lo = m - size + 1 if lower is None else max(m - size + 1, lower)
        acc.add(block(lo, m + 1))
        n_terms += m + 1 - lo
        lo_reached = lo
        m = lo - 1
        if lower is not None and m < lower:
            break
        tail = certificate(m, -1)
        if tail is not None and (tail == -math.inf or tail <= log_tol + acc.log):
            tails.append(tail)
            break
        if n_terms > max_terms:
            raise TermBudgetExceeded(f"{n_terms} terms summed without a tail certificate")
        size = min(size * 2, 1 << 20)

    total = acc.log
    tail_log = -math.inf
    for t in tails:
        tail_log = logaddexp_scalar(tail_log, t)
    if total == -math.inf:
        tail_rel = 0.0 if tail_log == -math.inf else math.inf
    else:
        tail_rel = safe_exp(tail_log - total) if tail_log > -math.inf else 0.0
    return SeriesSum(total, tail_rel, lo_reached, hi_reached, n_terms)
