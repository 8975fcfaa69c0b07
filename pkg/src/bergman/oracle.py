"""Ground truth for the punctured-disk kernel by direct summation.

Canonical object: for an integer ``k >= 3`` and ``t = -log|z|^2 > 0``,

    rho(k, t) = t**k / (2 pi (k-2)!) * sum_{a>=1} a**(k-1) exp(-a t).

The approximation formulas in :mod:`bergman.regimes` are written for the
kernel with one more power of the bundle, i.e. ``rho(k+1, t)``; use
:func:`rho_shifted` for that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .exceptions import CancellationLoss
from .numerics import (
    EPS,
    LOG_2PI,
    Enclosure,
    LogValue,
    compose_rel,
    concave_log_sum,
    factorial_rel_err,
    log_factorial,
    log_sub,
    rounding_rel,
)

CANCELLATION_LIMIT = 1e8


@dataclass(frozen=True)
class KernelPoint:
    k: int
    t: float

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 3:
            raise ValueError(f"k must be an integer >= 3, got {self.k}")
        if not (self.t > 0 and math.isfinite(self.t)):
            raise ValueError(f"t must be positive and finite, got {self.t}")


@dataclass(frozen=True)
class SeriesConfig:
    rel_tol: float = 1e-13
    max_terms: int = 10_000_000

    def __post_init__(self) -> None:
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")


DEFAULT_CONFIG = SeriesConfig()


def _peak(m: int, t: float) -> int:
    return max(1, int(round(m / t)))


def _power_logterm(m: int, t: float, ref: int):
    def logterm(a: np.ndarray) -> np.ndarray:
        d = (a - ref).astype(np.float64)
        with np.errstate(divide="ignore"):
            return m * np.log1p(d / ref) - d * t if m else -d * t
    return logterm


def _range_scale(m: int, t: float, ref: int, lo: int, hi: int) -> float:
    """Largest exponent component touched, for the rounding bound."""
    out = 0.0
    for a in (lo, hi):
        if a >= 1:
            out = max(out, abs(m * math.log(a / ref)) + abs(a - ref) * t)
    return out


def power_series(m: int, t: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> Enclosure:
    """``S(m, t) = sum_{a>=1} a**m exp(-a t)`` with a certified tail."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if not t > 0:
        raise ValueError("t must be positive")
    a0 = _peak(m, t)
    s = concave_log_sum(_power_logterm(m, t, a0), a0, lower=1,
                        rel_tol=cfg.rel_tol, max_terms=cfg.max_terms)
    log_peak = m * math.log(a0) - a0 * t
    err = compose_rel(s.rel_err,
                      rounding_rel(m * math.log(a0), a0 * t, _range_scale(m, t, a0, s.n_lo, s.n_hi)))
    return Enclosure(LogValue.from_log(log_peak + s.log_sum), err)


def power_series_ratio(m: int, t: float, ref: int, exclude: Iterable[int] = (),
                       cfg: SeriesConfig = DEFAULT_CONFIG) -> Enclosure:
    """``sum_{a>=1, a not in exclude} (a/ref)**m exp(-(a-ref) t)``.

    This is ``S(m, t)`` divided by its ``a = ref`` term, with chosen terms
    left out, so excesses like ``S / term - 1`` keep full relative precision.
    """
    if ref < 1:
        raise ValueError("ref must be a positive integer")
    a0 = _peak(m, t)
    s = concave_log_sum(_power_logterm(m, t, ref), a0, lower=1,
                        rel_tol=cfg.rel_tol, max_terms=cfg.max_terms, exclude=exclude)
    err = compose_rel(s.rel_err, rounding_rel(_range_scale(m, t, ref, s.n_lo, s.n_hi)))
    return Enclosure(LogValue.from_log(s.log_sum), err)


def _log_prefactor(k: int, t: float) -> tuple[float, float]:
    """Log of ``t**k / (2 pi (k-2)!)`` and its relative error."""
    lf = log_factorial(k - 2)
    lp = k * math.log(t) - LOG_2PI - lf
    return lp, compose_rel(2.0 * factorial_rel_err(k - 2), rounding_rel(k * math.log(t), lf))


def rho(p: KernelPoint, cfg: SeriesConfig = DEFAULT_CONFIG) -> Enclosure:
    s = power_series(p.k - 1, p.t, cfg)
    lp, perr = _log_prefactor(p.k, p.t)
    return Enclosure(s.value.scale(lp), compose_rel(s.rel_err, perr))


def rho_shifted(k: int, t: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> Enclosure:
    """The kernel for bundle power ``k + 1``, the index the regime formulas use."""
    return rho(KernelPoint(k + 1, t), cfg)


def tau_sq(k: int, a: int) -> LogValue:
    """Squared normalisation of the monomial ``z**a``: ``a**(k-1) / (2 pi (k-2)!)``."""
    if k < 3 or a < 1:
        raise ValueError("need k >= 3 and a >= 1")
    return LogValue.from_log((k - 1) * math.log(a) - LOG_2PI - log_factorial(k - 2))


def rho_gradient_norm(p: KernelPoint, cfg: SeriesConfig = DEFAULT_CONFIG) -> Enclosure:
    """``sqrt(2) * t * |d rho / dt|`` by termwise differentiation.

    The derivative is ``sum_a (k/t - a) T_a`` with ``T_a`` the kernel's
    summands. The parts with ``a < k/t`` and ``a > k/t`` are each summed
    with concave exponents and only combined at the end.
    """
    k, t = p.k, p.t
    m = k - 1
    c = k / t
    a0 = _peak(m, t)

    def part(sign: int):
        def logterm(a: np.ndarray) -> np.ndarray:
            af = a.astype(np.float64)
            gap = sign * (c - af)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = m * np.log1p((af - a0) / a0) - (af - a0) * t + np.log(np.where(gap > 0, gap, 0.0))
            return np.where(gap > 0, out, -np.inf)
        return logterm

    split = math.floor(c)
    if split == c:
        # a == k/t contributes nothing
        lo_hi, hi_lo = split - 1, split + 1
    else:
        lo_hi, hi_lo = split, split + 1
    kw = dict(rel_tol=cfg.rel_tol, max_terms=cfg.max_terms)
    if lo_hi >= 1:
        pos = concave_log_sum(part(1), min(max(a0, 1), lo_hi), lower=1, upper=lo_hi, **kw)
    else:
        pos = None
    neg = concave_log_sum(part(-1), max(a0, hi_lo, 1), lower=max(hi_lo, 1), **kw)
    lp_pos = pos.log_sum if pos else -math.inf
    lp_neg = neg.log_sum
    hi = max(lp_pos, lp_neg)
    lo = min(lp_pos, lp_neg)
    log_diff = log_sub(hi, lo)
    total = hi + math.log1p(math.exp(lo - hi)) if lo > -math.inf else hi
    if log_diff == -math.inf or total - log_diff > math.log(CANCELLATION_LIMIT):
        raise CancellationLoss(f"positive and negative parts cancel (k={k}, t={t})")
    ratio = math.exp(total - log_diff)
    scale = _range_scale(m, t, a0, min(neg.n_lo, pos.n_lo if pos else neg.n_lo), neg.n_hi)
    part_err = max(pos.rel_err if pos else 0.0, neg.rel_err) + rounding_rel(scale)
    lp, perr = _log_prefactor(k, t)
    log_peak = m * math.log(a0) - a0 * t
    log_val = log_diff + log_peak + lp + math.log(math.sqrt(2.0) * t)
    err = compose_rel(part_err * ratio, perr, rounding_rel(log_peak, lp))
    return Enclosure(LogValue.from_log(log_val), err)


def rho_gradient_norm_fd(p: KernelPoint, cfg: SeriesConfig = DEFAULT_CONFIG,
                         step: float | None = None) -> float:
    """Central finite-difference fallback for :func:`rho_gradient_norm`."""
    h = 1e-5 * p.t if step is None else step
    up = rho(KernelPoint(p.k, p.t + h), cfg).to_real()
    down = rho(KernelPoint(p.k, p.t - h), cfg).to_real()
    return math.sqrt(2.0) * p.t * abs(up - down) / (2.0 * h)


__all__ = [
    "CANCELLATION_LIMIT",
    "DEFAULT_CONFIG",
    "EPS",
    "KernelPoint",
    "SeriesConfig",
    "power_series",
    "power_series_ratio",
    "rho",
    "rho_gradient_norm",
    "rho_gradient_norm_fd",
    "rho_shifted",
    "tau_sq",
]
