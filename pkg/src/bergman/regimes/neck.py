"""The neck, ``t`` of order ``sqrt(k)``: theta-sum sandwiches.

``k`` is the series exponent, as in :mod:`bergman.regimes.inside`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import RegimeOutOfRange
from ..numerics import (
    LOG_2PI,
    Enclosure,
    LogValue,
    compose_rel,
    concave_log_sum,
    log_sub,
    rounding_rel,
    safe_exp,
)
from ..oracle import DEFAULT_CONFIG, SeriesConfig
from .common import NECK, ApproxResult, Regime, lattice_index


def gamma_b(k: float, b: int, u: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> Enclosure:
    """``sum_c exp(-(k/2) (c/b - u)^2)`` over all integers ``c``."""
    if b < 1:
        raise ValueError("b must be a positive integer")
    centre = b * u
    scale = 0.5 * k / (b * b)

    def logterm(c: np.ndarray) -> np.ndarray:
        d = c.astype(np.float64) - centre
        return -scale * d * d

    s = concave_log_sum(logterm, int(math.floor(centre + 0.5)), rel_tol=cfg.rel_tol,
                        max_terms=cfg.max_terms)
    reach = max(abs(s.n_lo - centre), abs(s.n_hi - centre))
    return Enclosure(LogValue.from_log(s.log_sum),
                     compose_rel(s.rel_err, rounding_rel(scale * reach * reach, abs(centre))))


def reference_profile(x: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> float:
    """``h(x) = sum_c exp(-(c - x)^2 / 2)``, the k-free neck shape."""
    return gamma_b(1.0, 1, x, cfg).to_real()


def neck_range_ok(k: int, b: int) -> bool:
    return 3 < b <= math.sqrt(k) * math.log(k)


@dataclass(frozen=True)
class NeckBounds:
    """Lower/upper sandwich for the kernel; ``lower`` is zero when its formula is negative."""

    lower: Enclosure
    upper: Enclosure
    branch: str
    u: float
    lower_trivial: bool


def _bracket(x: float, gamma: Enclosure, y_log: float) -> tuple[LogValue, float, bool]:
    """``x * gamma - exp(y_log)`` in log domain with its relative error."""
    if x <= 0:
        return LogValue.zero(), 0.0, True
    lead = math.log(x) + gamma.log
    out = log_sub(lead, y_log)
    if out == -math.inf:
        return LogValue.zero(), 0.0, True
    amplification = math.exp(lead - out)
    return LogValue.from_log(out), gamma.rel_err * amplification, False


def rho_neck_bounds(k: int, t: float, b: int, cfg: SeriesConfig = DEFAULT_CONFIG,
                    prefactor: str = "derived") -> NeckBounds:
    """Sandwich for the kernel at ``t`` in the neck.

    On the lattice ``t = k/b``:
    ``e^{-1/12k}/b (k/2pi)^{3/2} [(1 - 8L^4/k) gamma(0) - (6 + 2e^{8L^3/(3 sqrt k)}) k^{-2L}]``
    below and ``(1/b) (k/2pi)^{3/2} gamma(0)`` above, ``L = log k``.

    Between lattice points (``u = 1 - t b/k``) the prefactor is
    ``t sqrt(k) / (2pi)^{3/2}``, which meets the lattice form as ``u -> 0``.
    ``prefactor="verbatim"`` uses ``t k / (2pi)^{3/2}`` instead.
    """
    if not neck_range_ok(k, b):
        raise RegimeOutOfRange(f"b={b} outside (3, sqrt(k) log k] at k={k}")
    L = math.log(k)
    rk = math.sqrt(k)
    if lattice_index(k, t) == b:
        g = gamma_b(k, b, 0.0, cfg)
        pre = -math.log(b) + 1.5 * (math.log(k) - LOG_2PI)
        y_log = math.log(6.0 + 2.0 * math.exp(8 * L ** 3 / (3 * rk))) - 2 * L * L
        inner, inner_err, trivial = _bracket(1.0 - 8 * L ** 4 / k, g, y_log)
        lower = Enclosure(inner.scale(pre - 1.0 / (12 * k)), compose_rel(inner_err, rounding_rel(pre, 1.0)))
        upper = Enclosure(g.value.scale(pre), compose_rel(g.rel_err, rounding_rel(pre)))
        return NeckBounds(lower, upper, "lattice", 0.0, trivial)
    if not (k / (b + 1) < t < k / b):
        raise RegimeOutOfRange(f"t={t} neither k/b nor inside (k/(b+1), k/b)")
    u = 1.0 - t * b / k
    g = gamma_b(k, b, u, cfg)
    kpow = 0.5 * math.log(k) if prefactor == "derived" else math.log(k)
    pre = math.log(t) + kpow - 1.5 * LOG_2PI
    c3 = L ** 3 / (3 * rk)
    y_log = math.log(12.0) - 0.5 * k * (L / rk - u) ** 2
    inner, inner_err, trivial = _bracket(1.0 - c3, g, y_log)
    lower = Enclosure(inner.scale(pre - 1.0 / (12 * k)), compose_rel(inner_err, rounding_rel(pre, 1.0)))
    upper = Enclosure(g.value.scale(pre + math.log1p(c3)), compose_rel(g.rel_err, rounding_rel(pre, c3)))
    return NeckBounds(lower, upper, "interior", u, trivial)


def neck_index(k: int, t: float) -> int:
    """``b`` with ``t`` in ``(k/(b+1), k/b]``."""
    b = lattice_index(k, t)
    return b if b is not None else int(math.floor(k / t))


def rho_neck(k: int, t: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> ApproxResult:
    """Midpoint of the neck sandwich with half the relative gap as envelope."""
    b = neck_index(k, t)
    nb = rho_neck_bounds(k, t, b, cfg)
    up_log = nb.upper.log
    lo_rel = safe_exp(nb.lower.log - up_log) if not nb.lower.value.is_zero else 0.0
    mid_log = up_log + math.log((1.0 + lo_rel) / 2.0)
    env = (1.0 - lo_rel) / (1.0 + lo_rel)
    err = max(nb.lower.rel_err, nb.upper.rel_err)
    return ApproxResult(
        Enclosure(LogValue.from_log(mid_log), err),
        env,
        Regime(NECK, b=b, u=nb.u),
        {"branch": nb.branch, "log_lower": nb.lower.log, "log_upper": up_log,
         "lower_trivial": nb.lower_trivial},
    )
