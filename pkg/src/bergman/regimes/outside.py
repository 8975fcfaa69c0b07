"""Away from the puncture: the Poisson-resummed series.

Poisson summation over the shifted index turns the kernel for bundle power
``k + 1`` into

    (k / 2 pi) * sum_xi (1 + 2 pi i xi / t)^-(k+1)
      = (k / 2 pi) * (1 + sum_{xi>=1} 2 (1 + y^2)^-(k+1)/2 cos((k+1) atan y)),

with ``y = 2 pi xi / t``. Terms shrink monotonically in ``xi``.
"""

from __future__ import annotations

import math

from ..exceptions import SlowConvergence
from ..numerics import EPS, Enclosure, LogValue, compose_rel, safe_exp
from ..oracle import DEFAULT_CONFIG, SeriesConfig
from .common import OUTSIDE, ApproxResult, Regime

MAX_XI = 1_000_000


def log_outside_envelope(k: int, t: float) -> float:
    """Log of ``(t^2/(pi^2 (k-1)) + 2(k+1)/(k-1)) (1 + (2 pi/t)^2)^-(k+1)/2``."""
    pre = t * t / (math.pi ** 2 * (k - 1)) + 2.0 * (k + 1) / (k - 1)
    return math.log(pre) - 0.5 * (k + 1) * math.log1p((2.0 * math.pi / t) ** 2)


def _tail_log(p: float, t: float, n: int) -> float:
    """Log bound on ``sum_{xi>n} 2 (1 + (2 pi xi/t)^2)^(-p/2)`` via the weighted integral."""
    q = p - 2.0
    return (math.log(2.0 * t * t / (2.0 * math.pi ** 2 * n * q))
            - 0.5 * q * math.log1p((2.0 * math.pi * n / t) ** 2))


def poisson_correction(k: int, t: float, cfg: SeriesConfig = DEFAULT_CONFIG,
                       exponent: str = "derived") -> tuple[float, float]:
    """``(eps, err)``: the oscillating correction and an absolute error bound.

    ``exponent="derived"`` uses magnitude ``(1+y^2)^-(k+1)/2``;
    ``"displayed"`` uses ``-(k-1)/2`` for diagnostics.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if t > k:
        raise SlowConvergence(f"t={t} > k={k}: Poisson side decays too slowly")
    p = k + 1.0 if exponent == "derived" else k - 1.0
    if p <= 2.0:
        raise SlowConvergence("magnitude exponent too small for the tail bound")
    terms = []
    abs_sum = 0.0
    xi = 0
    while True:
        xi += 1
        y = 2.0 * math.pi * xi / t
        log_mag = -0.5 * p * math.log1p(y * y)
        mag = 2.0 * safe_exp(log_mag)
        terms.append(mag * math.cos((k + 1) * math.atan(y)))
        abs_sum += mag
        tail = _tail_log(p, t, xi)
        if mag < cfg.rel_tol and tail < math.log(cfg.rel_tol) - 1.0:
            break
        if xi >= MAX_XI:
            raise SlowConvergence(f"no tail certificate after {MAX_XI} terms")
    eps = math.fsum(terms)
    # cos of a large argument: phase error ~ EPS * (k+1) * atan(y)
    err = safe_exp(tail) + abs_sum * EPS * (4.0 + (k + 1) * math.pi / 2) + 4.0 * EPS * (1.0 + abs(eps))
    return eps, err


def rho_outside(k: int, t: float, cfg: SeriesConfig = DEFAULT_CONFIG,
                exponent: str = "derived") -> ApproxResult:
    if k < 3:
        raise ValueError("need k >= 3")
    eps, err = poisson_correction(k, t, cfg, exponent)
    factor = 1.0 + eps
    if factor <= 0:
        raise SlowConvergence("resummed series lost all significance")
    log_val = math.log(k / (2.0 * math.pi)) + math.log(factor)
    rel = compose_rel(err / factor, 4.0 * EPS)
    log_env = log_outside_envelope(k, t)
    return ApproxResult(
        Enclosure(LogValue.from_log(log_val), rel),
        safe_exp(log_env),
        Regime(OUTSIDE),
        {"log_envelope": log_env, "correction": eps, "leading": k / (2.0 * math.pi),
         "exponent": exponent},
    )
