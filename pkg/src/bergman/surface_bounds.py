"""Effective constants for a punctured Riemann surface with Poincare-type cusps.

The surface enters only through five numbers: the bundle power ``k``, the
curvature constant ``epsilon``, the Ricci lower bound ``lambda_``, the
coordinate disk radius ``R`` around each cusp and the degree ``d``. Everything
below is closed-form arithmetic on those, carried in log domain because the
bounds are of size ``exp(-k**(9/8))`` and worse.

``log(R/2)`` is negative; factors such as ``(-2e log(R/2))**k`` are assembled
from ``log(-log(R/2))`` so only magnitudes are ever exponentiated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .exceptions import InapplicableAssumptions
from .numerics import LogValue, logaddexp_scalar

LOG2 = math.log(2.0)
ASSUMPTION3_MIN_K = 23190


@dataclass(frozen=True)
class SurfaceParams:
    k: int
    epsilon: float
    lambda_: float
    R: float
    d: float = 1.0

    def __post_init__(self) -> None:
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 3:
            raise ValueError(f"k must be an integer >= 3, got {self.k!r}")
        if not (0.0 < self.R <= 0.5):
            raise ValueError(f"R must lie in (0, 1/2], got {self.R}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.d > 0:
            raise ValueError(f"d must be positive, got {self.d}")
        if not math.isfinite(self.lambda_):
            raise ValueError("lambda must be finite")

    # Frequently used logs. ``L2`` is ``-log(R/2) > 0``, ``L1`` is ``-log R > 0``.
    @property
    def L1(self) -> float:
        return -math.log(self.R)

    @property
    def L2(self) -> float:
        return -math.log(self.R / 2.0)

    @property
    def log_eps_eff(self) -> float:
        """``log(epsilon + lambda/k)``; ``nan`` when the argument is not positive."""
        x = self.epsilon + self.lambda_ / self.k
        return math.log(x) if x > 0 else math.nan

    @property
    def a0(self) -> float:
        return (self.k - 2) / (2.0 * self.L2)

    @property
    def a1(self) -> float:
        return (self.k - 2) / (2.0 * self.L1)

    @property
    def a2(self) -> float:
        return self.k ** 0.75

    @property
    def t1(self) -> float:
        return 2.0 * self.L1 + 0.5


def wk_threshold(k: int) -> float:
    """Smallest ``t`` in ``W_k``: ``|z| <= exp(-(k-2)^(3/8))`` means ``t >= 2 (k-2)^(3/8)``."""
    if k < 3:
        raise ValueError("need k >= 3")
    return 2.0 * (k - 2) ** 0.375


# -------------------------------------------------------------- assumptions

@dataclass(frozen=True)
class AssumptionReport:
    a1: bool
    a2: bool
    a3: bool
    a4: bool
    a5: bool
    binding_margins: list[float] = field(default_factory=list)

    def as_list(self) -> list[bool]:
        return [self.a1, self.a2, self.a3, self.a4, self.a5]

    @property
    def first_three(self) -> bool:
        return self.a1 and self.a2 and self.a3


def _margins(p: SurfaceParams) -> list[float]:
    k = p.k
    lk = math.log(k)
    le = p.log_eps_eff
    kel = k * p.epsilon + p.lambda_
    m1 = lk + math.log(p.L1) - le if not math.isnan(le) else -math.inf
    m2 = lk - 4.0 * math.log(9.0 * p.L2)
    m3 = lk - math.log(ASSUMPTION3_MIN_K)
    # (R/2)^{k/(-2e log(R/2))} is exactly e^{-k/(2e)}
    m4 = k / (2.0 * math.e) - 0.25 * lk - 0.5 * math.log(kel) if kel > 0 else -math.inf
    m5 = 0.25 * lk - math.log(2.0 * math.e * p.L2) + le / k if not math.isnan(le) else -math.inf
    return [m1, m2, m3, m4, m5]


def check_assumptions(p: SurfaceParams) -> AssumptionReport:
    """The five standing assumptions, with log-domain slack (nonnegative means satisfied).

    1. ``log k + log(-log R) - log(eps + lambda/k) > 0``
    2. ``k >= (-9 log(R/2))^4``
    3. ``k >= 23190``
    4. ``k^(1/4) sqrt(k eps + lambda) (R/2)^(k / (-2e log(R/2))) <= 1``
    5. ``log(k)/4 >= log(-2e log(R/2)) - log(eps + lambda/k)/k``

    Assumption 2 and 3 compare integers with reals exactly, not through the
    logs.
    """
    m = _margins(p)
    a2 = p.k >= (9.0 * p.L2) ** 4
    a3 = p.k >= ASSUMPTION3_MIN_K
    return AssumptionReport(m[0] > 0, a2, a3, m[3] >= 0, m[4] >= 0, m)


def geometry_advisory(epsilon: float, lambda_: float, d: float, v: float, g: int, N: int) -> dict[str, bool]:
    """Whether ``epsilon <= d/v`` and ``lambda <= (2 - 2g - N)/v`` (volume ``v``, genus ``g``, ``N`` cusps).

    Informational only; nothing else in the module consults it.
    """
    if not v > 0:
        raise ValueError("volume must be positive")
    return {"epsilon_ok": epsilon <= d / v, "lambda_ok": lambda_ <= (2 - 2 * g - N) / v}


# ------------------------------------------------------------- A_a and B_a

def log_bound_A(p: SurfaceParams, a: float) -> float:
    """``log A_a``, ``A_a = (k-1)/(5 sqrt k) (-2e a log(R/2)/k)^(k-1) (R/2)^(2a)``."""
    if not a > 0:
        raise ValueError("a must be positive")
    k = p.k
    return (math.log((k - 1) / (5.0 * math.sqrt(k)))
            + (k - 1) * (LOG2 + 1.0 + math.log(a * p.L2 / k))
            - 2.0 * a * p.L2)


def log_bound_B(p: SurfaceParams, a: float) -> float:
    """``log B_a``, ``B_a = sqrt(k)(k-1)/(a(k eps + lambda)) (-2e a log(R/2)/k)^k (R/2)^(2a)``."""
    if not a > 0:
        raise ValueError("a must be positive")
    k = p.k
    kel = k * p.epsilon + p.lambda_
    if not kel > 0:
        raise InapplicableAssumptions("k*epsilon + lambda must be positive")
    return (0.5 * math.log(k) + math.log(k - 1) - math.log(a) - math.log(kel)
            + k * (LOG2 + 1.0 + math.log(a * p.L2 / k))
            - 2.0 * a * p.L2)


def bound_A(p: SurfaceParams, a: int) -> LogValue:
    return LogValue.from_log(log_bound_A(p, a))


def bound_B(p: SurfaceParams, a: int) -> LogValue:
    return LogValue.from_log(log_bound_B(p, a))


def log_B_ratio(p: SurfaceParams, a: int) -> float:
    """``log(B_{a+1}/B_a) = (k-1) log((a+1)/a) + 2 log(R/2)``."""
    return (p.k - 1) * math.log1p(1.0 / a) - 2.0 * p.L2


def log_E_sum(p: SurfaceParams, a_max: float | None = None) -> float:
    """``log sum_{1 <= a <= a_max} sqrt(B_a)``, default ``a_max = a0``."""
    top = int(math.floor(p.a0 if a_max is None else a_max))
    acc = -math.inf
    for a in range(1, top + 1):
        acc = logaddexp_scalar(acc, 0.5 * log_bound_B(p, a))
    return acc


def log_E_bound(p: SurfaceParams, a0: float | None = None) -> float:
    """``log(a0 sqrt(B_a0))``, the monotone bound on :func:`log_E_sum`."""
    a = p.a0 if a0 is None else a0
    return math.log(a) + 0.5 * log_bound_B(p, a)


# -------------------------------------------------- I / II / III comparison

@dataclass(frozen=True)
class Dominance:
    I: LogValue
    II: LogValue
    III: LogValue
    I_gt_II: bool
    II_gt_III: bool
    assumptions_hold: bool


def log_term_I(p: SurfaceParams) -> float:
    """``log(2 a2 B_a2)``."""
    return LOG2 + math.log(p.a2) + log_bound_B(p, p.a2)


def log_term_II(k: int) -> float:
    """``log 6 + (k-1)/8 log k + k - k^(9/8)``."""
    return math.log(6.0) + (k - 1) / 8.0 * math.log(k) + k - k ** 1.125


def log_u1(p: SurfaceParams) -> float:
    k = p.k
    gap = p.a1 - p.a0
    return (math.log(1.5) - math.log(gap)
            + (k - 2) * math.log(p.L2 / p.t1)
            + (k - 1) * (0.375 * math.log(k - 2) - math.log(p.L2)))


def log_u2(p: SurfaceParams, i: float) -> float:
    return -i * (0.88 + (p.k - 2) ** 0.375 / 4.0 - 2.0 * p.L2)


def log_term_III(p: SurfaceParams) -> float:
    """``log(2 u1 u2(a1)^2)``."""
    return LOG2 + log_u1(p) + 2.0 * log_u2(p, p.a1)


def dominance_check(p: SurfaceParams) -> Dominance:
    lI, lII, lIII = log_term_I(p), log_term_II(p.k), log_term_III(p)
    return Dominance(LogValue.from_log(lI), LogValue.from_log(lII), LogValue.from_log(lIII),
                     lI > lII, lII > lIII, check_assumptions(p).first_three)


# ---------------------------------------------------------------- envelopes

def _require_first_three(p: SurfaceParams) -> None:
    rep = check_assumptions(p)
    if not rep.first_three:
        failed = [str(i + 1) for i, ok in enumerate(rep.as_list()[:3]) if not ok]
        raise InapplicableAssumptions(f"assumption(s) {', '.join(failed)} fail at k={p.k}, R={p.R}")


def _log_common(p: SurfaceParams) -> float:
    """``-log(eps + lambda/k)/2 + (k/2) log(-2e log(R/2)) + k^(3/4) log(R/2)``."""
    le = p.log_eps_eff
    if math.isnan(le):
        raise InapplicableAssumptions("epsilon + lambda/k must be positive")
    k = p.k
    return -0.5 * le + 0.5 * k * (LOG2 + 1.0 + math.log(p.L2)) - p.a2 * p.L2


def log_envelope_T15(p: SurfaceParams, enforce: bool = True) -> float:
    """``log[50 (1+d) k^(-(k-5)/8) / sqrt(eps + lambda/k) (-2e log(R/2))^(k/2) (R/2)^(k^(3/4))]``."""
    if enforce:
        _require_first_three(p)
    k = p.k
    return math.log(50.0 * (1.0 + p.d)) - (k - 5) / 8.0 * math.log(k) + _log_common(p)


def log_envelope_T15_proof_form(p: SurfaceParams) -> float:
    """``log(50 (1+d) a2 sqrt(B_a2))``.

    Algebraically this is the closed form above times ``sqrt(1 - 1/k)``;
    the closed form rounds ``k - 1`` up to ``k``.
    """
    return math.log(50.0 * (1.0 + p.d)) + math.log(p.a2) + 0.5 * log_bound_B(p, p.a2)


def envelope_T15(p: SurfaceParams, enforce: bool = True) -> LogValue:
    """Relative envelope on the kernel near each cusp, on ``W_k``."""
    return LogValue.from_log(log_envelope_T15(p, enforce))


def t16_extra_condition(p: SurfaceParams) -> bool:
    """``2 k^(3/4) >= log(eps + lambda/k) / log(R/2)``."""
    return 2.0 * p.a2 >= p.log_eps_eff / (-p.L2)


def log_envelope_T16(p: SurfaceParams, t: float, enforce: bool = True) -> float:
    """``log[(1 + d/k^2) 25 sqrt2 t k^(-(k-10)/8) / sqrt(eps + lambda/k) (-2e log(R/2))^(k/2) (R/2)^(k^(3/4))]``."""
    if not t > 0:
        raise ValueError("t must be positive")
    if enforce:
        _require_first_three(p)
        if not t16_extra_condition(p):
            raise InapplicableAssumptions("2 k^(3/4) >= log(eps + lambda/k)/log(R/2) fails")
        if t < wk_threshold(p.k):
            raise InapplicableAssumptions(f"t={t} below the W_k threshold {wk_threshold(p.k)}")
    k = p.k
    return (math.log1p(p.d / (k * k)) + math.log(25.0 * math.sqrt(2.0)) + math.log(t)
            - (k - 10) / 8.0 * math.log(k) + _log_common(p))


def envelope_T16(p: SurfaceParams, t: float, enforce: bool = True) -> LogValue:
    """Envelope on the gradient difference relative to the model kernel."""
    return LogValue.from_log(log_envelope_T16(p, t, enforce))
