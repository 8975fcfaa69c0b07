"""Pick the regime with the tightest proven envelope at a point."""

from __future__ import annotations

import math

from ..exceptions import RegimeOutOfRange
from ..oracle import DEFAULT_CONFIG, SeriesConfig, rho_shifted
from .common import INSIDE, LATTICE, NECK, ORACLE, OUTSIDE, ApproxResult, Regime, lattice_index
from .inside import b1_domain_min, rho_inside_two_term, rho_lattice, rho_lattice_b1
from .neck import neck_index, neck_range_ok, rho_neck
from .outside import rho_outside

ORACLE_THRESHOLD = 1e-2
_PRIORITY = {LATTICE: 0, INSIDE: 1, NECK: 2, OUTSIDE: 3}


def candidates(k: int, t: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> list[ApproxResult]:
    """Every regime whose hypotheses hold at ``(k, t)``, evaluated."""
    out = []
    b = lattice_index(k, t)
    if t >= b1_domain_min(k):
        out.append(rho_lattice_b1(k, t))
    if b is not None and b >= 2:
        try:
            out.append(rho_lattice(k, b))
        except RegimeOutOfRange:
            pass
    a = int(math.floor(k / t))
    if a >= 1 and k / (a + 1) < t < k / a:
        try:
            out.append(rho_inside_two_term(k, t, a))
        except RegimeOutOfRange:
            pass
    if neck_range_ok(k, neck_index(k, t)):
        out.append(rho_neck(k, t, cfg))
    if t <= k:
        try:
            out.append(rho_outside(k, t, cfg))
        except RegimeOutOfRange:
            pass
    return out


def _best(k: int, t: float, cfg: SeriesConfig) -> ApproxResult | None:
    cands = [c for c in candidates(k, t, cfg) if math.isfinite(c.envelope)]
    if not cands:
        return None
    best = min(cands, key=lambda c: (c.envelope, _PRIORITY[c.regime.tag]))
    return best if best.envelope <= ORACLE_THRESHOLD else None


def select_regime(k: int, t: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> Regime:
    if k < 3 or not t > 0:
        raise ValueError("need k >= 3 and t > 0")
    best = _best(k, t, cfg)
    return best.regime if best is not None else Regime(ORACLE)


def oracle_result(k: int, t: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> ApproxResult:
    enc = rho_shifted(k, t, cfg)
    return ApproxResult(enc, enc.rel_err, Regime(ORACLE), {})


def rho_eval(k: int, t: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> ApproxResult:
    """Kernel for bundle power ``k + 1`` at ``t`` through the best regime."""
    if k < 3 or not t > 0:
        raise ValueError("need k >= 3 and t > 0")
    try:
        best = _best(k, t, cfg)
    except RegimeOutOfRange:
        best = None
    return best if best is not None else oracle_result(k, t, cfg)


def evaluate(k: int, t: float, method: str = "auto", cfg: SeriesConfig = DEFAULT_CONFIG) -> ApproxResult:
    """Evaluate with a forced method; raises :class:`RegimeOutOfRange` when it does not apply."""
    if method == "auto":
        return rho_eval(k, t, cfg)
    if method == "oracle":
        return oracle_result(k, t, cfg)
    if method == "lattice":
        b = lattice_index(k, t)
        if b is None:
            if round(k / t) == 1:
                return rho_lattice_b1(k, t)
            raise RegimeOutOfRange(f"t={t} is not a lattice point k/b for k={k}")
        return rho_lattice_b1(k, t) if b == 1 else rho_lattice(k, b)
    if method == "inside":
        return rho_inside_two_term(k, t, int(math.floor(k / t)))
    if method == "neck":
        return rho_neck(k, t, cfg)
    if method == "outside":
        return rho_outside(k, t, cfg)
    raise ValueError(f"unknown method {method!r}")
