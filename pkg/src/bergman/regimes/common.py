from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..numerics import Enclosure

LATTICE_TOL = 2.0 ** -40


@dataclass(frozen=True)
class Regime:
    """Which approximation produced a value, with its parameters.

    ``tag`` is one of ``"inside"``, ``"lattice"``, ``"neck"``, ``"outside"``,
    ``"oracle"``.
    """

    tag: str
    a: int | None = None
    b: int | None = None
    u: float | None = None

    def label(self) -> str:
        if self.tag == "inside":
            return f"InsideTwoTerm(a={self.a})"
        if self.tag == "lattice":
            return f"Lattice(b={self.b})"
        if self.tag == "neck":
            return f"Neck(b={self.b},u={self.u:.17g})"
        return self.tag.capitalize()


INSIDE, LATTICE, NECK, OUTSIDE, ORACLE = "inside", "lattice", "neck", "outside", "oracle"


@dataclass(frozen=True)
class ApproxResult:
    """An approximation plus its proven relative envelope.

    ``details`` holds regime-specific diagnostics (log envelopes, absolute
    envelopes, lower sandwich bounds).
    """

    value: Enclosure
    envelope: float
    regime: Regime
    details: dict = field(default_factory=dict)

    def contains_log(self, log_x: float, extra_rel: float = 0.0) -> bool:
        w = self.envelope + self.value.rel_err + extra_rel
        lo = self.value.log + (math.log1p(-w) if w < 1 else -math.inf)
        return lo <= log_x <= self.value.log + math.log1p(w)


def lattice_index(k: int, t: float) -> int | None:
    """The integer ``b`` with ``t == k/b`` up to :data:`LATTICE_TOL`, if any."""
    b = round(k / t)
    if b >= 1 and abs(t * b / k - 1.0) <= LATTICE_TOL:
        return b
    return None
