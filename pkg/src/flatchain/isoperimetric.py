"""Check ``F(A) <= eta(M(A)) (M_h(A) + N(A))`` on concrete chains.

The deformation constant ``c`` is not known in closed form, so it is a
parameter here and :func:`calibrate_constant` measures the smallest value that
makes a suite of chains pass.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Sequence

from .chain import Chain
from .cost import eta, eta_star
from .flatnorm import flat_norm


@dataclass(frozen=True)
class IsoperimetricReport:
    lhs: float
    rhs: float
    rhs_star: float
    mass: float
    h_mass: float
    normal_mass: float
    c: float
    k: int

    @property
    def passed(self) -> bool:
        return bool(self.lhs <= self.rhs * (1 + 1e-9) + 1e-12)

    @property
    def passed_star(self) -> bool:
        return bool(self.lhs <= self.rhs_star * (1 + 1e-9) + 1e-12)

    @property
    def slack(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else 0.0

    @property
    def slack_star(self) -> float:
        return self.lhs / self.rhs_star if self.rhs_star > 0 else 0.0

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(passed=self.passed, passed_star=self.passed_star,
                   slack=self.slack, slack_star=self.slack_star)
        return out


def isoperimetric_report(A: Chain, h, c: float, margin: int | None = None, box=None,
                         flat: float | None = None) -> IsoperimetricReport:
    """Both sides of the inequality and of its ``M_h``-based variant.

    ``flat`` lets callers reuse a flat norm computed earlier.
    """
    lhs = flat if flat is not None else flat_norm(A, margin=margin, box=box).value
    m, mh, nm = A.mass(), A.h_mass(h), A.normal_mass()
    nu = mh + nm
    rhs = eta(h, m, c, A.k) * nu
    rhs_star = eta_star(h, mh, c, A.k) * nu
    return IsoperimetricReport(float(lhs), float(rhs), float(rhs_star), m, mh, nm, c, A.k)


def minimal_constant(A: Chain, h, flat: float, lower: float = 1.0, upper: float = 1e6,
                     rtol: float = 1e-6) -> float:
    """Smallest ``c >= lower`` with ``flat <= eta(M(A); c) (M_h + N)``; bisection (monotone in c)."""
    nu = A.h_mass(h) + A.normal_mass()
    m = A.mass()

    def ok(c):
        return flat <= eta(h, m, c, A.k) * nu * (1 + 1e-9) + 1e-12

    if ok(lower):
        return lower
    lo, hi = lower, lower * 2
    while not ok(hi):
        lo, hi = hi, hi * 2
        if hi > upper:
            return float("inf")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def calibrate_constant(chains: Sequence[Chain], h, flats: Sequence[float], floor: float = 1.0) -> dict:
    """Constant making every chain pass, clamped below at ``floor``.

    Also reports the raw empirical constant (bisection from ``1e-6``).
    """
    per_chain = [minimal_constant(A, h, F, lower=1e-6) for A, F in zip(chains, flats)]
    raw = max(per_chain, default=0.0)
    return {"c": max(floor, raw), "raw": raw, "per_chain": per_chain}
