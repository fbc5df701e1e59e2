"""Concave cost functions h and the isoperimetric moduli built from them.

:class:`CostFunction` is the dyadic construction: a slope ``c_j`` on each band
``(2^-j-1, 2^-j]`` (slope 1 above 1/2), computed exactly up to a depth ``J``
and continued by the ratio sqrt(2) per band below it, so that
``h(s) ~ C sqrt(s)`` near zero.  :class:`PowerCost` covers the closed-form
``h(s) = s^alpha`` used as a fallback and as a test subject.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SQRT2 = math.sqrt(2.0)
BAND_CONSTANT = 2.0 + SQRT2
DEFAULT_DEPTH = 64
_TAIL_SUM = 1.0 / (1.0 - 2.0 ** -0.5)


class DomainError(ValueError):
    pass


def dyadic_band(s: float) -> int:
    """Index j with ``s`` in ``(2^-j-1, 2^-j]``; values above 1/2 give 0."""
    if s <= 0:
        raise DomainError(f"band index needs s > 0, got {s}")
    if s > 0.5:
        return 0
    mant, exp = math.frexp(s)  # s = mant * 2**exp, mant in [0.5, 1)
    return 1 - exp if mant == 0.5 else -exp


class _Cost:
    def __call__(self, s: float) -> float:
        return self.eval(s)

    def eval(self, s: float) -> float:
        raise NotImplementedError

    def inverse(self, y: float) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerCost(_Cost):
    """``h(s) = s ** alpha`` for ``0 < alpha <= 1``."""

    alpha: float = 0.5

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise DomainError("alpha must lie in (0, 1]")

    def eval(self, s):
        if s < 0:
            raise DomainError(f"h is defined on [0, inf), got {s}")
        return float(s) ** self.alpha if s > 0 else 0.0

    def inverse(self, y):
        if y < 0:
            raise DomainError(f"h^-1 is defined on [0, inf), got {y}")
        return float(y) ** (1.0 / self.alpha) if y > 0 else 0.0

    def to_json(self) -> dict:
        return {"kind": "power", "alpha": self.alpha}


@dataclass(frozen=True)
class BandMasses:
    """``a_j``: the mass carried by values in the dyadic band j."""

    values: tuple[float, ...]

    def __post_init__(self):
        if any(a < 0 for a in self.values):
            raise DomainError("band masses must be nonnegative")

    def __getitem__(self, j: int) -> float:
        return self.values[j] if 0 <= j < len(self.values) else 0.0

    def __len__(self):
        return len(self.values)

    def total(self) -> float:
        return math.fsum(self.values)


def band_masses(samples: Iterable[tuple[float, float]]) -> BandMasses:
    """Bin ``(value, weight)`` samples: ``a_j = sum value*weight`` over band j."""
    acc: dict[int, list[float]] = {}
    for value, weight in samples:
        if not value > 0:
            raise DomainError(f"sample values must be positive, got {value}")
        if weight < 0:
            raise DomainError(f"sample weights must be nonnegative, got {weight}")
        acc.setdefault(dyadic_band(value), []).append(value * weight)
    if not acc:
        return BandMasses(())
    top = max(acc)
    return BandMasses(tuple(math.fsum(acc.get(j, [])) for j in range(top + 1)))


@dataclass(frozen=True)
class CostFunction(_Cost):
    """Piecewise-linear concave h with slopes ``c[j]`` on dyadic bands.

    ``c[0] = 1`` is the slope on ``(1/2, inf)``; below band ``J = len(c) - 1``
    the slopes grow by sqrt(2) per band.
    """

    c: tuple[float, ...]
    b: tuple[float, ...] = field(default=(), compare=False)
    m: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.c or self.c[0] != 1.0:
            raise DomainError("slope list must start with c_0 = 1")
        # h(2^-j) for j = 0..J, summed from the analytic tail upward
        J = self.depth
        node = [0.0] * (J + 1)
        node[J] = self._tail_node(J)
        for j in range(J - 1, -1, -1):
            node[j] = node[j + 1] + 2.0 ** (-j - 1) * self.c[j]
        object.__setattr__(self, "_nodes", tuple(node))

    @property
    def depth(self) -> int:
        return len(self.c) - 1

    @property
    def tail_coefficient(self) -> float:
        return self.c[-1]

    def slope(self, j: int) -> float:
        """``c_j`` for any j >= 0, including the analytic tail."""
        if j <= self.depth:
            return self.c[j]
        return self.c[-1] * 2.0 ** ((j - self.depth) / 2.0)

    def _tail_node(self, j: int) -> float:
        J = self.depth
        return self.c[-1] * 2.0 ** (-J / 2.0) * 2.0 ** (-j / 2.0 - 1.0) * _TAIL_SUM

    def node(self, j: int) -> float:
        """``h(2^-j)``."""
        if j < 0:
            return self._nodes[0] + (2.0 ** -j - 1.0)
        if j <= self.depth:
            return self._nodes[j]
        return self._tail_node(j)

    def g(self, s: float) -> float:
        """Right-continuous-from-below slope of h at ``s > 0``."""
        return self.slope(dyadic_band(s))

    def eval(self, s: float) -> float:
        if s < 0:
            raise DomainError(f"h is defined on [0, inf), got {s}")
        if s == 0:
            return 0.0
        if s > 0.5:
            return self._nodes[1] + (s - 0.5)
        j = dyadic_band(s)
        left = 2.0 ** (-j - 1)
        return self.node(j + 1) + self.slope(j) * (s - left)

    def inverse(self, y: float) -> float:
        """``h^-1(y)``: bisection on the bands, closed form in each band."""
        if y < 0:
            raise DomainError(f"h^-1 is defined on [0, inf), got {y}")
        if y == 0:
            return 0.0
        if y > self._nodes[1]:
            return 0.5 + (y - self._nodes[1])
        if y <= self.node(self.depth):
            # in the tail h(2^-j) is geometric with ratio 2^-1/2
            j = self.depth + max(0, math.floor(2.0 * math.log2(self.node(self.depth) / y)))
            while self.node(j + 1) >= y:
                j += 1
            while j > 1 and self.node(j) < y:
                j -= 1
        else:
            lo, hi = 1, self.depth  # node(lo) >= y > node(hi)
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if self.node(mid) >= y:
                    lo = mid
                else:
                    hi = mid
            j = lo
        # y in (h(2^-j-1), h(2^-j)]
        left = 2.0 ** (-j - 1)
        return left + (y - self.node(j + 1)) / self.slope(j)

    @property
    def breakpoints(self) -> list[tuple[float, float]]:
        return [(2.0 ** -j, self._nodes[j]) for j in range(self.depth + 1)]

    def to_json(self) -> dict:
        return {
            "kind": "dyadic",
            "breakpoints": [[s, v] for s, v in self.breakpoints],
            "slopes": list(self.c),
            "tail_index": self.depth,
            "tail_coefficient": self.tail_coefficient,
        }


def construct_h(a: BandMasses | Sequence[float], depth: int = DEFAULT_DEPTH) -> CostFunction | PowerCost:
    """Concave h with ``sum_j c_j a_j`` finite and ``h'(0+) = inf``.

    Builds the integers ``m_l`` (tail beyond ``m_l`` at most ``2^-l`` of the
    total), the interpolated weights ``b`` with ``b_0 = 1`` and
    ``b_{m_l} = l``, and the slopes ``c_j = min(sqrt2, b_j/b_{j-1}) c_{j-1}``.
    An all-zero input falls back to ``h(s) = sqrt(s)``.
    """
    if not isinstance(a, BandMasses):
        a = BandMasses(tuple(float(x) for x in a))
    total = a.total()
    if not total > 0:
        return PowerCost(0.5)
    if depth < 1:
        raise DomainError("depth must be >= 1")

    vals = np.asarray(a.values, dtype=float)
    # tails[m] = sum_{i > m} a_i, for m = 0..len-1
    tails = np.concatenate([np.cumsum(vals[::-1])[::-1][1:], [0.0]])

    ms = [0]
    l = 0
    while ms[-1] < depth:
        l += 1
        bound = 2.0 ** -l * total
        raw = int(np.argmax(tails <= bound * (1 + 1e-12)))
        ms.append(max(ms[-1] + 1, raw))
    levels = [1.0] + [float(i) for i in range(1, l + 1)]
    b = np.interp(np.arange(depth + 1), ms, levels)

    c = [1.0]
    for j in range(1, depth + 1):
        c.append(float(min(SQRT2, b[j] / b[j - 1]) * c[-1]))
    return CostFunction(tuple(c), tuple(float(x) for x in b), tuple(ms[1:]))


def eval_h(h, s: float) -> float:
    return h.eval(s) if hasattr(h, "eval") else float(h(s))


def cost_from_json(data: dict):
    kind = data.get("kind", "dyadic")
    if kind == "power":
        return PowerCost(float(data["alpha"]))
    if kind == "dyadic":
        if "slopes" in data:
            return CostFunction(tuple(float(x) for x in data["slopes"]))
        return _from_breakpoints(data)
    raise DomainError(f"unknown cost function kind {kind!r}")


def _from_breakpoints(data: dict) -> CostFunction:
    # slopes recovered from consecutive nodes; node list is h(2^-j), j = 0..J
    pts = sorted(((float(s), float(v)) for s, v in data["breakpoints"]), reverse=True)
    J = int(data["tail_index"])
    c = [1.0]
    for j in range(1, J):
        (s0, v0), (s1, v1) = pts[j], pts[j + 1]
        c.append((v0 - v1) / (s0 - s1))
    c.append(float(data["tail_coefficient"]))
    return CostFunction(tuple(c))


def save_cost(h, path) -> None:
    with open(path, "w") as fh:
        json.dump(h.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_cost(path):
    with open(path) as fh:
        return cost_from_json(json.load(fh))


# --- isoperimetric moduli --------------------------------------------------------

def eta_tilde(h, m: float) -> float:
    """``sup{s/h(s) : 0 < s <= m}``, attained at ``m`` for concave h."""
    if m < 0:
        raise DomainError("eta_tilde needs m >= 0")
    if m == 0:
        return 0.0
    return m / eval_h(h, m)


def eta_tilde_star(h, m: float) -> float:
    """``h^-1(m) / m``."""
    if m < 0:
        raise DomainError("eta_tilde_star needs m >= 0")
    if m == 0:
        return 0.0
    return h.inverse(m) / m


_LOG_LO, _LOG_HI = math.log(1e-6), math.log(1e6)
_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _inf_over_scale(fn, rtol: float = 1e-6, coarse: int = 121) -> float:
    """``inf_{eps in [1e-6, 1e6]} fn(eps)``: log-grid bracket, then golden section."""
    xs = np.linspace(_LOG_LO, _LOG_HI, coarse)
    vals = [fn(math.exp(x)) for x in xs]
    i = int(np.argmin(vals))
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, coarse - 1)]
    best = vals[i]
    x1 = hi - _GOLD * (hi - lo)
    x2 = lo + _GOLD * (hi - lo)
    f1, f2 = fn(math.exp(x1)), fn(math.exp(x2))
    while hi - lo > rtol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLD * (hi - lo)
            f1 = fn(math.exp(x1))
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLD * (hi - lo)
            f2 = fn(math.exp(x2))
    return min(best, f1, f2)


def _modulus(tilde, m: float, c: float, k: int) -> float:
    if m < 0:
        raise DomainError("modulus needs m >= 0")
    if not c > 0:
        raise DomainError("deformation constant must be positive")
    if m == 0:
        return 0.0
    if k == 0:
        return c * tilde(c * m)
    return c * _inf_over_scale(lambda eps: tilde(c * m * eps ** -k) + eps)


def eta(h, m: float, c: float = 1.0, k: int = 1) -> float:
    """``c * inf_eps [eta_tilde(c m eps^-k) + eps]`` (k = 0: ``c eta_tilde(c m)``)."""
    return _modulus(lambda s: eta_tilde(h, s), m, c, k)


def eta_star(h, m: float, c: float = 1.0, k: int = 1) -> float:
    """Same infimum with ``h^-1(s)/s`` in place of ``eta_tilde``."""
    return _modulus(lambda s: eta_tilde_star(h, s), m, c, k)
