"""Push a chain onto a coarse lattice and keep the homotopy remainders.

One axis at a time, every vertex coordinate along that axis is snapped to the
nearest plane ``rho*m + offset`` (ties go down).  Writing ``f`` for the snap and
``H`` for the straight-line prism operator, each pass satisfies
``f#(C) - C = dH(C) + H(dC)``, so accumulating over the axes gives
``A = P + R + dS`` with ``P = f#(A)``, ``S = -sum H(C_i)``, ``R = -sum H(dC_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import Cell, Chain


def snap(x: int, rho: int, offset: int) -> int:
    r = (x - offset) % rho
    return x - r if 2 * r <= rho else x - r + rho


def _with(anchor: tuple[int, ...], axis: int, value: int) -> tuple[int, ...]:
    return anchor[:axis] + (value,) + anchor[axis + 1:]


def _push_axis(C: Chain, axis: int, rho: int, offset: int) -> tuple[Chain, Chain]:
    """Image of ``C`` under the snap along ``axis`` and its prism ``H(C)``."""
    g = C.group
    image, prism = [], []
    for cell, v in C.coeffs.items():
        a = cell.anchor
        if axis in cell.axes:
            lo, hi = snap(a[axis], rho, offset), snap(a[axis] + 1, rho, offset)
            image.extend((Cell(_with(a, axis, t), cell.axes), v) for t in range(lo, hi))
            continue
        b = snap(a[axis], rho, offset)
        image.append((Cell(_with(a, axis, b), cell.axes), v))
        if b == a[axis]:
            continue
        axes = tuple(sorted(cell.axes + (axis,)))
        pos = axes.index(axis)
        sign = (-1) ** pos * (1 if b > a[axis] else -1)
        w = g.scale(v, sign)
        prism.extend((Cell(_with(a, axis, t), axes), w)
                     for t in range(min(a[axis], b), max(a[axis], b)))
    P = Chain.from_terms(C.n, C.k, image, C.spacing, g)
    if C.k == C.n:
        # a top-degree chain has no room to sweep; every pass is a pure image
        return P, Chain(C.n, C.n, {}, C.spacing, g)
    H = Chain.from_terms(C.n, C.k + 1, prism, C.spacing, g)
    return P, H


@dataclass(frozen=True)
class DeformationResult:
    A: Chain
    P: Chain
    R: Chain
    S: Chain
    rho: int
    offset: tuple[int, ...]
    measured_ratios: dict = field(default_factory=dict)

    def residual(self) -> Chain:
        """``A - P - R - dS``; zero when the splitting identity holds."""
        out = self.A - self.P - self.R
        if self.S.k > self.A.k:
            out = out - self.S.boundary()
        return out

    def coarse_P(self) -> Chain:
        """``P`` as a chain on the coarse lattice (spacing ``rho*eps``)."""
        rho, off = self.rho, self.offset
        coarse: dict[Cell, object] = {}
        for cell, v in self.P.coeffs.items():
            anchor = tuple((x - o) // rho for x, o in zip(cell.anchor, off))
            key = Cell(anchor, cell.axes)
            if key in coarse and coarse[key] != v:
                raise AssertionError(f"P is not constant on coarse cell {key}")
            coarse[key] = v
        return Chain(self.P.n, self.P.k, coarse, self.P.spacing * rho, self.P.group)

    def remainder_mass(self) -> float:
        return self.R.mass() + self.S.mass()


def deform(A: Chain, rho: int, offset=None, h=None) -> DeformationResult:
    if rho < 1:
        raise ValueError("rho must be >= 1")
    offset = tuple(int(o) for o in (offset if offset is not None else (0,) * A.n))
    if len(offset) != A.n or any(not 0 <= o < rho for o in offset):
        raise ValueError(f"offset components must lie in [0, {rho})")
    g = A.group
    k_top = min(A.k + 1, A.n)
    S = Chain(A.n, k_top, {}, A.spacing, g)
    R = Chain(A.n, A.k, {}, A.spacing, g)
    cur = A
    for axis in range(A.n):
        P, H = _push_axis(cur, axis, rho, offset[axis])
        if A.k < A.n:
            S = S - H
        if A.k > 0:
            _, HdC = _push_axis(cur.boundary(), axis, rho, offset[axis])
            R = R - HdC
        cur = P
    result = DeformationResult(A, cur, R, S, rho, offset)
    object.__setattr__(result, "measured_ratios", _ratios(result, h))
    return result


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def _ratios(res: DeformationResult, h) -> dict:
    A = res.A
    out = {
        "mass_P_over_mass_A": _ratio(res.P.mass(), A.mass()),
        "remainder_over_rho_eps_N_A": _ratio(res.remainder_mass(),
                                             res.rho * A.spacing * A.normal_mass()),
    }
    if h is not None:
        out["hmass_P_over_hmass_A"] = _ratio(res.P.h_mass(h), A.h_mass(h))
    return out


def deform_best(A: Chain, rho: int, trials: int = 16, seed: int = 0, h=None,
                offsets=None) -> DeformationResult:
    """Best of ``trials`` random offsets by ``M(R) + M(S)`` (first wins ties)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if offsets is None:
        rng = np.random.default_rng(seed)
        offsets = [tuple(int(x) for x in rng.integers(0, rho, size=A.n)) for _ in range(trials)]
    best = None
    for off in offsets:
        res = deform(A, rho, off, h)
        if best is None or res.remainder_mass() < best.remainder_mass():
            best = res
    return best
