"""Small named chains with known decomposition behaviour."""

from __future__ import annotations

import numpy as np

from .chain import Cell, Chain, raster_to_chain
from .groups import INTEGER, REAL, CoefficientGroup

H, V = (0,), (1,)


def cross(group: CoefficientGroup = INTEGER) -> Chain:
    """Unit horizontal and vertical segments through the origin, coefficient 1."""
    one = group.coerce(1)
    cells = [Cell((-1, 0), H), Cell((0, 0), H), Cell((0, -1), V), Cell((0, 0), V)]
    return Chain(2, 1, {c: one for c in cells}, 1.0, group)


def cross_parts() -> dict[str, frozenset]:
    """The horizontal/vertical and above/below-diagonal splittings of :func:`cross`."""
    return {
        "horizontal": frozenset({Cell((-1, 0), H), Cell((0, 0), H)}),
        "vertical": frozenset({Cell((0, -1), V), Cell((0, 0), V)}),
        "above": frozenset({Cell((-1, 0), H), Cell((0, 0), V)}),
        "below": frozenset({Cell((0, 0), H), Cell((0, -1), V)}),
    }


def square_loop(multiplicity: int = 2, side: int = 1, group: CoefficientGroup = INTEGER) -> Chain:
    """Counterclockwise boundary of a ``side x side`` square, times ``multiplicity``."""
    g = group.coerce(multiplicity)
    neg = group.neg(g)
    coeffs = {}
    for t in range(side):
        coeffs[Cell((t, 0), H)] = g
        coeffs[Cell((side, t), V)] = g
        coeffs[Cell((t, side), H)] = neg
        coeffs[Cell((0, t), V)] = neg
    return Chain(2, 1, coeffs, 1.0, group)


def points(positions, values, group: CoefficientGroup = REAL, n: int | None = None) -> Chain:
    positions = [tuple(int(x) for x in p) for p in positions]
    n = len(positions[0]) if n is None else n
    return Chain.from_terms(n, 0, [(Cell(p, ()), group.coerce(v)) for p, v in zip(positions, values)],
                            1.0, group)


SIGN_RASTER = np.array([[1.0, -1.0], [1.0, 1.0]])


def sign_raster_chain() -> Chain:
    return raster_to_chain(SIGN_RASTER)
