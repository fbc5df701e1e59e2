"""Random chains and rasters shared by the test modules."""

from __future__ import annotations

import itertools

import numpy as np

from flatchain import INTEGER, REAL, Cell, Chain
from flatchain.chain import all_cells


def random_chain(rng, n=2, k=1, cells=6, lo=0, hi=4, values=(-2, -1, 1, 2), group=INTEGER,
                 spacing=1.0) -> Chain:
    """``cells`` distinct k-cells inside the box ``[lo, hi]^n`` with coefficients drawn from ``values``."""
    pool = list(all_cells(n, k, (lo,) * n, (hi,) * n))
    pick = rng.choice(len(pool), size=min(cells, len(pool)), replace=False)
    coeffs = {pool[i]: group.coerce(values[rng.integers(len(values))]) for i in pick}
    return Chain(n, k, coeffs, spacing, group)


def random_real_chain(rng, n=2, k=1, cells=6, lo=0, hi=4, spacing=1.0) -> Chain:
    pool = list(all_cells(n, k, (lo,) * n, (hi,) * n))
    pick = rng.choice(len(pool), size=min(cells, len(pool)), replace=False)
    coeffs = {pool[i]: float(rng.choice([-1, 1]) * rng.uniform(0.1, 3.0)) for i in pick}
    return Chain(n, k, coeffs, spacing, REAL)


def planar_segments(seed_cells):
    """Integer 1-chain from ``(x, y, axis, coef)`` tuples."""
    return Chain(2, 1, {Cell((x, y), (ax,)): c for x, y, ax, c in seed_cells}, 1.0, INTEGER)


def sign_rasters(shape=(3, 3)):
    """Every raster on ``shape`` with entries in {-1, 0, 1}."""
    size = int(np.prod(shape))
    for signs in itertools.product((-1, 0, 1), repeat=size):
        yield np.array(signs, dtype=np.int64).reshape(shape)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[str, str] = {}


def record(key: str, passed: bool, detail: str) -> bool:
    ACCEPTANCE_LINES[key] = f"criterion {key:<4} {'PASS' if passed else 'FAIL'}  {detail}"
    return passed
