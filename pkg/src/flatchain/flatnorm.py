"""Discrete flat norm ``min_S M(A - dS) + M(S)`` over a bounded box of cells.

Two independent routes: a linear program (positive/negative parts, solved by
HiGHS through :func:`scipy.optimize.linprog`) and, for small integer chains, a
brute-force enumeration of integer fillers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .chain import Cell, Chain, all_cells, count_cells
from .groups import INTEGER, REAL, ConfigError

DEFAULT_CELL_CAP = 100_000
EXHAUSTIVE_CAP = 20_000_000


class ResourceError(RuntimeError):
    """A search or problem size exceeded its configured cap."""


class UnsupportedGroup(ConfigError):
    pass


@dataclass(frozen=True)
class FlatNormCertificate:
    value: float
    filler: Chain
    remainder: Chain
    method: str = "lp"

    def check(self, tol: float = 1e-7) -> bool:
        """Recompute the value from the filler."""
        return abs(self.remainder.mass() + self.filler.mass() - self.value) <= tol * max(1.0, self.value)


def filler_box(A: Chain, margin: int | None = None) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Vertex box of the support inflated by ``margin`` (default: its diameter)."""
    box = A.bounding_box()
    if box is None:
        raise ValueError("empty chain has no box")
    lo, hi = box
    if margin is None:
        margin = max(h - l for l, h in zip(lo, hi))
    if margin < 0:
        raise ValueError("margin must be >= 0")
    return tuple(l - margin for l in lo), tuple(h + margin for h in hi)


def _problem(A: Chain, box, cell_cap: int):
    """Region (k+1)-cells, involved k-cells and the incidence matrix between them."""
    lo, hi = box
    if any(c.anchor[i] < lo[i] or c.anchor[i] + (i in c.axes) > hi[i]
           for c in A.coeffs for i in range(A.n)):
        raise ValueError("filler box does not contain the support of A")
    if count_cells(A.n, A.k + 1, lo, hi) > cell_cap:
        raise ResourceError(f"filler region exceeds {cell_cap} cells")
    tops = list(all_cells(A.n, A.k + 1, lo, hi))
    index: dict[Cell, int] = {c: i for i, c in enumerate(sorted(A.coeffs))}
    rows, cols, vals = [], [], []
    for j, top in enumerate(tops):
        for face, s in top.faces():
            i = index.setdefault(face, len(index))
            rows.append(i)
            cols.append(j)
            vals.append(s)
    faces = sorted(index, key=index.get)
    D = sparse.csc_matrix((vals, (rows, cols)), shape=(len(faces), len(tops)))
    return tops, faces, D


def flat_norm(A: Chain, margin: int | None = None, box=None, method: str = "auto",
              cell_cap: int = DEFAULT_CELL_CAP) -> FlatNormCertificate:
    """Flat norm of ``A`` with fillers restricted to ``box`` (or support box + margin).

    ``method`` is ``"lp"``, ``"exhaustive"`` (integer chains only) or
    ``"auto"`` (the LP).
    """
    if A.group not in (REAL, INTEGER):
        raise UnsupportedGroup(f"flat norm supports R and Z coefficients, not {A.group.tag}")
    if method == "auto":
        method = "lp"
    if A.is_zero():
        zero_s = Chain(A.n, min(A.k + 1, A.n), {}, A.spacing, A.group)
        return FlatNormCertificate(0.0, zero_s, A, method)
    if A.k == A.n:
        # no (n+1)-cells: the only filler is zero
        return FlatNormCertificate(A.mass(), Chain(A.n, A.n, {}, A.spacing, A.group), A, method)
    if box is None:
        box = filler_box(A, margin)
    if method == "lp":
        return _flat_norm_lp(A, box, cell_cap)
    if method == "exhaustive":
        return _flat_norm_exhaustive(A, box, cell_cap)
    raise ValueError(f"unknown flat norm method {method!r}")


def _flat_norm_lp(A: Chain, box, cell_cap: int) -> FlatNormCertificate:
    tops, faces, D = _problem(A, box, cell_cap)
    nf, nt = D.shape
    eps = A.spacing
    a = np.array([float(A[f]) for f in faces])
    # x = [S+, S-, r+, r-] >= 0 with r+ - r- + D (S+ - S-) = a
    I = sparse.identity(nf, format="csc")
    A_eq = sparse.hstack([D, -D, I, -I], format="csc")
    cost = np.concatenate([np.full(2 * nt, eps ** (A.k + 1)), np.full(2 * nf, eps ** A.k)])
    res = linprog(cost, A_eq=A_eq, b_eq=a, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"flat norm LP failed: {res.message}")
    s = res.x[:nt] - res.x[nt:2 * nt]
    scale = max(1.0, float(np.abs(a).max()))
    S = Chain(A.n, A.k + 1, {c: float(v) for c, v in zip(tops, s) if abs(v) > 1e-9 * scale},
              A.spacing, REAL)
    remainder = A.as_real() - S.boundary()
    value = remainder.mass() + S.mass()
    return FlatNormCertificate(value, S, remainder, "lp")


def _digits(count: int, width: int, base: int, bound: int) -> np.ndarray:
    """Rows ``0..count-1`` written in ``base`` (least significant first), shifted to ``[-bound, bound]``."""
    idx = np.arange(count, dtype=np.int64)
    powers = base ** np.arange(width, dtype=np.int64)
    return ((idx[:, None] // powers[None, :]) % base - bound).astype(float)


def _digits_one(index: int, width: int, base: int, bound: int) -> np.ndarray:
    out = np.empty(width)
    for t in range(width):
        index, r = divmod(index, base)
        out[t] = r - bound
    return out


def _flat_norm_exhaustive(A: Chain, box, cell_cap: int, chunk: int = 1 << 16) -> FlatNormCertificate:
    if A.group != INTEGER:
        raise UnsupportedGroup("exhaustive flat norm needs integer coefficients")
    tops, faces, D = _problem(A, box, cell_cap)
    nf, nt = D.shape
    bound = max(abs(v) for v in A.coeffs.values())
    base = 2 * bound + 1
    total = base ** nt
    if total > EXHAUSTIVE_CAP:
        raise ResourceError(f"{total} integer fillers exceed the exhaustive cap {EXHAUSTIVE_CAP}")
    eps = A.spacing
    # small integers are exact in float64, which keeps the products on BLAS
    a = np.array([A[f] for f in faces], dtype=float)
    Dt = D.T.toarray()
    # split the fillers into a low block (enumerated once) and a high block (looped over)
    n_low = min(nt, max(1, int(np.log(chunk) / np.log(base))))
    low = _digits(base ** n_low, n_low, base, bound)
    low_resid = a[None, :] - low @ Dt[:n_low]
    low_mass = np.abs(low).sum(axis=1)
    best_val, best_s = np.inf, None
    for high_idx in range(base ** (nt - n_low)):
        high = _digits_one(high_idx, nt - n_low, base, bound)
        resid = low_resid - high @ Dt[n_low:]
        val = np.abs(resid).sum(axis=1) * eps ** A.k + (low_mass + np.abs(high).sum()) * eps ** (A.k + 1)
        i = int(np.argmin(val))
        if val[i] < best_val - 1e-12:
            best_val, best_s = float(val[i]), np.concatenate([low[i], high]).astype(np.int64)
    S = Chain(A.n, A.k + 1, {c: int(v) for c, v in zip(tops, best_s) if v}, A.spacing, INTEGER)
    remainder = A - S.boundary()
    return FlatNormCertificate(remainder.mass() + S.mass(), S, remainder, "exhaustive")
