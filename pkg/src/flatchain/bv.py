"""Discrete total variation, level sets, coarea slicing and the finest additive partition.

Rasters are numpy arrays extended by zero outside.  Sites are index tuples;
two sites are adjacent when they differ by one in exactly one coordinate, and
the same edges define perimeter, total variation and connectivity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .unionfind import UnionFind

Site = tuple


class DomainError(ValueError):
    pass


def _padded(f: np.ndarray) -> np.ndarray:
    return np.pad(f, 1, mode="constant", constant_values=0)


def tv(f) -> float:
    """Anisotropic total variation, exterior counted as zero."""
    f = _padded(np.asarray(f))
    total = 0
    for ax in range(f.ndim):
        total = total + np.abs(np.diff(f, axis=ax)).sum()
    return total.item() if hasattr(total, "item") else total


def tv_exact(f) -> Fraction:
    """Total variation in exact rational arithmetic (floats converted exactly)."""
    f = np.asarray(f)
    if np.issubdtype(f.dtype, np.integer):
        return Fraction(int(tv(f.astype(np.int64))))
    g = _padded(np.vectorize(Fraction, otypes=[object])(f))
    total = Fraction(0)
    for ax in range(g.ndim):
        total += sum(abs(x) for x in np.diff(g, axis=ax).ravel())
    return total


def indicator(sites, shape) -> np.ndarray:
    out = np.zeros(shape, dtype=np.int64)
    for s in sites:
        out[tuple(s)] = 1
    return out


def perimeter(E, shape) -> int:
    """Number of cut edges (including exterior faces) of the site set ``E``."""
    mask = E if isinstance(E, np.ndarray) and E.dtype == bool else indicator(E, shape).astype(bool)
    return int(tv(mask.astype(np.int64)))


@dataclass(frozen=True)
class LevelSet:
    threshold: float
    sites: frozenset

    def mask(self, shape) -> np.ndarray:
        return indicator(self.sites, shape).astype(bool)


def level_mask(f, t) -> np.ndarray:
    if t == 0:
        raise DomainError("level sets are defined for t != 0")
    f = np.asarray(f)
    return f > t if t > 0 else f < t


def level_set(f, t) -> LevelSet:
    mask = level_mask(f, t)
    return LevelSet(t, frozenset(tuple(int(i) for i in idx) for idx in zip(*np.nonzero(mask))))


def _bands(values) -> list[tuple[object, object]]:
    """Gaps ``(lo, hi)`` between consecutive distinct magnitudes, per sign."""
    out = []
    pos = sorted({v for v in values if v > 0})
    neg = sorted({-v for v in values if v < 0})
    for vals, sign in ((pos, 1), (neg, -1)):
        prev = 0
        for v in vals:
            out.append((sign * prev, sign * v))
            prev = v
    return out


def _band_mask(f, lo, hi) -> np.ndarray:
    # E_t for every t strictly inside the band; no value of f lies in (lo, hi)
    return f >= hi if hi > 0 else f <= hi


def coarea_slices(f) -> list[tuple[object, object, int]]:
    """``(gap length, representative t, P(E_t))`` for every threshold band."""
    f = np.asarray(f)
    exact = np.issubdtype(f.dtype, np.integer)
    vals = [int(v) if exact else Fraction(float(v)) for v in np.unique(f)]
    out = []
    for lo, hi in _bands(vals):
        t = Fraction(lo + hi, 2)
        gap = abs(hi - lo)
        out.append((gap, t, perimeter(_band_mask(f, lo, hi), f.shape)))
    return out


def coarea_check(f) -> dict:
    """Compare ``tv(f)`` against the sliced perimeter integral, exactly."""
    f = np.asarray(f)
    if not (np.issubdtype(f.dtype, np.integer) or np.issubdtype(f.dtype, np.floating)):
        f = f.astype(float)
    lhs = tv_exact(f)
    rhs = sum((Fraction(gap) * p for gap, _, p in coarea_slices(f)), Fraction(0))
    return {"lhs": lhs, "rhs": rhs, "equal": lhs == rhs}


def _neighbours(site, shape):
    for ax in range(len(shape)):
        for d in (-1, 1):
            x = site[ax] + d
            if 0 <= x < shape[ax]:
                yield site[:ax] + (x,) + site[ax + 1:]


def m_connected_components(E) -> list[frozenset]:
    """Face-adjacency components of a site set or boolean mask, ordered by smallest site."""
    if isinstance(E, np.ndarray):
        E = _sites(E)
    E = {tuple(s) for s in E}
    uf = UnionFind(sorted(E))
    for s in E:
        for ax in range(len(s)):
            t = s[:ax] + (s[ax] + 1,) + s[ax + 1:]
            if t in E:
                uf.union(s, t)
    return uf.groups()


def _sites(mask) -> list:
    return [tuple(int(i) for i in idx) for idx in zip(*np.nonzero(mask))]


def finest_partition(f) -> tuple[frozenset, ...]:
    """Classes of nonzero sites joined inside one component of some level set."""
    f = np.asarray(f)
    omega = _sites(f != 0)
    uf = UnionFind(omega)
    vals = np.unique(f)
    for lo, hi in _bands([v.item() for v in vals]):
        for comp in m_connected_components(_band_mask(f, lo, hi)):
            first = min(comp)
            for s in comp:
                uf.union(first, s)
    return tuple(uf.groups())


def same_sign_components(f) -> tuple[frozenset, ...]:
    """Components of the graph joining adjacent sites with ``f(p) f(q) > 0``."""
    f = np.asarray(f)
    omega = _sites(f != 0)
    uf = UnionFind(omega)
    for s in omega:
        for t in _neighbours(s, f.shape):
            if f[s] * f[t] > 0:
                uf.union(s, t)
    return tuple(uf.groups())


def restrict_raster(f, sites) -> np.ndarray:
    f = np.asarray(f)
    out = np.zeros_like(f)
    for s in sites:
        out[s] = f[s]
    return out


def is_tv_additive(f, blocks, tol: float = 1e-9) -> bool:
    """``tv(f) == sum_S tv(1_S f)`` for a partition of the nonzero sites."""
    f = np.asarray(f)
    total = sum(tv(restrict_raster(f, b)) for b in blocks)
    return abs(total - tv(f)) <= tol * max(1.0, tv(f))


def crossing_edges_ok(f, blocks) -> bool:
    """Every edge between two blocks joins values of opposite sign (or a zero)."""
    f = np.asarray(f)
    label = {s: i for i, b in enumerate(blocks) for s in b}
    for s, i in label.items():
        for t in _neighbours(s, f.shape):
            j = label.get(t)
            if j is not None and j != i and f[s] * f[t] > 0:
                return False
    return True


def refines(P1, P2) -> bool:
    """Whether each block of ``P1`` lies inside some block of ``P2``."""
    ground1 = frozenset().union(*P1) if P1 else frozenset()
    ground2 = frozenset().union(*P2) if P2 else frozenset()
    if ground1 != ground2:
        raise ValueError("partitions cover different site sets")
    owner = {s: i for i, b in enumerate(P2) for s in b}
    return all(len({owner[s] for s in b}) <= 1 for b in P1)


def label_map(f, blocks) -> np.ndarray:
    """Block index per site, -1 on zero sites."""
    f = np.asarray(f)
    out = np.full(f.shape, -1, dtype=np.int64)
    for i, b in enumerate(blocks):
        for s in b:
            out[s] = i
    return out


def bv_report(f) -> dict:
    f = np.asarray(f)
    blocks = finest_partition(f)
    chk = coarea_check(f)
    return {
        "tv": float(tv(f)),
        "blocks": len(blocks),
        "per_block_tv": [float(tv(restrict_raster(f, b))) for b in blocks],
        "coarea_lhs": float(chk["lhs"]),
        "coarea_rhs": float(chk["rhs"]),
        "coarea_equal": bool(chk["equal"]),
    }
