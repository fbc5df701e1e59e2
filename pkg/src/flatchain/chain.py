"""Cubical cells and sparse chains on the scaled integer lattice.

A k-cell is the unit cube spanned at an integer ``anchor`` along the sorted
``axes``; its orientation is the wedge of those axes in increasing order.  A
chain is a finite map cell -> group element, stored without zero entries.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple

import numpy as np

from .groups import INTEGER, REAL, CoefficientGroup, ConfigError


class DegreeError(ValueError):
    """Operation undefined for the chain's degree."""


class Cell(NamedTuple):
    anchor: tuple[int, ...]
    axes: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.axes)

    def faces(self) -> Iterator[tuple["Cell", int]]:
        """Boundary faces with incidence signs (alternating convention)."""
        for j, t in enumerate(self.axes):
            sub = self.axes[:j] + self.axes[j + 1:]
            sign = 1 if j % 2 == 0 else -1
            upper = self.anchor[:t] + (self.anchor[t] + 1,) + self.anchor[t + 1:]
            yield Cell(upper, sub), sign
            yield Cell(self.anchor, sub), -sign

    def vertices(self) -> Iterator[tuple[int, ...]]:
        for bits in range(1 << len(self.axes)):
            v = list(self.anchor)
            for j, t in enumerate(self.axes):
                if bits >> j & 1:
                    v[t] += 1
            yield tuple(v)


def make_cell(anchor: Iterable[int], axes: Iterable[int] = ()) -> Cell:
    anchor = tuple(int(a) for a in anchor)
    axes = tuple(int(t) for t in axes)
    if list(axes) != sorted(set(axes)):
        raise ConfigError(f"axes must be strictly increasing, got {axes}")
    if axes and not (0 <= axes[0] and axes[-1] < len(anchor)):
        raise ConfigError(f"axes {axes} out of range for dimension {len(anchor)}")
    return Cell(anchor, axes)


def accumulate(group: CoefficientGroup, terms: Iterable[tuple[Cell, object]]) -> dict[Cell, object]:
    """Sum ``(cell, value)`` terms, dropping cells whose sum vanishes.

    For inexact groups a sum counts as zero when its norm is below the
    relative tolerance times the total norm of the summed terms.
    """
    total: dict[Cell, object] = {}
    scale: dict[Cell, float] = {}
    for cell, value in terms:
        if cell in total:
            total[cell] = group.add(total[cell], value)
            scale[cell] += group.norm(value)
        else:
            total[cell] = value
            scale[cell] = group.norm(value)
    return {c: v for c, v in total.items() if not group.is_zero(v, scale[c])}


class Chain:
    """An immutable sparse k-chain in R^n with lattice step ``spacing``."""

    __slots__ = ("n", "k", "spacing", "group", "_coeffs", "_hash")

    def __init__(self, n: int, k: int, coeffs: Mapping[Cell, object] | None = None,
                 spacing: float = 1.0, group: CoefficientGroup = INTEGER):
        if not 0 <= k <= n:
            raise ConfigError(f"degree {k} not in [0, {n}]")
        if not spacing > 0:
            raise ConfigError("spacing must be positive")
        self.n = int(n)
        self.k = int(k)
        self.spacing = float(spacing)
        self.group = group
        clean = {}
        for cell, value in (coeffs or {}).items():
            if len(cell.anchor) != n or len(cell.axes) != k:
                raise ConfigError(f"cell {cell} does not fit n={n}, k={k}")
            if not group.is_zero(value):
                clean[cell] = value
        self._coeffs = clean
        self._hash = None

    @classmethod
    def from_terms(cls, n, k, terms, spacing=1.0, group=INTEGER) -> "Chain":
        return cls(n, k, accumulate(group, terms), spacing, group)

    @classmethod
    def zero_like(cls, other: "Chain", k: int | None = None) -> "Chain":
        return cls(other.n, other.k if k is None else k, {}, other.spacing, other.group)

    # --- mapping-like access -------------------------------------------------
    @property
    def coeffs(self) -> Mapping[Cell, object]:
        return self._coeffs

    def __len__(self):
        return len(self._coeffs)

    def __iter__(self):
        return iter(sorted(self._coeffs))

    def items(self):
        return sorted(self._coeffs.items())

    def __getitem__(self, cell: Cell):
        return self._coeffs.get(cell, self.group.zero())

    def support(self) -> frozenset[Cell]:
        return frozenset(self._coeffs)

    def is_zero(self) -> bool:
        return not self._coeffs

    # --- group structure -----------------------------------------------------
    def _check_compatible(self, other: "Chain"):
        if (self.n, self.k, self.group) != (other.n, other.k, other.group) or \
                not np.isclose(self.spacing, other.spacing, rtol=1e-12, atol=0):
            raise ConfigError(
                f"incompatible chains: (n={self.n}, k={self.k}, eps={self.spacing}, {self.group.tag}) "
                f"vs (n={other.n}, k={other.k}, eps={other.spacing}, {other.group.tag})")

    def __add__(self, other: "Chain") -> "Chain":
        self._check_compatible(other)
        terms = list(self._coeffs.items()) + list(other._coeffs.items())
        return Chain.from_terms(self.n, self.k, terms, self.spacing, self.group)

    def __neg__(self) -> "Chain":
        g = self.group
        return Chain(self.n, self.k, {c: g.neg(v) for c, v in self._coeffs.items()},
                     self.spacing, g)

    def __sub__(self, other: "Chain") -> "Chain":
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, Chain):
            return NotImplemented
        try:
            return (self - other).is_zero()
        except ConfigError:
            return False

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, self.k, self.group.tag, frozenset(self._coeffs)))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{c.anchor}{list(c.axes)}:{v}" for c, v in self.items()[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"Chain(n={self.n}, k={self.k}, {self.group.tag}, eps={self.spacing:g}, {{{body}{more}}})"

    def map_coeffs(self, fn: Callable, group: CoefficientGroup) -> "Chain":
        return Chain(self.n, self.k, {c: fn(v) for c, v in self._coeffs.items()}, self.spacing, group)

    def as_real(self) -> "Chain":
        """Embed integer coefficients into R."""
        if self.group == REAL:
            return self
        if self.group != INTEGER:
            raise ConfigError(f"cannot embed {self.group.tag} into R")
        return self.map_coeffs(float, REAL)

    # --- calculus ------------------------------------------------------------
    def restrict(self, cells: Iterable[Cell]) -> "Chain":
        keep = cells if isinstance(cells, (set, frozenset)) else set(cells)
        return Chain(self.n, self.k, {c: v for c, v in self._coeffs.items() if c in keep},
                     self.spacing, self.group)

    def boundary(self) -> "Chain":
        if self.k == 0:
            raise DegreeError("boundary of a 0-chain is undefined")
        g = self.group
        terms = ((face, g.scale(v, s)) for c, v in self._coeffs.items() for face, s in c.faces())
        return Chain.from_terms(self.n, self.k - 1, terms, self.spacing, g)

    def mass(self) -> float:
        nrm = self.group.norm
        return float(sum(nrm(v) for v in self._coeffs.values())) * self.spacing ** self.k

    def h_mass(self, h: Callable[[float], float]) -> float:
        nrm = self.group.norm
        return float(sum(h(float(nrm(v))) for v in self._coeffs.values())) * self.spacing ** self.k

    def normal_mass(self) -> float:
        if self.k == 0:
            return self.mass()
        return self.mass() + self.boundary().mass()

    def bounding_box(self) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
        """Lowest and highest vertex coordinates touched by the support."""
        if not self._coeffs:
            return None
        lo = [min(c.anchor[i] for c in self._coeffs) for i in range(self.n)]
        hi = [max(c.anchor[i] + (1 if i in c.axes else 0) for c in self._coeffs)
              for i in range(self.n)]
        return tuple(lo), tuple(hi)


def boundary(A: Chain) -> Chain:
    return A.boundary()


def mass(A: Chain) -> float:
    return A.mass()


def h_mass(A: Chain, h: Callable[[float], float]) -> float:
    return A.h_mass(h)


def normal_mass(A: Chain) -> float:
    return A.normal_mass()


def restrict(A: Chain, cells: Iterable[Cell]) -> Chain:
    return A.restrict(cells)


def support(A: Chain) -> frozenset[Cell]:
    return A.support()


def all_cells(n: int, k: int, lo: Iterable[int], hi: Iterable[int]) -> Iterator[Cell]:
    """Every k-cell whose closure lies in the box ``[lo, hi]`` of vertex coordinates."""
    lo, hi = tuple(lo), tuple(hi)
    for axes in combinations(range(n), k):
        ranges = [range(lo[i], hi[i] - (1 if i in axes else 0) + 1) for i in range(n)]
        for anchor in np.ndindex(*[len(r) for r in ranges]):
            yield Cell(tuple(r[a] for r, a in zip(ranges, anchor)), axes)


def count_cells(n: int, k: int, lo: Iterable[int], hi: Iterable[int]) -> int:
    lo, hi = tuple(lo), tuple(hi)
    total = 0
    for axes in combinations(range(n), k):
        prod = 1
        for i in range(n):
            prod *= max(0, hi[i] - lo[i] + (0 if i in axes else 1))
        total += prod
    return total


# --- raster bridge -------------------------------------------------------------

def raster_to_chain(f, spacing: float = 1.0, group: CoefficientGroup = REAL) -> Chain:
    """Top-degree chain with one n-cell per nonzero site of ``f``."""
    f = np.asarray(f)
    n = f.ndim
    axes = tuple(range(n))
    coeffs = {Cell(tuple(int(i) for i in idx), axes): group.coerce(f[idx].item())
              for idx in zip(*np.nonzero(f))}
    return Chain(n, n, coeffs, spacing, group)


def chain_to_raster(A: Chain, shape: tuple[int, ...] | None = None) -> np.ndarray:
    if A.k != A.n:
        raise DegreeError(f"need a top-degree chain, got k={A.k}, n={A.n}")
    if A.group not in (REAL, INTEGER):
        raise ConfigError(f"raster needs real coefficients, got {A.group.tag}")
    if any(a < 0 for c in A.coeffs for a in c.anchor):
        raise ConfigError("raster export needs nonnegative anchors")
    if shape is None:
        shape = tuple(max((c.anchor[i] + 1 for c in A.coeffs), default=1) for i in range(A.n))
    out = np.zeros(shape, dtype=float)
    for c, v in A.coeffs.items():
        out[c.anchor] = v
    return out
