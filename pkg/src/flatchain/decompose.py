"""Set-decompositions of chains: validity, atoms, maximal splittings.

A partition of the support is a set-decomposition when the normal mass is
additive over the restricted parts.  Mass is additive for free, so the test
reduces to the boundary: at every (k-1)-face the norms of the parts' boundary
contributions must add up to the norm of their sum.  All searches below work
on that face-local form.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

from .chain import Cell, Chain
from .cost import band_masses, construct_h
from .unionfind import UnionFind

DEFAULT_BUDGET = 1_000_000
ENUMERATION_CAP = 12
_LOCAL_ENUM_CAP = 8


class BudgetExhausted(RuntimeError):
    """A budgeted search stopped before deciding."""


class PartitionError(ValueError):
    pass


class SearchTooLarge(RuntimeError):
    """Exhaustive enumeration requested on too large a support."""


CellSet = frozenset
Partition = tuple  # tuple of CellSets


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    """All set partitions of ``items`` (restricted growth order, coarsest first)."""
    items = list(items)
    if not items:
        yield []
        return

    def rec(i, blocks):
        if i == len(items):
            yield [list(b) for b in blocks]
            return
        for b in blocks:
            b.append(items[i])
            yield from rec(i + 1, blocks)
            b.pop()
        blocks.append([items[i]])
        yield from rec(i + 1, blocks)
        blocks.pop()

    yield from rec(1, [[items[0]]])


def tolerance(A: Chain) -> float:
    return 0.0 if A.group.exact else 1e-9 * A.normal_mass()


def face_table(A: Chain) -> dict[Cell, list[tuple[Cell, object]]]:
    """Face -> [(cell, boundary contribution of that cell at the face)]."""
    table: dict[Cell, list] = defaultdict(list)
    if A.k == 0:
        return table
    g = A.group
    for cell, v in A.items():
        for face, s in cell.faces():
            table[face].append((cell, g.scale(v, s)))
    return table


def _defect(group, sums: Iterable) -> float:
    """``sum |s_j| - |sum s_j|`` (nonnegative by the triangle inequality)."""
    sums = list(sums)
    total = sums[0]
    for s in sums[1:]:
        total = group.add(total, s)
    return sum(group.norm(s) for s in sums) - group.norm(total)


def _check_partition(A: Chain, parts: Iterable[Iterable[Cell]]) -> tuple[list[frozenset], bool]:
    blocks = [frozenset(p) for p in parts]
    seen: set = set()
    for b in blocks:
        if seen & b:
            raise PartitionError(f"blocks overlap on {sorted(seen & b)[:3]}")
        seen |= b
    return blocks, A.support() <= seen


def additive_globally(A: Chain, blocks: Sequence[frozenset], tol: float | None = None) -> bool:
    tol = tolerance(A) if tol is None else tol
    total = sum(A.restrict(b).normal_mass() for b in blocks)
    return abs(total - A.normal_mass()) <= tol


def additive_locally(A: Chain, blocks: Sequence[frozenset], tol: float | None = None) -> bool:
    tol = tolerance(A) if tol is None else tol
    label = {c: i for i, b in enumerate(blocks) for c in b}
    g = A.group
    for entries in face_table(A).values():
        if len(entries) < 2:
            continue
        sums: dict[int, object] = {}
        for cell, s in entries:
            j = label[cell]
            sums[j] = g.add(sums[j], s) if j in sums else s
        if len(sums) > 1 and _defect(g, sums.values()) > tol:
            return False
    return True


def is_set_decomposition(A: Chain, parts: Iterable[Iterable[Cell]], tol: float | None = None) -> bool:
    """Whether the blocks cover the support and split ``N(A)`` additively.

    Both the global and the face-local test are evaluated and must agree.
    """
    blocks, covers = _check_partition(A, parts)
    if not covers:
        return False
    glob = additive_globally(A, blocks, tol)
    loc = additive_locally(A, blocks, tol)
    if glob != loc:
        raise AssertionError("global and face-local additivity disagree")
    return glob


# --- forced merges --------------------------------------------------------------

def _locally_valid_groupings(group, entries, tol) -> list[list[list[int]]]:
    idx = list(range(len(entries)))
    out = []
    for blocks in set_partitions(idx):
        if len(blocks) == 1:
            out.append(blocks)
            continue
        sums = []
        for b in blocks:
            s = entries[b[0]][1]
            for i in b[1:]:
                s = group.add(s, entries[i][1])
            sums.append(s)
        if _defect(group, sums) <= tol:
            out.append(blocks)
    return out


def forced_merges(A: Chain, tol: float | None = None) -> UnionFind:
    """Union cells that share a block in every set-decomposition.

    At a face met by two cells the pair merges exactly when separating them
    breaks the triangle equality.  With three to eight cells, a pair merges
    when every locally valid grouping of the face's cells keeps it together.
    Busier faces are skipped.
    """
    tol = tolerance(A) if tol is None else tol
    uf = UnionFind(sorted(A.coeffs))
    g = A.group
    for entries in face_table(A).values():
        m = len(entries)
        if m < 2:
            continue
        if m == 2:
            if _defect(g, [entries[0][1], entries[1][1]]) > tol:
                uf.union(entries[0][0], entries[1][0])
            continue
        if m > _LOCAL_ENUM_CAP:
            continue
        groupings = _locally_valid_groupings(g, entries, tol)
        for i in range(m):
            for j in range(i + 1, m):
                if all(any(i in b and j in b for b in blocks) for blocks in groupings):
                    uf.union(entries[i][0], entries[j][0])
    return uf


# --- block search ---------------------------------------------------------------

class _BlockProblem:
    """Forced-merge blocks of a chain and the faces shared by several blocks."""

    def __init__(self, A: Chain, tol: float | None = None):
        self.A = A
        self.tol = tolerance(A) if tol is None else tol
        self.blocks = forced_merges(A, self.tol).groups()
        label = {c: i for i, b in enumerate(self.blocks) for c in b}
        g = A.group
        faces = []
        for entries in face_table(A).values():
            sums: dict[int, object] = {}
            for cell, s in entries:
                j = label[cell]
                sums[j] = g.add(sums[j], s) if j in sums else s
            if len(sums) > 1:
                faces.append(sorted(sums.items()))
        # check each face once its highest block is placed
        self.closing: list[list] = [[] for _ in self.blocks]
        for entries in faces:
            self.closing[entries[-1][0]].append(entries)

    def face_ok(self, entries, label) -> bool:
        g = self.A.group
        sums: dict[int, object] = {}
        for b, s in entries:
            j = label[b]
            sums[j] = g.add(sums[j], s) if j in sums else s
        return len(sums) == 1 or _defect(g, sums.values()) <= self.tol


@dataclass
class AtomReport:
    chain: Chain
    status: str  # "atom" | "decomposable" | "unknown"
    witness: tuple[frozenset, frozenset] | None = None
    nodes: int = 0

    @property
    def is_atom(self) -> bool | None:
        return None if self.status == "unknown" else self.status == "atom"


def is_indecomposable(A: Chain, budget: int = DEFAULT_BUDGET, tol: float | None = None) -> AtomReport:
    """Search for a nontrivial valid bipartition of the forced-merge blocks.

    Depth-first over blocks (first block pinned to side 0), pruning at every
    face as soon as all its blocks are placed.  Each placement costs one node
    of ``budget``; running out yields status ``"unknown"``.
    """
    if len(A) <= 1:
        return AtomReport(A, "atom")
    prob = _BlockProblem(A, tol)
    nb = len(prob.blocks)
    if nb == 1:
        return AtomReport(A, "atom")
    side = [0] * nb
    nodes = 0

    def rec(i) -> bool:
        nonlocal nodes
        if i == nb:
            return any(side)
        for s in (0, 1):
            nodes += 1
            if nodes > budget:
                raise BudgetExhausted(f"partition enumeration exceeded {budget} nodes")
            side[i] = s
            if all(prob.face_ok(f, side) for f in prob.closing[i]) and rec(i + 1):
                return True
        return False

    side[0] = 0
    try:
        found = all(prob.face_ok(f, side) for f in prob.closing[0]) and rec(1)
    except BudgetExhausted:
        return AtomReport(A, "unknown", None, nodes)
    if not found:
        return AtomReport(A, "atom", None, nodes)
    left = frozenset().union(*(b for b, s in zip(prob.blocks, side) if s == 0))
    right = frozenset().union(*(b for b, s in zip(prob.blocks, side) if s == 1))
    return AtomReport(A, "decomposable", (left, right), nodes)


def valid_partitions(A: Chain, budget: int = DEFAULT_BUDGET, tol: float | None = None,
                     cap: int | None = ENUMERATION_CAP) -> Iterator[tuple[frozenset, ...]]:
    """Every set-decomposition of ``A`` as a tuple of cell sets, coarsest first."""
    if cap is not None and len(A) > cap:
        raise SearchTooLarge(f"support of {len(A)} cells exceeds the enumeration cap {cap}")
    if A.is_zero():
        yield ()
        return
    prob = _BlockProblem(A, tol)
    nb = len(prob.blocks)
    label = [0] * nb
    nodes = 0

    def rec(i, nlabels):
        nonlocal nodes
        if i == nb:
            groups: list[set] = [set() for _ in range(nlabels)]
            for b, lab in zip(prob.blocks, label):
                groups[lab] |= b
            yield tuple(frozenset(s) for s in groups)
            return
        for lab in range(nlabels + 1):
            nodes += 1
            if nodes > budget:
                raise BudgetExhausted(f"partition enumeration exceeded {budget} nodes")
            label[i] = lab
            if all(prob.face_ok(f, label) for f in prob.closing[i]):
                yield from rec(i + 1, max(nlabels, lab + 1))

    label[0] = 0
    yield from rec(1, 1)


# --- decompositions ---------------------------------------------------------------

def _order(blocks: Iterable[frozenset]) -> tuple[frozenset, ...]:
    return tuple(sorted((b for b in blocks if b), key=min))


@dataclass(frozen=True)
class Decomposition:
    parent: Chain
    partition: tuple[frozenset, ...]

    @property
    def parts(self) -> list[Chain]:
        return [self.parent.restrict(b) for b in self.partition]

    @property
    def n_values(self) -> list[float]:
        return [p.normal_mass() for p in self.parts]

    @property
    def valid(self) -> bool:
        return is_set_decomposition(self.parent, self.partition)

    def __len__(self):
        return len(self.partition)


def maximal_decomposition(A: Chain, budget: int = DEFAULT_BUDGET) -> Decomposition:
    """Split recursively along indecomposability witnesses until all parts are atoms."""
    atoms: list[frozenset] = []
    pending = [A.support()]
    while pending:
        cells = pending.pop()
        report = is_indecomposable(A.restrict(cells), budget)
        if report.status == "unknown":
            raise BudgetExhausted(f"undecided after {report.nodes} nodes on {len(cells)} cells")
        if report.status == "atom":
            atoms.append(cells)
        else:
            pending.extend(report.witness)
    dec = Decomposition(A, _order(atoms))
    if not dec.valid:
        raise AssertionError("maximal decomposition lost additivity")
    return dec


def default_cost(A: Chain):
    """Cost h built from the chain's own coefficient norms."""
    w = A.spacing ** A.k
    return construct_h(band_masses((float(A.group.norm(v)), w) for v in A.coeffs.values()))


class QEngine:
    """``nu = M_h + N`` and the min-max quantity ``q`` over restrictions of one chain."""

    def __init__(self, A: Chain, h: Callable[[float], float] | None = None,
                 budget: int = DEFAULT_BUDGET, cap: int = ENUMERATION_CAP):
        if len(A) > cap:
            raise SearchTooLarge(f"support of {len(A)} cells exceeds {cap}")
        self.A = A
        self.h = default_cost(A) if h is None else h
        self.budget = budget
        self._nu: dict[frozenset, float] = {}
        self._q: dict[frozenset, tuple[float, tuple]] = {}

    def chain(self, cells: frozenset) -> Chain:
        return self.A.restrict(cells)

    def nu(self, cells: frozenset) -> float:
        cells = frozenset(cells)
        if cells not in self._nu:
            B = self.chain(cells)
            self._nu[cells] = B.h_mass(self.h) + B.normal_mass()
        return self._nu[cells]

    def partitions(self, cells: frozenset):
        return valid_partitions(self.chain(cells), self.budget)

    def q(self, cells: frozenset) -> float:
        return self.q_optimal(cells)[0]

    def q_optimal(self, cells: frozenset) -> tuple[float, tuple]:
        """``q`` and the first decomposition (enumeration order) attaining it."""
        cells = frozenset(cells)
        if cells not in self._q:
            best, arg = float("inf"), ()
            for part in self.partitions(cells):
                worst = max((self.nu(b) for b in part), default=0.0)
                if worst < best - 1e-12 * max(1.0, best if best < float("inf") else 1.0):
                    best, arg = worst, part
            self._q[cells] = (best if arg else 0.0, arg)
        return self._q[cells]


def q_value(A: Chain, h=None, budget: int = DEFAULT_BUDGET) -> float:
    """``min over set-decompositions of max nu(part)``."""
    return QEngine(A, h, budget).q(A.support())


@dataclass(frozen=True)
class Extraction:
    atom: Chain
    remainder: Chain
    path: tuple[frozenset, ...]  # b_0 >= b_1 >= ... >= atom
    q_remainder: float
    nu_atom: float


def extract_atom(A: Chain, h=None, eps_schedule: Sequence[float] = (), engine: QEngine | None = None) -> Extraction:
    """Descend through near-q-optimal parts to an atom ``a`` with ``q(A - a) <= nu(a)``."""
    eng = engine or QEngine(A, h)
    full = A.support()
    b = full
    path = [b]
    step = 0
    while True:
        if is_indecomposable(A.restrict(b), eng.budget).status == "atom":
            break
        eps = eps_schedule[step] if step < len(eps_schedule) else 0.0
        qb, opt = eng.q_optimal(b)
        if eps > 0:
            opt = next(p for p in eng.partitions(b)
                       if len(p) > 1 and max(eng.nu(x) for x in p) <= qb + eps)
        # keep the part with the largest q; first in cell order on ties
        parts = _order(opt)
        top = max(eng.q(p) for p in parts)
        b = next(p for p in parts if eng.q(p) == top)
        path.append(b)
        step += 1
    atom = A.restrict(b)
    rest = full - b
    q_rest = eng.q(rest) if rest else 0.0
    nu_a = eng.nu(b)
    tol = 1e-9 * max(1.0, nu_a)
    if q_rest > nu_a + tol:
        raise AssertionError(f"extracted atom too small: q(rest)={q_rest} > nu(atom)={nu_a}")
    return Extraction(atom, A.restrict(rest), tuple(path), q_rest, nu_a)


def decompose_by_extraction(A: Chain, h=None, budget: int = DEFAULT_BUDGET) -> Decomposition:
    """Peel off big atoms one by one until nothing is left."""
    h = default_cost(A) if h is None else h
    atoms = []
    rest = A.support()
    while rest:
        sub = QEngine(A.restrict(rest), h, budget)
        ext = extract_atom(sub.A, engine=sub)
        atoms.append(ext.atom.support())
        rest = rest - ext.atom.support()
    return Decomposition(A, _order(atoms))


def _lex_less(u: Sequence[float], v: Sequence[float], tol: float) -> bool:
    # sequences continue with zeros
    size = max(len(u), len(v))
    u = list(u) + [0.0] * (size - len(u))
    v = list(v) + [0.0] * (size - len(v))
    for x, y in zip(u, v):
        if x < y - tol:
            return True
        if x > y + tol:
            return False
    return False


def decompose_lex(A: Chain, budget: int = DEFAULT_BUDGET, cap: int = ENUMERATION_CAP) -> Decomposition:
    """Lexicographic minimizer of the nonincreasing ``N``-sequence over set-decompositions."""
    if A.group.tag not in ("R", "Z"):
        raise ValueError(f"lexicographic decomposition needs real coefficients, not {A.group.tag}")
    tol = max(tolerance(A), 1e-12)
    best, best_seq = None, None
    for part in valid_partitions(A, budget, cap=cap):
        seq = sorted((A.restrict(b).normal_mass() for b in part), reverse=True)
        if best is None or _lex_less(seq, best_seq, tol):
            best, best_seq = part, seq
    dec = Decomposition(A, _order(best or ()))
    for p in dec.parts:
        if is_indecomposable(p, budget).status != "atom":
            raise AssertionError("lexicographic minimizer has a decomposable part")
    return dec
