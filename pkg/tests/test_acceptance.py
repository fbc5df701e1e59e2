"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in pytest's terminal summary; running this file as a
script prints them directly.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from flatchain import (REAL, Chain, band_masses, construct_h, decompose_by_extraction,
                       decompose_lex, deform, extract_atom, flat_norm, is_indecomposable,
                       is_set_decomposition, maximal_decomposition, raster_to_chain)
from flatchain.chain import all_cells
from flatchain.bv import coarea_check, finest_partition, restrict_raster, tv
from flatchain.cost import BAND_CONSTANT, PowerCost, eta, eta_star
from flatchain.decompose import QEngine, default_cost, valid_partitions
from flatchain.fixtures import cross, cross_parts, points, sign_raster_chain, square_loop
from flatchain.isoperimetric import calibrate_constant, isoperimetric_report

from helpers import random_chain, random_real_chain, record


# --- 1: exact discrete coarea identity ------------------------------------------------------

def test_criterion_1_coarea_identity_exact():
    rng = np.random.default_rng(101)
    failures, largest = 0, 0
    for _ in range(500):
        f = rng.integers(-5, 6, size=(16, 16))
        chk = coarea_check(f)
        failures += not (chk["equal"] and chk["lhs"] == tv(f))
        largest = max(largest, int(chk["lhs"]))
    ok = record("1", failures == 0,
                f"tv == sliced perimeter integral exactly on 500 random 16x16 rasters "
                f"(failures {failures}, largest tv {largest})")
    assert ok


# --- 2 and 3: finest partition on every 3x3 sign pattern ---------------------------------------

def _restricted_growth(k: int) -> np.ndarray:
    """All set partitions of k labelled items as label rows (first occurrence order)."""
    rows = [[0]]
    for _ in range(1, k):
        rows = [r + [lab] for r in rows for lab in range(max(r) + 2)]
    return np.array(rows, dtype=np.int8) if k else np.zeros((1, 0), dtype=np.int8)


GROWTH = {k: _restricted_growth(k) for k in range(10)}
SHAPE = (3, 3)


def _suite_rasters():
    """Every sign pattern on 3x3 with magnitudes 1/2 fixed per pattern, then random-magnitude extras."""
    mags = np.array([1, 2, 2, 1, 2, 1, 1, 2, 1]).reshape(SHAPE)
    for n, signs in enumerate(itertools.product((-1, 0, 1), repeat=9)):
        s = np.array(signs, dtype=np.int64).reshape(SHAPE)
        yield s * (mags if n % 2 else 3 - mags)
    rng = np.random.default_rng(202)
    for _ in range(2000):
        yield rng.choice([-2, -1, 0, 1, 2], size=SHAPE)


def _omega_edges(f):
    sites = [s for s in np.ndindex(f.shape) if f[s] != 0]
    pos = {s: i for i, s in enumerate(sites)}
    edges, defects = [], []
    for s in sites:
        for ax in range(2):
            t = list(s)
            t[ax] += 1
            t = tuple(t)
            if t in pos:
                a, b = int(f[s]), int(f[t])
                edges.append((pos[s], pos[t]))
                # tv(1_S f) + tv(1_T f) - tv(f) contributed by this edge when it is cut
                defects.append(abs(a) + abs(b) - abs(a - b))
    return sites, edges, np.array(defects, dtype=np.int64)


def _cut_excess(labels: np.ndarray, edges, defects) -> np.ndarray:
    """``sum_S tv(1_S f) - tv(f)`` for every partition row, edge by edge."""
    if not edges:
        return np.zeros(len(labels), dtype=np.int64)
    i, j = np.array(edges).T
    return (labels[:, i] != labels[:, j]).astype(np.int64) @ defects


def test_cut_excess_oracle_matches_definition():
    """The vectorized oracle equals the literal sum of total variations."""
    rng = np.random.default_rng(7)
    for _ in range(200):
        f = rng.choice([-2, -1, 0, 1, 2], size=SHAPE)
        sites, edges, defects = _omega_edges(f)
        if not sites:
            continue
        labels = GROWTH[len(sites)]
        row = labels[rng.integers(len(labels))]
        blocks = [[s for s, lab in zip(sites, row) if lab == b] for b in range(row.max() + 1)]
        literal = sum(tv(restrict_raster(f, b)) for b in blocks) - tv(f)
        assert _cut_excess(row[None, :], edges, defects)[0] == literal


def test_criterion_2_finest_partition_unique():
    rasters = checked = partitions = 0
    failures = []
    for f in _suite_rasters():
        rasters += 1
        sites, edges, defects = _omega_edges(f)
        labels = GROWTH[len(sites)]
        additive = _cut_excess(labels, edges, defects) == 0
        block_of = {s: b for b, blk in enumerate(finest_partition(f)) for s in blk}
        p = np.array([block_of[s] for s in sites], dtype=np.int64)
        # finest partition is itself additive
        finest_ok = _cut_excess(p[None, :], edges, defects)[0] == 0
        # a row is refined by the finest partition iff it is constant on each finest block
        refined = np.ones(len(labels), dtype=bool)
        for b in np.unique(p):
            members = np.nonzero(p == b)[0]
            for m in members[1:]:
                refined &= labels[:, members[0]] == labels[:, m]
        partitions += len(labels)
        checked += int(additive.sum())
        if not (finest_ok and np.all(refined[additive]) and np.array_equal(refined, additive)):
            failures.append(f.tolist())
    ok = record("2", not failures,
                f"{rasters} rasters, {partitions} partitions enumerated, {checked} tv-additive; "
                f"each is refined by finest_partition, which is additive (failures {len(failures)})")
    assert ok, failures[:3]


def test_criterion_3_chain_and_raster_agree():
    rasters, mismatches = 0, []
    for f in _suite_rasters():
        rasters += 1
        dec = maximal_decomposition(raster_to_chain(f))
        chain_blocks = {frozenset(c.anchor for c in block) for block in dec.partition}
        if chain_blocks != set(finest_partition(f)):
            mismatches.append(f.tolist())
    ok = record("3", not mismatches,
                f"maximal_decomposition(raster_to_chain(f)) == finest_partition(f) on {rasters} rasters "
                f"(mismatches {len(mismatches)})")
    assert ok, mismatches[:3]


# --- 4 and 5: the k = 1 fixtures ---------------------------------------------------------------

def test_criterion_4_cross_non_uniqueness():
    A = cross()
    p = cross_parts()
    pairs = {"h/v": (p["horizontal"], p["vertical"]), "+/-": (p["above"], p["below"])}
    valid = {k: is_set_decomposition(A, v) for k, v in pairs.items()}
    atoms = {k: all(is_indecomposable(A.restrict(b)).status == "atom" for b in v) for k, v in pairs.items()}
    maximal = {frozenset(part) for part in valid_partitions(A)
               if len(part) > 1 and all(is_indecomposable(A.restrict(b)).is_atom for b in part)}
    ok = record("4", all(valid.values()) and all(atoms.values()) and len(maximal) >= 2,
                f"cross: {len(maximal)} distinct maximal set-decompositions; "
                f"valid {valid}; all parts atoms {atoms}")
    assert ok


def test_criterion_5_doubled_loop_is_atom():
    A = square_loop(2)
    rep = is_indecomposable(A, budget=10**6)
    # independent check: no nontrivial bipartition of the 4 cells is additive
    cells = sorted(A.support())
    splits = [S for r in range(1, len(cells)) for S in itertools.combinations(cells, r)]
    brute = not any(is_set_decomposition(A, [set(S), set(cells) - set(S)]) for S in splits)
    ok = record("5", rep.status == "atom" and brute,
                f"2 x unit square loop over Z: search says {rep.status!r}, "
                f"{len(splits)} bipartitions all non-additive: {brute}")
    assert ok


# --- 6: 0-chains ----------------------------------------------------------------------------------

def test_criterion_6_zero_chain_atoms():
    rng = np.random.default_rng(606)
    failures = 0
    for _ in range(10):
        npts = int(rng.integers(1, 7))
        flat = rng.choice(49, size=npts, replace=False)
        pos = [(int(i) // 7, int(i) % 7) for i in flat]
        vals = [float(rng.choice([-1, 1]) * rng.uniform(0.2, 3.0)) for _ in pos]
        A = points(pos, vals, group=REAL)
        dec = maximal_decomposition(A)
        singletons = sorted(len(b) for b in dec.partition) == [1] * npts
        lex = decompose_lex(A)
        same = np.allclose(sorted(lex.n_values), sorted(dec.n_values), rtol=1e-12)
        failures += not (singletons and same)
    ok = record("6", failures == 0,
                f"10 random real 0-chains (<= 6 points): maximal parts are singletons and "
                f"lexicographic N-values agree (failures {failures})")
    assert ok


# --- 7: the cost-function construction ---------------------------------------------------------------

def _random_samples(rng):
    count = int(rng.integers(5, 60))
    values = np.exp(rng.uniform(np.log(1e-12), np.log(3.0), size=count))
    weights = rng.uniform(0.0, 2.0, size=count)
    return list(zip(values.tolist(), weights.tolist()))


def test_criterion_7_cost_construction():
    rng = np.random.default_rng(707)
    problems = []
    worst_band = worst_integral = 0.0
    for trial in range(20):
        samples = _random_samples(rng)
        a = band_masses(samples)
        h = construct_h(a)
        J = h.depth
        c = np.array([h.slope(j) for j in range(J + 9)])
        b = np.array(h.b)
        grid = np.concatenate([[0.0], np.logspace(-30, 1, 400)])
        hs = np.array([h(s) for s in grid])
        mid = [(x, y) for x, y in zip(rng.uniform(0, 2, 200), rng.uniform(0, 2, 200))]
        checks = {
            "h(0)=0": h(0.0) == 0.0,
            "monotone": bool(np.all(np.diff(hs) > 0)),
            "concave": bool(np.all(np.diff(c) >= -1e-12 * c[1:]))
                       and all(h((x + y) / 2) >= (h(x) + h(y)) / 2 - 1e-12 for x, y in mid),
            "g>=1": bool(np.all(c >= 1.0)),
            "c_{j+i}<=2^{i/2}c_j": all(c[j + i] <= 2.0 ** (i / 2) * c[j] * (1 + 1e-12)
                                        for j in range(len(c)) for i in range(len(c) - j)),
            "c_j<=b_j": bool(np.all(c[:J + 1] <= b[:J + 1] * (1 + 1e-12))),
        }
        band_ok = True
        for j in range(J + 9):
            s = np.linspace(2.0 ** (-j - 1), 2.0 ** -j, 1001)[1:]
            ratio = max(h(x) / (BAND_CONSTANT * x * c[j]) for x in s)
            worst_band = max(worst_band, ratio)
            band_ok &= ratio <= 1 + 1e-9
        checks["band bound"] = band_ok
        lhs = sum(w * h(v) for v, w in samples)
        rhs = BAND_CONSTANT * sum(c[j] * aj for j, aj in enumerate(a.values))
        worst_integral = max(worst_integral, lhs / rhs if rhs else 0.0)
        checks["integral bound"] = lhs <= rhs * (1 + 1e-9)
        problems += [(trial, k) for k, v in checks.items() if not v]
    ok = record("7", not problems,
                f"20 random band-mass inputs: h(0)=0, monotone, concave, g>=1, c growth <= sqrt2/band, "
                f"c<=b, max h/((2+sqrt2)s c_j) = {worst_band:.4f}, "
                f"max integral ratio = {worst_integral:.4f} (violations {problems[:3]})")
    assert ok


# --- 8: deformation identity ---------------------------------------------------------------------------------

def test_criterion_8_deformation_identity():
    rng = np.random.default_rng(808)
    nonzero, worst = 0, 0.0
    for i in range(200):
        n = 2 + i % 2
        k = int(rng.integers(0, 3))
        rho = int(rng.integers(2, 4))
        A = random_chain(rng, n=n, k=k, cells=int(rng.integers(1, 11)), lo=-4, hi=6,
                         values=(-3, -2, -1, 1, 2, 3))
        offset = tuple(int(x) for x in rng.integers(0, rho, size=n))
        res = deform(A, rho, offset)
        nonzero += not res.residual().is_zero()
        ratio = (res.R.mass() + res.S.mass()) / (rho * A.spacing * A.normal_mass())
        assert math.isfinite(ratio)
        worst = max(worst, ratio)
    ok = record("8", nonzero == 0,
                f"A == P + R + dS exactly on 200 chains (k in 0..2, n in 2..3, rho in 2..3; "
                f"nonzero residuals {nonzero}); max (M(R)+M(S))/(rho eps N(A)) = {worst:.4f}")
    assert ok


# --- 9: isoperimetric inequality ---------------------------------------------------------------------------------

SPACING = 1.0 / 16


def _iso_suite(seed, count):
    rng = np.random.default_rng(seed)
    return [random_chain(rng, cells=int(rng.integers(2, 11)), lo=0, hi=5,
                         values=(-3, -2, -1, 1, 2, 3), spacing=SPACING) for _ in range(count)]


@pytest.fixture(scope="module")
def iso_setup():
    train = _iso_suite(909, 100)
    test = _iso_suite(910, 100)
    h = construct_h(band_masses((abs(v), SPACING) for A in train for v in A.coeffs.values()))
    train_flat = [flat_norm(A, margin=2).value for A in train]
    return train, test, h, train_flat


def test_criterion_9_isoperimetric_inequality(iso_setup):
    train, test, h, train_flat = iso_setup
    overlap = {hash(A) for A in train} & {hash(A) for A in test}
    cal = calibrate_constant(train, h, train_flat)
    reports = [isoperimetric_report(A, h, cal["c"], margin=2) for A in test]
    failures = sum(not r.passed for r in reports)
    worst = max(r.slack for r in reports)
    ok = record("9a", failures == 0 and not overlap,
                f"c calibrated on 100 training chains = {cal['c']:.4g} (raw {cal['raw']:.4g}); "
                f"F <= eta(M)(M_h + N) on 100 disjoint test chains: failures {failures}, "
                f"worst lhs/rhs {worst:.4f}")
    assert ok


def test_criterion_9_eta_decreases_to_zero(iso_setup):
    h = iso_setup[2]
    grid = [10.0 ** -e for e in range(0, 31, 2)]
    values = [eta(h, m, 1.0, 1) for m in grid]
    decreasing = all(x >= y * (1 - 1e-6) for x, y in zip(values, values[1:]))
    ok = record("9b", decreasing and values[-1] < 1e-2,
                f"eta nonincreasing as m decreases 1 -> 1e-30 ({decreasing}); eta(1e-30) = {values[-1]:.3g}")
    assert ok


@pytest.mark.xfail(strict=True, reason="the constructed h grows like s*log(1/s) above 2^-64, "
                                       "so eta(1e-12) is about 0.049 for every c >= 1")
def test_criterion_9_eta_threshold_at_1e_minus_12(iso_setup):
    h = iso_setup[2]
    value = eta(h, 1e-12, 1.0, 1)
    ok = record("9c", value < 1e-2, f"eta(1e-12) = {value:.4f} for the constructed h, c = 1 (required < 1e-2)")
    assert ok


def _eta_star_slope(k):
    ms = np.logspace(-6, -2, 9)
    ys = [eta_star(PowerCost(0.5), m, 1.0, k) for m in ms]
    return float(np.polyfit(np.log(ms), np.log(ys), 1)[0])


def test_criterion_9_exponent_matches_closed_form():
    alpha = 0.5
    slopes = {k: _eta_star_slope(k) for k in (1, 2)}
    expect = {k: (1 - alpha) / (alpha + k * (1 - alpha)) for k in (1, 2)}
    ok = record("9d", all(abs(slopes[k] - expect[k]) <= 0.05 * expect[k] for k in slopes),
                f"h = sqrt: fitted eta* slopes {', '.join(f'k={k}: {slopes[k]:.4f}' for k in slopes)} vs "
                f"(1-a)/(a+k(1-a)) = {', '.join(f'{expect[k]:.4f}' for k in expect)}")
    assert ok


@pytest.mark.xfail(strict=True, reason="(1-a)/(a+k(1-a)) at a=1/2, k=1 equals 1/2, not 1/3")
def test_criterion_9_exponent_one_third_at_degree_one():
    slope = _eta_star_slope(1)
    ok = record("9e", abs(slope - 1 / 3) <= 0.05 / 3,
                f"h = sqrt, k = 1: fitted eta* slope {slope:.4f} vs required 1/3 within 5%")
    assert ok


# --- 10: flat norm ----------------------------------------------------------------------------------------------------

GRID_BOX = ((0, 0), (3, 3))  # 4 x 4 vertices


def test_criterion_10_lp_matches_exhaustive():
    rng = np.random.default_rng(1010)
    chains = [Chain(2, 1, {cell: v}) for cell in all_cells(2, 1, *GRID_BOX) for v in (-2, -1, 1, 2)]
    chains += [random_chain(rng, cells=int(rng.integers(2, 7)), lo=0, hi=3, values=(-2, -1, 1, 2))
               for _ in range(120)]
    worst = 0.0
    for A in chains:
        lp = flat_norm(A, box=GRID_BOX, method="lp")
        ex = flat_norm(A, box=GRID_BOX, method="exhaustive")
        assert lp.check() and ex.check()
        worst = max(worst, abs(lp.value - ex.value))
    ok = record("10a", worst <= 1e-7,
                f"LP == exhaustive integer search on {len(chains)} chains on the 4x4 grid "
                f"(all 1-cell chains + 120 random 2..6-cell chains); max |diff| = {worst:.2e}")
    assert ok


def test_criterion_10_norm_axioms():
    rng = np.random.default_rng(1011)
    box = ((-1, -1), (6, 6))
    bad = []
    for i in range(100):
        A = random_real_chain(rng, cells=int(rng.integers(1, 6)), hi=5)
        B = random_real_chain(rng, cells=int(rng.integers(1, 6)), hi=5)
        fa, fb = flat_norm(A, box=box).value, flat_norm(B, box=box).value
        fab = flat_norm(A + B, box=box).value
        fneg = flat_norm(-A, box=box).value
        if not (fab <= fa + fb + 1e-9 and abs(fneg - fa) <= 1e-9 * max(1, fa) and fa > 0 and fb > 0):
            bad.append(i)
    zero = flat_norm(Chain(2, 1, group=REAL), box=box).value
    ok = record("10b", not bad and zero == 0.0,
                f"triangle, symmetry and definiteness on 100 random pairs (violations {bad[:5]}); F(0) = {zero}")
    assert ok


# --- 11: the atom-extraction engine ---------------------------------------------------------------------------------------

def _engine_family():
    family = [cross(), square_loop(1), square_loop(2), square_loop(1, side=2), sign_raster_chain(),
              points([(0, 0), (2, 0), (0, 3)], [1.0, -2.0, 0.5])]
    rng = np.random.default_rng(1111)
    for i in range(30):
        n, k = ((2, 1), (2, 2), (3, 2), (2, 0))[i % 4]
        family.append(random_chain(rng, n=n, k=k, cells=int(rng.integers(2, 9)), lo=0, hi=3,
                                   values=(-2, -1, 1, 2)))
    return family


def test_criterion_11_extraction_engine():
    problems = []
    family = _engine_family()
    for idx, A in enumerate(family):
        assert len(A) <= 8
        h = default_cost(A)
        eng = QEngine(A, h)
        full = A.support()
        q, nu = eng.q(full), eng.nu(full)
        ext = extract_atom(A, engine=eng)
        atom_ok = is_indecomposable(ext.atom).status == "atom"
        dec = decompose_by_extraction(A, h)
        parts_ok = dec.valid and all(is_indecomposable(p).status == "atom" for p in dec.parts)
        nu_sum = sum(eng.nu(b) for b in dec.partition)
        checks = {
            "q<=nu": q <= nu * (1 + 1e-12),
            "atom": atom_ok,
            "q(A-a)<=nu(a)": ext.q_remainder <= ext.nu_atom * (1 + 1e-9),
            "valid atoms": parts_ok,
            "nu additive": abs(nu_sum - nu) <= 1e-9 * nu,
        }
        problems += [(idx, k) for k, v in checks.items() if not v]
    ok = record("11", not problems,
                f"{len(family)} fixture chains (<= 8 cells): q <= nu, extracted atoms verified with "
                f"q(A-a) <= nu(a), repeated extraction gives valid all-atom decompositions with "
                f"sum nu(parts) = nu(A) (problems {problems[:3]})")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
