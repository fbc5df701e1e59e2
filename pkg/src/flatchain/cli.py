"""``flatchain`` command line: one subcommand per analysis, JSON reports on stdout or to a file.

Exit codes: 0 success/pass, 1 check failed, 2 usage or input error,
3 resource or search budget exhausted.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import bv, fixtures
from .chain import DegreeError
from .cost import band_masses, construct_h, load_cost, save_cost, DomainError
from .decompose import (DEFAULT_BUDGET, BudgetExhausted, SearchTooLarge, decompose_lex, default_cost,
                        is_indecomposable, is_set_decomposition, maximal_decomposition)
from .deform import deform_best
from .flatnorm import ResourceError, flat_norm
from .groups import ConfigError
from .io import (InputFileError, cell_json, parse_chain_file, parse_raster, parse_samples,
                 write_chain_file, write_raster, write_report)
from .isoperimetric import isoperimetric_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

log = logging.getLogger("flatchain")


@dataclass
class Config:
    tolerance: float = 1e-9
    budget: int = DEFAULT_BUDGET
    margin: int | None = None
    seed: int = 0
    out: Path | None = None
    plot: Path | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.budget < 1:
            raise ConfigError("budget must be at least 1")
        if self.margin is not None and self.margin < 0:
            raise ConfigError("margin must be nonnegative")

    @classmethod
    def from_args(cls, args) -> "Config":
        seed = getattr(args, "seed", 0)
        env = os.environ.get("FLATCHAIN_SEED")
        if env is not None:
            try:
                seed = int(env)
            except ValueError:
                raise ConfigError(f"FLATCHAIN_SEED must be an integer, got {env!r}") from None
        return cls(
            tolerance=getattr(args, "tolerance", 1e-9),
            budget=getattr(args, "budget", DEFAULT_BUDGET),
            margin=getattr(args, "margin", None),
            seed=seed,
            out=getattr(args, "out", None),
            plot=getattr(args, "plot", None),
        )


class CheckFailed(Exception):
    """Raised by a command whose report is complete but whose check did not pass."""

    def __init__(self, report):
        super().__init__("check failed")
        self.report = report


def _emit(report: dict, cfg: Config) -> None:
    text = write_report(report, cfg.out)
    if cfg.out is None:
        sys.stdout.write(text)


def _partition_json(partition) -> list:
    return [[cell_json(c) for c in sorted(b)] for b in partition]


def _load_h(path, A):
    if path is None:
        return default_cost(A)
    return load_cost(path)


# ---------------------------------------------------------------- commands

def cmd_decompose(args, cfg: Config) -> dict:
    A = parse_chain_file(args.chain)
    if args.algo == "lex":
        dec = decompose_lex(A, cfg.budget)
    else:
        dec = maximal_decomposition(A, cfg.budget)
    atoms = [is_indecomposable(p, cfg.budget).status == "atom" for p in dec.parts]
    report = {
        "command": "decompose",
        "algorithm": args.algo,
        "cells": len(A),
        "parts": _partition_json(dec.partition),
        "N_values": dec.n_values,
        "normal_mass": A.normal_mass(),
        "valid": dec.valid,
        "atoms": atoms,
    }
    if args.h is not None:
        h = load_cost(args.h)
        report["h_mass"] = [p.h_mass(h) for p in dec.parts]
    if args.parts_dir is not None:
        args.parts_dir.mkdir(parents=True, exist_ok=True)
        for i, p in enumerate(dec.parts):
            write_chain_file(p, args.parts_dir / f"part_{i:03d}.jsonl")
    if cfg.plot is not None:
        from .plotting import plot_chain_parts
        plot_chain_parts(A, dec.partition, cfg.plot)
    if not (report["valid"] and all(atoms)):
        raise CheckFailed(report)
    return report


def cmd_indecomposable(args, cfg: Config) -> dict:
    A = parse_chain_file(args.chain)
    rep = is_indecomposable(A, cfg.budget)
    report = {
        "command": "indecomposable",
        "cells": len(A),
        "status": rep.status,
        "nodes": rep.nodes,
        "witness": _partition_json(rep.witness) if rep.witness else None,
    }
    if rep.status == "unknown":
        _emit(report, cfg)
        raise BudgetExhausted(f"undecided after {rep.nodes} nodes")
    return report


def cmd_flatnorm(args, cfg: Config) -> dict:
    A = parse_chain_file(args.chain)
    cert = flat_norm(A, margin=cfg.margin, method=args.method)
    report = {
        "command": "flatnorm",
        "value": cert.value,
        "method": cert.method,
        "mass": A.mass(),
        "filler_mass": cert.filler.mass(),
        "remainder_mass": cert.remainder.mass(),
        "filler": [[cell_json(c), cert.filler.group.to_json(v)] for c, v in cert.filler.items()],
        "certificate_ok": cert.check(),
    }
    if not report["certificate_ok"]:
        raise CheckFailed(report)
    return report


def cmd_deform(args, cfg: Config) -> dict:
    A = parse_chain_file(args.chain)
    h = load_cost(args.h) if args.h is not None else None
    res = deform_best(A, args.rho, trials=args.trials, seed=cfg.seed, h=h)
    residual = res.residual()
    report = {
        "command": "deform",
        "rho": args.rho,
        "offset": list(res.offset),
        "seed": cfg.seed,
        "trials": args.trials,
        "mass_A": A.mass(),
        "mass_P": res.P.mass(),
        "mass_R": res.R.mass(),
        "mass_S": res.S.mass(),
        "cells_P": len(res.P),
        "ratios": res.measured_ratios,
        "residual_zero": residual.is_zero(),
    }
    if not report["residual_zero"]:
        raise CheckFailed(report)
    return report


def cmd_isoperim(args, cfg: Config) -> dict:
    A = parse_chain_file(args.chain)
    h = _load_h(args.h, A)
    rep = isoperimetric_report(A, h, args.c, margin=cfg.margin)
    report = {"command": "isoperim", **rep.to_dict()}
    if not rep.passed:
        raise CheckFailed(report)
    return report


def cmd_make_h(args, cfg: Config) -> dict:
    samples = parse_samples(args.samples)
    h = construct_h(band_masses(samples), depth=args.depth)
    data = h.to_json()
    if args.h_out is not None:
        save_cost(h, args.h_out)
    if cfg.plot is not None:
        from .plotting import plot_cost
        plot_cost(h, cfg.plot)
    return {"command": "make-h", "samples": len(samples), "h": data}


def cmd_coarea_check(args, cfg: Config) -> dict:
    f = parse_raster(args.raster)
    chk = bv.coarea_check(f)
    report = {
        "command": "coarea-check",
        "shape": list(f.shape),
        "tv": chk["lhs"],
        "sliced_perimeter": chk["rhs"],
        "tv_exact": str(chk["lhs"]),
        "sliced_perimeter_exact": str(chk["rhs"]),
        "equal": chk["equal"],
    }
    if not chk["equal"]:
        raise CheckFailed(report)
    return report


def cmd_bv_decompose(args, cfg: Config) -> dict:
    f = parse_raster(args.raster)
    blocks = bv.finest_partition(f)
    labels = bv.label_map(f, blocks)
    if args.labels is not None:
        write_raster(labels, args.labels)
    if cfg.plot is not None:
        from .plotting import plot_label_map
        plot_label_map(f, labels, cfg.plot)
    report = {"command": "bv-decompose", "shape": list(f.shape), **bv.bv_report(f),
              "tv_additive": bv.is_tv_additive(f, blocks),
              "blocks_sites": [[list(s) for s in sorted(b)] for b in blocks]}
    if not (report["tv_additive"] and report["coarea_equal"]):
        raise CheckFailed(report)
    return report


def cmd_selftest(args, cfg: Config) -> dict:
    """Fixture checks with known answers."""
    checks = {}
    A = fixtures.cross()
    parts = fixtures.cross_parts()
    checks["cross_horizontal_vertical"] = is_set_decomposition(A, [parts["horizontal"], parts["vertical"]])
    checks["cross_above_below"] = is_set_decomposition(A, [parts["above"], parts["below"]])
    checks["loop_is_atom"] = is_indecomposable(fixtures.square_loop(2), cfg.budget).status == "atom"
    f = fixtures.SIGN_RASTER
    checks["raster_two_blocks"] = len(bv.finest_partition(f)) == 2
    checks["raster_coarea"] = bv.coarea_check(f)["equal"]
    cert = flat_norm(fixtures.square_loop(1), margin=1)
    checks["unit_loop_flat_norm"] = abs(cert.value - 1.0) < 1e-7
    dec = maximal_decomposition(fixtures.sign_raster_chain(), cfg.budget)
    checks["raster_chain_agrees"] = set(dec.partition) == {
        frozenset(c for c in fixtures.sign_raster_chain().support() if c.anchor in b)
        for b in bv.finest_partition(f)}
    report = {"command": "selftest", "checks": checks, "passed": all(checks.values())}
    if not report["passed"]:
        raise CheckFailed(report)
    return report


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="flatchain",
        description="Decompositions, flat norms and deformations of lattice chains; "
                    "total variation and level sets of rasters.",
        epilog="Exit codes: 0 ok, 1 check failed, 2 usage/input error, 3 budget exhausted. "
               "FLATCHAIN_SEED overrides --seed.",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, chain=True, plot=False):
        if chain:
            sp.add_argument("--chain", type=Path, required=True, help="chain file (JSON lines)")
        sp.add_argument("--out", type=Path, help="write the JSON report here instead of stdout")
        if plot:
            sp.add_argument("--plot", type=Path, help="also render a figure to this file")

    sp = sub.add_parser("decompose", help="maximal or lexicographic set-decomposition")
    common(sp, plot=True)
    sp.add_argument("--algo", choices=("maximal", "lex"), default="maximal")
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search node budget")
    sp.add_argument("--h", type=Path, help="cost function JSON (adds h-masses of the parts)")
    sp.add_argument("--parts-dir", type=Path, help="write each part as a chain file")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("indecomposable", help="decide whether a chain is an atom")
    common(sp)
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search node budget")
    sp.set_defaults(func=cmd_indecomposable)

    sp = sub.add_parser("flatnorm", help="flat norm with an optimal filler")
    common(sp)
    sp.add_argument("--margin", type=int, help="filler box margin in cells (default: diameter)")
    sp.add_argument("--method", choices=("auto", "lp", "exhaustive"), default="auto")
    sp.set_defaults(func=cmd_flatnorm)

    sp = sub.add_parser("deform", help="push a chain onto the coarse grid: A = P + R + dS")
    common(sp)
    sp.add_argument("--rho", type=int, required=True, help="coarse grid factor")
    sp.add_argument("--trials", type=int, default=16, help="random offsets tried")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--h", type=Path, help="cost function JSON (adds the h-mass ratio)")
    sp.set_defaults(func=cmd_deform)

    sp = sub.add_parser("isoperim", help="check F(A) <= eta(M(A)) (M_h(A) + N(A))")
    common(sp)
    sp.add_argument("--h", type=Path, help="cost function JSON (default: built from the chain)")
    sp.add_argument("--c", type=float, default=1.0, help="deformation constant")
    sp.add_argument("--margin", type=int, help="filler box margin in cells")
    sp.set_defaults(func=cmd_isoperim)

    sp = sub.add_parser("make-h", help="build a concave cost function from sample magnitudes")
    sp.add_argument("--samples", type=Path, required=True, help="CSV of value[,weight]")
    sp.add_argument("--out", dest="h_out", type=Path, help="write the cost function JSON here")
    sp.add_argument("--report", dest="out", type=Path, help="write the JSON report here instead of stdout")
    sp.add_argument("--plot", type=Path, help="also render h(s) and h(s)/s to this file")
    sp.add_argument("--depth", type=int, default=64, help="number of dyadic bands")
    sp.set_defaults(func=cmd_make_h)

    sp = sub.add_parser("coarea-check", help="exact total variation vs sliced perimeters")
    common(sp, chain=False)
    sp.add_argument("--raster", type=Path, required=True, help="CSV raster")
    sp.set_defaults(func=cmd_coarea_check)

    sp = sub.add_parser("bv-decompose", help="finest tv-additive partition of a raster")
    common(sp, chain=False, plot=True)
    sp.add_argument("--raster", type=Path, required=True, help="CSV raster")
    sp.add_argument("--labels", type=Path, help="write the block label map as CSV")
    sp.set_defaults(func=cmd_bv_decompose)

    sp = sub.add_parser("selftest", help="run built-in fixture checks")
    common(sp, chain=False)
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search node budget")
    sp.set_defaults(func=cmd_selftest)
    return p


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = Config.from_args(args)
        report = args.func(args, cfg)
    except CheckFailed as exc:
        _emit(exc.report, cfg)
        return EXIT_FAIL
    except (BudgetExhausted, SearchTooLarge, ResourceError) as exc:
        print(f"flatchain: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputFileError, ConfigError, DegreeError, DomainError, bv.DomainError,
            FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"flatchain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(report, cfg)
    return EXIT_OK


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
