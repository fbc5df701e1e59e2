"""Lattice flat chains: decompositions, flat norm, deformation and the BV coarea picture."""

from .groups import INTEGER, REAL, REAL_TOL, ConfigError, ModGroup, VectorGroup, get_group
from .chain import (Cell, Chain, DegreeError, boundary, chain_to_raster, h_mass, make_cell, mass,
                    normal_mass, raster_to_chain, restrict, support)
from .cost import (BAND_CONSTANT, BandMasses, CostFunction, PowerCost, band_masses, construct_h,
                   eta, eta_star, eta_tilde, eval_h, load_cost, save_cost)
from .flatnorm import FlatNormCertificate, ResourceError, flat_norm
from .deform import DeformationResult, deform, deform_best
from .decompose import (AtomReport, BudgetExhausted, Decomposition, decompose_by_extraction,
                        decompose_lex, extract_atom, is_indecomposable, is_set_decomposition,
                        maximal_decomposition, q_value)
from .bv import (coarea_check, finest_partition, level_set, m_connected_components, perimeter,
                 same_sign_components, tv)
from .isoperimetric import calibrate_constant, isoperimetric_report
from .io import parse_chain_file, parse_raster, write_chain_file, write_report

__version__ = "0.1.0"
