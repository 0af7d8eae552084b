"""Relative train tracks, characteristic families and relative hyperbolicity
experiments for automorphisms of free groups."""

__version__ = "0.1.0"

from .words import Alphabet, Automorphism, CyclicWord, WordError, reduce, inverse, mul, orbit_lengths
from .subgroups import CoreGraph, build_core, contains, malnormal_report, fiber_product
from .graphmaps import Graph, GraphSelfMap, rose_map, verify_relative_tt
from .betatt import BetaComplex, build_beta_tt, verify_beta_properties
from .paths import classify, normalize, estimate_constants, check_quasi_geodesic
from .growth import classify_growth, characteristic_family, verify_family
from .relmetric import (rel_length, coned_ball, delta_and_fineness, mt_mul, mt_inv, mt_member,
                        MTElement, MTSubgroup)

__all__ = [
    "Alphabet", "Automorphism", "CyclicWord", "WordError", "reduce", "inverse", "mul", "orbit_lengths",
    "CoreGraph", "build_core", "contains", "malnormal_report", "fiber_product",
    "Graph", "GraphSelfMap", "rose_map", "verify_relative_tt",
    "BetaComplex", "build_beta_tt", "verify_beta_properties",
    "classify", "normalize", "estimate_constants", "check_quasi_geodesic",
    "classify_growth", "characteristic_family", "verify_family",
    "rel_length", "coned_ball", "delta_and_fineness", "mt_mul", "mt_inv", "mt_member",
    "MTElement", "MTSubgroup",
]
