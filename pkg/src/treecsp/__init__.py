"""Core orientations of trees and polymorphism tests for their CSPs."""

from .conditions import LinearCondition, builtin, parse_condition
from .consistency import arc_consistency, backend, compiled_available, find_homomorphism, use_backend
from .cores import core_of, is_core, is_core_tree, is_rooted_core
from .digraph import (
    Digraph,
    RootedTree,
    TreeDigraph,
    canonical_encoding,
    load_digraph,
    parse_canonical,
    reverse,
)
from .generation import generate_core_trees, generate_core_triads, generate_rooted_cores
from .indicator import Decision, Witness, check_total_symmetry_all, decide, verify_witness
from .pipeline import default_cascade, run_campaign

__version__ = "0.1.0"

__all__ = [
    "Decision", "Digraph", "LinearCondition", "RootedTree", "TreeDigraph", "Witness",
    "arc_consistency", "backend", "builtin", "canonical_encoding", "check_total_symmetry_all",
    "compiled_available", "core_of", "decide", "default_cascade", "find_homomorphism",
    "generate_core_trees", "generate_core_triads", "generate_rooted_cores", "is_core",
    "is_core_tree", "is_rooted_core", "load_digraph", "parse_canonical", "parse_condition",
    "reverse", "run_campaign", "use_backend", "verify_witness",
]
