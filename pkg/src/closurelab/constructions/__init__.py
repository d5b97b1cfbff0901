"""Executable lower-bound structures, each with an analytic oracle."""
from .bipartite import (
    BipartiteEdges,
    BipartiteStructure,
    DegreeOracle,
    build_bipartite_pair,
    decode_chain_indexing,
    degree_graph,
    psi_formula,
    table_diff,
    zero_input_graph,
)
from .chain_graph import ChainInventory, ChainRecord, build_chain_graph, decode_parities, nth_prime, prime_power
from .path_witness import PathWitnessStructure, WitnessOracle, build_path_witness, gamma_formula
from .sorted_halting import SortSizeOracle, build_sorted_halting, sorted_halting_signature, xi_formulas
from .sources import EnumerationSource, TuringMachine

__all__ = [
    "BipartiteEdges",
    "BipartiteStructure",
    "ChainInventory",
    "ChainRecord",
    "DegreeOracle",
    "EnumerationSource",
    "PathWitnessStructure",
    "SortSizeOracle",
    "TuringMachine",
    "WitnessOracle",
    "build_bipartite_pair",
    "build_chain_graph",
    "build_path_witness",
    "build_sorted_halting",
    "decode_chain_indexing",
    "decode_parities",
    "degree_graph",
    "gamma_formula",
    "nth_prime",
    "prime_power",
    "psi_formula",
    "sorted_halting_signature",
    "table_diff",
    "xi_formulas",
    "zero_input_graph",
]
