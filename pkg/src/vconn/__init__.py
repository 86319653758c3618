"""Vertex-connectivity oracles built from element-connectivity Gomory-Hu trees."""

from __future__ import annotations

from .ghtree import GHTree, PartialEmbedding, approx_gh_tree, cut_threshold_step, k_gh_tree, verify_gh_tree
from .graph import CutSet, Graph, GraphFormatError, contract, gnp, parse_edge_list, sparsify, subdivide_terminal_edges
from .isolating import IsolatingCut, isolating_cuts
from .maxflow import element_connectivity, max_flow, min_vertex_cut, vertex_connectivity
from .oracle import AtLeastK, VConnOracle, build_oracle, deserialize, serialize, vconn, vcut
from .terminals import AffinePlaneFamily, build_family, next_prime, sets_for_pair

__all__ = [
    "AffinePlaneFamily",
    "AtLeastK",
    "CutSet",
    "GHTree",
    "Graph",
    "GraphFormatError",
    "IsolatingCut",
    "PartialEmbedding",
    "VConnOracle",
    "approx_gh_tree",
    "build_family",
    "build_oracle",
    "contract",
    "cut_threshold_step",
    "deserialize",
    "element_connectivity",
    "gnp",
    "isolating_cuts",
    "k_gh_tree",
    "max_flow",
    "min_vertex_cut",
    "next_prime",
    "parse_edge_list",
    "serialize",
    "sets_for_pair",
    "sparsify",
    "subdivide_terminal_edges",
    "vconn",
    "vcut",
    "verify_gh_tree",
    "vertex_connectivity",
]

__version__ = "0.1.0"
