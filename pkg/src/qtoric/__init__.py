"""Quaternionic toric manifolds from Delzant polytopes: exact combinatorics and flat-model numerics."""

from .errors import QtoricError
from .extend import (ActionTable, BasisMatrix, contains_forbidden_pattern, decide_extendability,
                     generic_stabilizer, homogeneity_rank, is_reduced_basis, synthesize_ghat_action,
                     synthesize_nhat_action, torus_stabilizer)
from .lattice import (IntMatrix, KernelLattice, enumerate_short_kernel_vectors, kernel_lattice,
                      projection_from_normals, smith_normal_form, surjective_onto_lattice)
from .polytope import (Facet, HRepPolytope, contains_point, enumerate_vertices, verify_delzant)

__all__ = [
    "ActionTable", "BasisMatrix", "Facet", "HRepPolytope", "IntMatrix", "KernelLattice",
    "QtoricError", "contains_forbidden_pattern", "contains_point", "decide_extendability",
    "enumerate_short_kernel_vectors", "enumerate_vertices", "generic_stabilizer",
    "homogeneity_rank", "is_reduced_basis", "kernel_lattice", "projection_from_normals",
    "smith_normal_form", "surjective_onto_lattice", "synthesize_ghat_action",
    "synthesize_nhat_action", "torus_stabilizer", "verify_delzant",
]
