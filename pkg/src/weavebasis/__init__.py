"""Weaved orthogonal operator-basis changes for globally constrained Hamiltonians."""
from .sparse import SparseRowMatrix, block_diag, read_coordinate, write_coordinate
from .weaved import (
    CostLedger, WeaveRecipe, binary_positions, givens, row_sparsity, sparsity,
    verify_weaved, weave_angle, weave_general, weave_pow2,
)
from .plan import (
    INFINITE, DoCReport, GateCostReport, HamiltonianShape, Partition, assemble_rotation,
    choose_partition, coupling_graph, doc_of_shape, gate_cost, gates_for_diagonal,
    rotated_global_argument, rotated_local_terms,
)
from .u1 import (
    ElectricForm, LatticeGeometry, MagneticTerms, ModelParams, U1Model, build_curl_incidence,
    build_model, electric_form, magnetic_terms, model_report, rotate_model,
)

__version__ = "0.1.0"
