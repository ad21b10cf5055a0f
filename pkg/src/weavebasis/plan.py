"""Sub-block partitions, the block-diagonal rotation, DoC and gate accounting.

Operator positions (``O_1 .. O_N``) and partition offsets are 1-based, as
they label physical operators.  A rotated Hamiltonian is obtained by the
substitution ``Q_old = W @ Q_new``: local term ``k`` then reads
``f[sum_j W[k, j] Q_j]`` and the global argument collapses onto the column
sums of ``W``, which are nonzero only at the block leaders.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .sparse import SparseRowMatrix, block_diag
from .weaved import row_sparsity, weave_general

INFINITE = math.inf

# Counts past this are serialized as (mantissa, base-2 exponent).
BIG_COUNT = 2 ** 63


@dataclass(frozen=True)
class Partition:
    block_dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "block_dims", tuple(int(d) for d in self.block_dims))
        if not self.block_dims:
            raise ValueError("partition needs at least one block")
        if any(d < 1 for d in self.block_dims):
            raise ValueError(f"block dims must be positive, got {self.block_dims}")

    @property
    def total(self) -> int:
        return sum(self.block_dims)

    @property
    def n_subblocks(self) -> int:
        return len(self.block_dims)

    @property
    def offsets(self) -> tuple[int, ...]:
        """1-based start position of every block."""
        out, acc = [], 1
        for d in self.block_dims:
            out.append(acc)
            acc += d
        return tuple(out)

    @property
    def balanced(self) -> bool:
        return max(self.block_dims) - min(self.block_dims) <= 1


def _split(n: int, parts: int) -> tuple[int, ...]:
    q, r = divmod(n, parts)
    return tuple(q + 1 if i < r else q for i in range(parts))


def choose_partition(n: int, n_subblocks: Optional[int] = None) -> Partition:
    """Split ``n`` operators into about ``log2(n)`` near-equal blocks, larger first."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if n_subblocks is None:
        # round(log2 n), exact halves go down
        n_subblocks = max(1, math.ceil(math.log2(n) - 0.5))
    if not 1 <= n_subblocks <= n:
        raise ValueError(f"need 1 <= subblocks <= {n}, got {n_subblocks}")
    return Partition(_split(n, n_subblocks))


def assemble_rotation(p: Partition) -> SparseRowMatrix:
    return block_diag([weave_general(d) for d in p.block_dims])


def rotated_global_argument(p: Partition) -> list[tuple[int, float]]:
    """Support of the rotated global argument: ``(D_i, sqrt(d_i))`` per block."""
    return [(off, math.sqrt(d)) for off, d in zip(p.offsets, p.block_dims)]


def rotated_local_terms(p: Partition, rotation: SparseRowMatrix) -> list[list[tuple[int, float]]]:
    """Argument of each rotated local term as ``(position, coefficient)`` pairs."""
    if rotation.dim != p.total:
        raise ValueError(f"rotation dim {rotation.dim} != partition total {p.total}")
    return [[(c + 1, v) for c, v in row] for row in rotation.rows]


@dataclass(frozen=True)
class HamiltonianShape:
    """Degrees of the four function families and register width.

    ``f``/``g`` act on single operators, ``F``/``G`` on the sum of all of
    them.  Degrees are positive integers or ``INFINITE`` for non-polynomial
    functions.
    """

    n_ops: int
    deg_f: float = INFINITE
    deg_g: float = INFINITE
    deg_F: float = INFINITE
    deg_G: float = INFINITE
    n_q: int = 1

    def __post_init__(self):
        if self.n_ops < 1:
            raise ValueError("n_ops must be >= 1")
        if self.n_q < 1:
            raise ValueError("n_q must be >= 1")
        for name in ("deg_f", "deg_g", "deg_F", "deg_G"):
            d = getattr(self, name)
            if not (d == INFINITE or (float(d).is_integer() and d >= 1)):
                raise ValueError(f"{name} must be a positive integer or INFINITE, got {d}")


def _doc(n_ops: int, degree: float) -> int:
    return int(min(n_ops, degree))


@dataclass(frozen=True)
class DoCReport:
    doc_original: int
    doc_rotated: Optional[int]
    max_phi: int
    n_subblocks: int
    per_term: dict = field(default_factory=dict)


def _row_phis(rotation: SparseRowMatrix) -> list[int]:
    return [row_sparsity(rotation, j) for j in range(1, rotation.dim + 1)]


def doc_of_shape(shape: HamiltonianShape, p: Optional[Partition] = None) -> DoCReport:
    n = shape.n_ops
    original = {
        "f": _doc(1, shape.deg_f), "g": _doc(1, shape.deg_g),
        "F": _doc(n, shape.deg_F), "G": _doc(n, shape.deg_G),
    }
    doc_original = max(original.values())
    if p is None:
        return DoCReport(doc_original, None, 1, 1, {"original": original})
    if p.total != n:
        raise ValueError(f"partition covers {p.total} operators, shape has {n}")
    max_phi = max(_row_phis(assemble_rotation(p)))
    rotated = {
        "f": _doc(max_phi, shape.deg_f), "g": _doc(max_phi, shape.deg_g),
        "F": _doc(p.n_subblocks, shape.deg_F), "G": _doc(p.n_subblocks, shape.deg_G),
    }
    return DoCReport(doc_original, max(rotated.values()), max_phi, p.n_subblocks,
                     {"original": original, "rotated": rotated})


def gates_for_diagonal(n_q: int) -> int:
    """Gate count of an arbitrary diagonal unitary on ``n_q`` qubits, no ancillas."""
    if n_q < 1:
        raise ValueError("n_q must be >= 1")
    return 2 ** (n_q + 1) - 3


def term_gates(degree: float, n_args: int, n_q: int) -> int:
    """Cost of one term whose argument couples ``n_args`` operators."""
    if degree == INFINITE:
        return gates_for_diagonal(n_q * n_args)
    return n_q ** int(degree)


@dataclass(frozen=True)
class GateCostReport:
    basis: str
    local_terms_gates: int
    global_term_gates: int
    extrapolated: bool = False
    per_term: dict = field(default_factory=dict)

    @property
    def total_gates(self) -> int:
        return self.local_terms_gates + self.global_term_gates

    def to_dict(self) -> dict:
        return {
            "basis": self.basis,
            "local": encode_count(self.local_terms_gates),
            "global": encode_count(self.global_term_gates),
            "total": encode_count(self.total_gates),
            "log10_total": log10_count(self.total_gates),
            "extrapolated": self.extrapolated,
            "per_term": {k: encode_count(v) for k, v in sorted(self.per_term.items())},
        }


def encode_count(n: int):
    """Exact ``int`` below 2**63, else ``{"mantissa", "exp2"}`` with mantissa in [1, 2)."""
    if n < BIG_COUNT:
        return n
    e = n.bit_length() - 1
    return {"mantissa": n / (1 << e), "exp2": e}


def log10_count(n: int) -> float:
    if n <= 0:
        return -math.inf
    e = max(n.bit_length() - 53, 0)
    return math.log10(n >> e) + e * math.log10(2)


def magnitude_class(n: int) -> int:
    return math.floor(log10_count(n))


def gate_cost(shape: HamiltonianShape, p: Optional[Partition] = None) -> GateCostReport:
    """Deterministic gate counts with the diagonal-gate formula as unit cost.

    Without a partition the original basis is costed; with one, the weaved
    basis.
    """
    n, nq = shape.n_ops, shape.n_q
    if p is None:
        terms = {
            "f": n * term_gates(shape.deg_f, 1, nq),
            "g": n * term_gates(shape.deg_g, 1, nq),
            "F": term_gates(shape.deg_F, _doc(n, shape.deg_F), nq),
            "G": term_gates(shape.deg_G, _doc(n, shape.deg_G), nq),
        }
        return GateCostReport("ORIGINAL", terms["f"] + terms["g"], terms["F"] + terms["G"],
                              per_term=terms)
    if p.total != n:
        raise ValueError(f"partition covers {p.total} operators, shape has {n}")
    phis = _row_phis(assemble_rotation(p))
    ns = p.n_subblocks
    terms = {
        "f": sum(term_gates(shape.deg_f, _doc(phi, shape.deg_f), nq) for phi in phis),
        "g": sum(term_gates(shape.deg_g, _doc(phi, shape.deg_g), nq) for phi in phis),
        "F": term_gates(shape.deg_F, _doc(ns, shape.deg_F), nq),
        "G": term_gates(shape.deg_G, _doc(ns, shape.deg_G), nq),
    }
    return GateCostReport("WEAVED", terms["f"] + terms["g"], terms["F"] + terms["G"],
                          extrapolated=not p.balanced, per_term=terms)


def _term_supports(shape: HamiltonianShape, p: Optional[Partition]) -> list[list[int]]:
    """Operator sets that share a term (only terms of degree >= 2 couple)."""
    n = shape.n_ops
    couples_local = max(shape.deg_f, shape.deg_g) >= 2
    couples_global = max(shape.deg_F, shape.deg_G) >= 2
    if p is None:
        return [list(range(1, n + 1))] if couples_global and n > 1 else []
    supports = []
    if couples_local:
        rot = assemble_rotation(p)
        supports += [[pos for pos, _ in row] for row in rotated_local_terms(p, rot)]
    if couples_global:
        supports.append([pos for pos, _ in rotated_global_argument(p)])
    return supports


def coupling_edges(shape: HamiltonianShape, p: Optional[Partition] = None) -> list[tuple[int, int]]:
    edges = set()
    for support in _term_supports(shape, p):
        for a in support:
            for b in support:
                if a < b:
                    edges.add((a, b))
    return sorted(edges)


def coupling_graph(shape: HamiltonianShape, p: Optional[Partition] = None,
                   name: str = "coupling") -> str:
    """Undirected DOT graph: nodes are operators, edges join operators sharing a term."""
    lines = [f"graph {name} {{"]
    for i in range(1, shape.n_ops + 1):
        lines.append(f'  {i} [label="O{i}"];')
    for a, b in coupling_edges(shape, p):
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def plan_report(shape: HamiltonianShape, p: Optional[Partition] = None) -> dict:
    """JSON-ready summary of DoC and gate costs in both bases."""
    p = p if p is not None else choose_partition(shape.n_ops)
    doc = doc_of_shape(shape, p)
    return {
        "n": shape.n_ops,
        "n_q": shape.n_q,
        "partition": list(p.block_dims),
        "doc": {"original": doc.doc_original, "rotated": doc.doc_rotated},
        "max_phi": doc.max_phi,
        "gates": {
            "original": gate_cost(shape).to_dict(),
            "weaved": gate_cost(shape, p).to_dict(),
        },
    }


def degree_label(d: float):
    return "inf" if d == INFINITE else int(d)


def parse_degree(text: str) -> float:
    if text.strip().lower() in ("inf", "infinite", "infinity"):
        return INFINITE
    d = int(text)
    if d < 1:
        raise ValueError(f"degree must be >= 1, got {d}")
    return d

