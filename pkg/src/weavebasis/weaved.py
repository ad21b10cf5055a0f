"""Weaved orthogonal matrices.

A weaved matrix ``W_M`` is an ``M x M`` orthogonal matrix whose first column
is uniformly ``1/sqrt(M)`` and whose rows carry at most ``ceil(log2 M) + 1``
nonzeros.  Powers of two are built by weaving two copies of the half-size
matrix with a pi/4 plane rotation; any other ``M`` stacks the power-of-two
blocks given by its set bits and mixes their first columns with a chain of
plane rotations.

Index conventions: ``givens`` and ``row_sparsity`` take 1-based labels,
matching the usual ``T^{(i,j)}_M`` notation.  Everything else is 0-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .sparse import DROP_TOL, SparseRowMatrix

_SQRT_HALF = math.sqrt(0.5)


@dataclass
class CostLedger:
    """Scalar multiplications performed while building a matrix."""

    multiplications: int = 0

    def add(self, n: int) -> None:
        self.multiplications += n

    def reset(self) -> None:
        self.multiplications = 0


@dataclass(frozen=True)
class WeaveRecipe:
    """Binary decomposition of ``M`` used to assemble ``W_M``.

    ``bit_positions`` are the set-bit positions of ``M`` in ascending order and
    ``partial_sums[j-1]`` is ``b_j = sum_{i<=j} 2**bit_positions[i-1]``, so the
    last partial sum equals ``M``.
    """

    target_dim: int
    bit_positions: tuple[int, ...]
    partial_sums: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.bit_positions)

    @cached_property
    def rotations(self) -> tuple[tuple[float, float], ...]:
        """``(cos theta_j, sin theta_j)`` for ``j = 1..k-1``."""
        return tuple(_cos_sin(self, j) for j in range(1, self.k))

    @property
    def angles(self) -> tuple[float, ...]:
        return tuple(weave_angle(self, j) for j in range(1, self.k))


def givens(i: int, j: int, theta: float, dim: int) -> SparseRowMatrix:
    """Plane rotation ``T^{(i,j)}_dim(theta)`` with 1-based ``i < j``."""
    if not (1 <= i < j <= dim):
        raise ValueError(f"need 1 <= i < j <= dim, got i={i}, j={j}, dim={dim}")
    c, s = math.cos(theta), math.sin(theta)
    i0, j0 = i - 1, j - 1
    entries = [(r, r, 1.0) for r in range(dim) if r not in (i0, j0)]
    entries += [(i0, i0, c), (i0, j0, -s), (j0, i0, s), (j0, j0, c)]
    return SparseRowMatrix.from_entries(dim, entries, drop_tol=0.0)


def binary_positions(M: int) -> WeaveRecipe:
    if M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    bits = tuple(i for i in range(M.bit_length()) if (M >> i) & 1)
    sums, acc = [], 0
    for b in bits:
        acc += 1 << b
        sums.append(acc)
    return WeaveRecipe(M, bits, tuple(sums))


def _cos_sin(recipe: WeaveRecipe, j: int) -> tuple[float, float]:
    if not (1 <= j <= recipe.k - 1):
        raise ValueError(f"angle index j={j} outside 1..{recipe.k - 1}")
    b_j = recipe.partial_sums[j - 1]
    grow = 1 << recipe.bit_positions[j]
    c = (1.0 + grow / b_j) ** -0.5
    # sin from the same closed form; avoids cancellation in sqrt(1 - c**2)
    s = math.sqrt(grow / (b_j + grow))
    return c, s


def weave_angle(recipe: WeaveRecipe, j: int) -> float:
    """Rotation angle ``theta_j`` (radians, in ``(0, pi/2)``) for 1-based ``j``."""
    c, _ = _cos_sin(recipe, j)
    return math.acos(c)


def _weave(blocks: Sequence[SparseRowMatrix], rotations: Sequence[tuple[int, float, float]],
           ledger: CostLedger) -> SparseRowMatrix:
    """Right-multiply ``blockdiag(blocks)`` by a chain of plane rotations.

    Every rotation mixes column 0 with column ``col`` (0-based), so it is done
    as a column-pair update.  Entries of all other columns pass through the
    unit diagonal of the rotations; each is charged one multiplication.
    """
    dim = sum(b.dim for b in blocks)
    cols: list[dict[int, float]] = [dict() for _ in range(dim)]
    mixed = {0} | {col for col, _, _ in rotations}
    off = 0
    copied = 0
    for b in blocks:
        for r, c, v in b.entries():
            gc = c + off
            if gc in mixed:
                cols[gc][r + off] = v
            else:
                cols[gc][r + off] = v * 1.0
                copied += 1
        off += b.dim
    ledger.add(copied)

    for col, c, s in rotations:
        left, right = cols[0], cols[col]
        new_left: dict[int, float] = {}
        new_right: dict[int, float] = {}
        for r, v in left.items():
            new_left[r] = c * v
            new_right[r] = -s * v
        for r, v in right.items():
            new_left[r] = new_left.get(r, 0.0) + s * v
            new_right[r] = new_right.get(r, 0.0) + c * v
        ledger.add(2 * (len(left) + len(right)))
        cols[0] = {r: v for r, v in new_left.items() if abs(v) > DROP_TOL}
        cols[col] = {r: v for r, v in new_right.items() if abs(v) > DROP_TOL}

    return SparseRowMatrix.from_columns(dim, cols)


def _pow2_ladder(m: int, ledger: CostLedger) -> list[SparseRowMatrix]:
    """``[W_1, W_2, ..., W_{2^m}]`` built bottom-up."""
    ladder = [SparseRowMatrix(1, (((0, 1.0),),))]
    for level in range(1, m + 1):
        half = ladder[-1]
        ladder.append(_weave([half, half], [(half.dim, _SQRT_HALF, _SQRT_HALF)], ledger))
    return ladder


def weave_pow2(m: int, ledger: CostLedger | None = None) -> SparseRowMatrix:
    """``W_{2^m}``; the ledger is charged ``m * 2**(m+1)`` multiplications."""
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    return _pow2_ladder(m, ledger if ledger is not None else CostLedger())[-1]


def weave_general(M: int, ledger: CostLedger | None = None) -> SparseRowMatrix:
    """Weaved orthogonal matrix ``W_M`` for any positive integer ``M``."""
    if M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    ledger = ledger if ledger is not None else CostLedger()
    recipe = binary_positions(M)
    if recipe.k == 1:
        return weave_pow2(recipe.bit_positions[0], ledger)
    ladder = _pow2_ladder(recipe.bit_positions[-1], ledger)
    blocks = [ladder[b] for b in recipe.bit_positions]
    rotations = [(recipe.partial_sums[j - 1], c, s)
                 for j, (c, s) in enumerate(recipe.rotations, start=1)]
    return _weave(blocks, rotations, ledger)


def row_sparsity(m: SparseRowMatrix, j: int) -> int:
    """Number of nonzeros in 1-based row ``j``."""
    if not 1 <= j <= m.dim:
        raise ValueError(f"row {j} outside 1..{m.dim}")
    return sum(1 for _, v in m.rows[j - 1] if v != 0.0)


def sparsity(m: SparseRowMatrix) -> int:
    """Largest number of nonzeros in any row."""
    return max(row_sparsity(m, j) for j in range(1, m.dim + 1))


@dataclass(frozen=True)
class WeaveCheck:
    orthogonal: bool
    uniform_first_column: bool
    column_sums_ok: bool
    max_orthogonality_error: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return self.orthogonal and self.uniform_first_column and self.column_sums_ok


def verify_weaved(m: SparseRowMatrix, tol: float = 1e-12) -> WeaveCheck:
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = m.to_dense()
    n = m.dim
    err = float(np.max(np.abs(a @ a.T - np.eye(n))))
    first = bool(np.all(np.abs(a[:, 0] - 1.0 / math.sqrt(n)) <= tol))
    target = np.zeros(n)
    target[0] = math.sqrt(n)
    sums = bool(np.all(np.abs(a.sum(axis=0) - target) <= tol))
    return WeaveCheck(err <= tol, first, sums, err)
