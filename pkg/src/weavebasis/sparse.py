"""Row-indexed sparse real square matrices and their coordinate text format.

Rows and columns are stored 0-based.  The coordinate format on disk is
1-based: a header line ``dim nnz`` followed by one ``row col value`` line per
stored entry, values printed with 17 significant digits.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Entries whose magnitude falls below this after arithmetic are dropped.
DROP_TOL = 1e-15


@dataclass(frozen=True)
class SparseRowMatrix:
    """A ``dim x dim`` real matrix stored as per-row ``(col, value)`` tuples.

    Columns within a row are strictly increasing and no stored value is zero.
    """

    dim: int
    rows: tuple[tuple[tuple[int, float], ...], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if len(self.rows) != self.dim:
            raise ValueError(f"expected {self.dim} rows, got {len(self.rows)}")
        for r, row in enumerate(self.rows):
            prev = -1
            for c, v in row:
                if not 0 <= c < self.dim:
                    raise ValueError(f"column {c} out of range in row {r}")
                if c <= prev:
                    raise ValueError(f"columns not strictly increasing in row {r}")
                if v == 0.0:
                    raise ValueError(f"stored zero at ({r}, {c})")
                prev = c

    @classmethod
    def from_entries(cls, dim: int, entries: Iterable[tuple[int, int, float]],
                     drop_tol: float = DROP_TOL) -> "SparseRowMatrix":
        """Build from 0-based ``(row, col, value)`` triples; duplicates are summed."""
        acc: list[dict[int, float]] = [dict() for _ in range(dim)]
        for r, c, v in entries:
            acc[r][c] = acc[r].get(c, 0.0) + float(v)
        rows = tuple(
            tuple((c, v) for c, v in sorted(row.items()) if abs(v) > drop_tol)
            for row in acc
        )
        return cls(dim, rows)

    @classmethod
    def from_columns(cls, dim: int, columns: Sequence[dict[int, float]],
                     drop_tol: float = DROP_TOL) -> "SparseRowMatrix":
        """Build from a list of ``{row: value}`` column maps."""
        return cls.from_entries(
            dim, ((r, c, v) for c, col in enumerate(columns) for r, v in col.items()),
            drop_tol=drop_tol)

    @classmethod
    def from_dense(cls, a, drop_tol: float = 0.0) -> "SparseRowMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        rows = tuple(
            tuple((int(c), float(a[r, c])) for c in np.flatnonzero(np.abs(a[r]) > drop_tol))
            for r in range(a.shape[0])
        )
        return cls(a.shape[0], rows)

    @classmethod
    def identity(cls, dim: int) -> "SparseRowMatrix":
        return cls(dim, tuple(((r, 1.0),) for r in range(dim)))

    @property
    def nnz(self) -> int:
        return sum(len(row) for row in self.rows)

    def entries(self):
        """Yield 0-based ``(row, col, value)`` triples in row-major order."""
        for r, row in enumerate(self.rows):
            for c, v in row:
                yield r, c, v

    def get(self, r: int, c: int) -> float:
        for cc, v in self.rows[r]:
            if cc == c:
                return v
        return 0.0

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        for r, c, v in self.entries():
            out[r, c] = v
        return out

    def columns(self) -> list[dict[int, float]]:
        cols: list[dict[int, float]] = [dict() for _ in range(self.dim)]
        for r, c, v in self.entries():
            cols[c][r] = v
        return cols

    def transpose(self) -> "SparseRowMatrix":
        return SparseRowMatrix.from_entries(self.dim, ((c, r, v) for r, c, v in self.entries()))

    def __matmul__(self, other):
        if isinstance(other, SparseRowMatrix):
            return self.to_dense() @ other.to_dense()
        return self.to_dense() @ np.asarray(other)


def block_diag(blocks: Sequence[SparseRowMatrix]) -> SparseRowMatrix:
    """Place ``blocks`` along the diagonal of a larger matrix."""
    dim = sum(b.dim for b in blocks)
    rows: list[tuple[tuple[int, float], ...]] = []
    off = 0
    for b in blocks:
        rows.extend(tuple((c + off, v) for c, v in row) for row in b.rows)
        off += b.dim
    return SparseRowMatrix(dim, tuple(rows))


def format_coordinate(m: SparseRowMatrix) -> str:
    lines = [f"{m.dim} {m.nnz}"]
    lines.extend(f"{r + 1} {c + 1} {v:.17g}" for r, c, v in m.entries())
    return "\n".join(lines) + "\n"


def write_coordinate(m: SparseRowMatrix, dest) -> None:
    """Write ``m`` to a path or text stream in coordinate format."""
    text = format_coordinate(m)
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w") as fh:
            fh.write(text)
    else:
        dest.write(text)


def parse_coordinate(text: str) -> SparseRowMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty coordinate file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"bad header line: {lines[0]!r}")
    dim, nnz = int(header[0]), int(header[1])
    body = lines[1:]
    if len(body) != nnz:
        raise ValueError(f"header declares {nnz} entries, found {len(body)}")
    entries = []
    for ln in body:
        r, c, v = ln.split()
        r, c = int(r), int(c)
        if not (1 <= r <= dim and 1 <= c <= dim):
            raise ValueError(f"index out of range in line {ln!r}")
        entries.append((r - 1, c - 1, float(v)))
    return SparseRowMatrix.from_entries(dim, entries, drop_tol=0.0)


def read_coordinate(src) -> SparseRowMatrix:
    """Read a matrix from a path or text stream in coordinate format."""
    if isinstance(src, (str, os.PathLike)):
        with open(src) as fh:
            return parse_coordinate(fh.read())
    if isinstance(src, io.TextIOBase) or hasattr(src, "read"):
        return parse_coordinate(src.read())
    raise TypeError(f"cannot read coordinate matrix from {type(src).__name__}")
