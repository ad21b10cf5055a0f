"""Dual-basis compact U(1) gauge theory on a periodic ``nx x ny`` lattice.

Plaquettes are indexed row-major, ``p = y * nx + x``, and the last one is
eliminated by the magnetic Gauss law, leaving ``N_p = nx * ny - 1``
independent plaquette operators.  Links are oriented along +x and +y; link
``2 * (y * nx + x)`` is the x-link leaving site ``(x, y)`` and ``+ 1`` the
y-link.  A plaquette contributes +1 to its bottom and left links and -1 to
its top and right links.

The electric energy is ``g^2/(2a) * R^T A R`` with ``A = C^T C`` (sum over
links of the squared lattice curl of the rotors).  The magnetic energy is
``-1/(2 a g^2) * (sum_p cos B_p + cos(sum_p B_p))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .plan import (
    INFINITE, HamiltonianShape, Partition, assemble_rotation, choose_partition,
    doc_of_shape, gate_cost, log10_count, magnitude_class, rotated_global_argument,
    rotated_local_terms,
)
from .sparse import SparseRowMatrix

# Off-diagonal entries of the rotated electric matrix below this are zero.
ELECTRIC_ZERO = 1e-12


@dataclass(frozen=True)
class LatticeGeometry:
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"lattice needs nx, ny >= 2, got {self.nx}x{self.ny}")

    @property
    def n_links(self) -> int:
        return 2 * self.nx * self.ny

    @property
    def n_plaquettes(self) -> int:
        """Independent plaquettes after the magnetic Gauss law."""
        return self.nx * self.ny - 1

    def plaquette_index(self, x: int, y: int) -> int:
        return (y % self.ny) * self.nx + (x % self.nx)

    def xlink(self, x: int, y: int) -> int:
        return 2 * self.plaquette_index(x, y)

    def ylink(self, x: int, y: int) -> int:
        return 2 * self.plaquette_index(x, y) + 1


@dataclass(frozen=True)
class ModelParams:
    g: float = 1.0
    a: float = 1.0
    n_q: int = 2

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError("coupling g must be positive")
        if not self.a > 0:
            raise ValueError("lattice spacing a must be positive")
        if self.n_q < 1:
            raise ValueError("n_q must be >= 1")


@dataclass(frozen=True)
class ElectricForm:
    matrix: np.ndarray
    prefactor: float

    def energy(self, r) -> float:
        r = np.asarray(r, dtype=float)
        return float(self.prefactor * r @ self.matrix @ r)


@dataclass(frozen=True)
class MagneticTerms:
    local_args: list
    global_arg: list
    prefactor: float

    @property
    def n_ops(self) -> int:
        return len(self.local_args)


@dataclass(frozen=True)
class U1Model:
    geometry: LatticeGeometry
    params: ModelParams
    electric: ElectricForm
    magnetic: MagneticTerms

    @property
    def n_plaquettes(self) -> int:
        return self.geometry.n_plaquettes


def build_curl_incidence(geo: LatticeGeometry) -> np.ndarray:
    """Links x independent-plaquettes incidence matrix of the lattice curl."""
    full = np.zeros((geo.n_links, geo.nx * geo.ny))
    for y in range(geo.ny):
        for x in range(geo.nx):
            p = geo.plaquette_index(x, y)
            full[geo.xlink(x, y), p] += 1.0       # bottom
            full[geo.ylink(x, y), p] += 1.0       # left
            full[geo.xlink(x, y + 1), p] -= 1.0   # top
            full[geo.ylink(x + 1, y), p] -= 1.0   # right
    return full[:, : geo.n_plaquettes]


def electric_form(geo: LatticeGeometry, params: ModelParams) -> ElectricForm:
    c = build_curl_incidence(geo)
    return ElectricForm(c.T @ c, params.g ** 2 / (2.0 * params.a))


def magnetic_terms(geo: LatticeGeometry, params: ModelParams) -> MagneticTerms:
    n = geo.n_plaquettes
    return MagneticTerms(
        local_args=[[(p, 1.0)] for p in range(1, n + 1)],
        global_arg=[(p, 1.0) for p in range(1, n + 1)],
        prefactor=-1.0 / (2.0 * params.a * params.g ** 2),
    )


def build_model(geo: LatticeGeometry, params: ModelParams) -> U1Model:
    return U1Model(geo, params, electric_form(geo, params), magnetic_terms(geo, params))


def u1_shape(geo: LatticeGeometry, params: ModelParams) -> HamiltonianShape:
    """cos for the local and global magnetic terms, quadratic for the electric ones."""
    return HamiltonianShape(geo.n_plaquettes, deg_f=INFINITE, deg_g=2,
                            deg_F=INFINITE, deg_G=2, n_q=params.n_q)


@dataclass(frozen=True)
class RotatedModel:
    partition: Partition
    rotation: SparseRowMatrix
    electric_matrix: np.ndarray
    electric_prefactor: float
    local_args: list
    global_arg: list
    magnetic_prefactor: float

    @property
    def electric_nnz(self) -> int:
        return int(np.count_nonzero(np.abs(self.electric_matrix) > ELECTRIC_ZERO))


def rotate_model(electric: ElectricForm, magnetic: MagneticTerms, p: Partition) -> RotatedModel:
    """Express the model in the weaved operator basis ``R_old = W R_new``.

    Both conjugate families rotate with the same orthogonal ``W``, so the
    electric matrix becomes ``W^T A W``.
    """
    n = electric.matrix.shape[0]
    if magnetic.n_ops != n or p.total != n:
        raise ValueError(
            f"dimension mismatch: electric {n}, magnetic {magnetic.n_ops}, partition {p.total}")
    w = assemble_rotation(p)
    wd = w.to_dense()
    a_rot = wd.T @ electric.matrix @ wd
    a_rot = 0.5 * (a_rot + a_rot.T)
    a_rot[np.abs(a_rot) <= ELECTRIC_ZERO] = 0.0
    return RotatedModel(
        partition=p,
        rotation=w,
        electric_matrix=a_rot,
        electric_prefactor=electric.prefactor,
        local_args=rotated_local_terms(p, w),
        global_arg=rotated_global_argument(p),
        magnetic_prefactor=magnetic.prefactor,
    )


def bilinear_terms(a: np.ndarray, tol: float = ELECTRIC_ZERO) -> int:
    """Distinct ``R_i R_j`` monomials (``i <= j``) in ``R^T A R``."""
    return int(np.count_nonzero(np.abs(np.triu(a)) > tol))


def model_report(geo: LatticeGeometry, params: ModelParams,
                 p: Optional[Partition] = None) -> dict:
    """DoC, term counts and gate estimates in the original and weaved bases.

    Electric bilinears are costed at ``n_q**2`` gates each; magnetic terms use
    the diagonal-gate count on the registers their argument touches.
    """
    n_p = geo.n_plaquettes
    p = p if p is not None else choose_partition(n_p)
    model = build_model(geo, params)
    rot = rotate_model(model.electric, model.magnetic, p)
    shape = u1_shape(geo, params)
    doc = doc_of_shape(shape, p)
    unit = params.n_q ** 2

    costs = {}
    for basis, gates, a in (("original", gate_cost(shape), model.electric.matrix),
                            ("weaved", gate_cost(shape, p), rot.electric_matrix)):
        electric = bilinear_terms(a) * unit
        magnetic_local = gates.per_term["f"]
        magnetic_global = gates.per_term["F"]
        total = electric + magnetic_local + magnetic_global
        costs[basis] = {
            "electric": electric,
            "magnetic_local": magnetic_local,
            "magnetic_global": magnetic_global,
            "total": total,
            "log10_total": log10_count(total),
            "magnitude_class": magnitude_class(total),
            "magnetic_global_magnitude_class": magnitude_class(magnetic_global),
        }
    costs["weaved"]["extrapolated"] = not p.balanced

    return {
        "lattice": {"nx": geo.nx, "ny": geo.ny, "n_p": n_p},
        "params": {"g": params.g, "a": params.a, "n_q": params.n_q},
        "partition": list(p.block_dims),
        "doc": {"original": doc.doc_original, "rotated": doc.doc_rotated,
                "max_phi": doc.max_phi, "n_subblocks": doc.n_subblocks},
        "electric_terms": {"original": bilinear_terms(model.electric.matrix),
                           "weaved": bilinear_terms(rot.electric_matrix),
                           "bound": n_p ** 2},
        "rotated_global_argument": [[pos, coef] for pos, coef in rot.global_arg],
        "gates": costs,
    }
