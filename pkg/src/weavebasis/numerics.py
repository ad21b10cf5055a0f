"""Dense exact-diagonalization oracle for the digitized U(1) model.

Each plaquette operator lives on an ``n_q``-qubit register.  ``B`` is
diagonal with ``2**n_q`` equally spaced eigenvalues in ``[-b_max, b_max]``;
the rotor ``R`` is its Fourier conjugate.  The Fourier matrix is the centered
DFT ``F[j, k] = exp(2 pi i (j - c)(k - c) / n) / sqrt(n)`` with
``c = (n - 1) / 2``; it differs from the textbook DFT only by diagonal phases,
and with it every Hamiltonian assembled here is real symmetric.

Register 1 is the most significant factor of every Kronecker product.

Three assembly modes:

``ORIGINAL``
    ``H(B, R)`` from the model's terms.
``ROTATED_EXACT``
    Operators ``X = W^T Q`` built on the same Hilbert space and fed through
    the rotated term structure.  Since ``W X = Q`` this reproduces
    ``ORIGINAL`` to rounding error.
``ROTATED_REDIGITIZED``
    Every rotated operator gets a fresh register with its own digitization,
    so the spectrum differs from ``ORIGINAL`` by digitization effects.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .plan import Partition, choose_partition
from .u1 import RotatedModel, U1Model, rotate_model

ORIGINAL = "ORIGINAL"
ROTATED_EXACT = "ROTATED_EXACT"
ROTATED_REDIGITIZED = "ROTATED_REDIGITIZED"
MODES = (ORIGINAL, ROTATED_EXACT, ROTATED_REDIGITIZED)

WEAVED = "WEAVED"

# Dense assembly limit on n_q * N_p.
MAX_TOTAL_QUBITS = 14
HERMITIAN_TOL = 1e-8

# Range policy for fresh rotated registers; see redigitized_layout.
RANGE_POLICIES = ("argument", "register")
DEFAULT_POLICY = "argument"


class ResourceLimitError(RuntimeError):
    """Requested dense operator exceeds the feasibility cap."""


@dataclass(frozen=True)
class Digitization:
    """Equally spaced field eigenvalues and their Fourier-conjugate rotor values.

    By default ``b_max = pi (n - 1) / n`` so the grid is symmetric and open at
    ``+-pi``; ``r_max`` follows from ``db * dr * n = 2 pi``.
    """

    n_q: int
    b_max: Optional[float] = None
    r_max: Optional[float] = None

    def __post_init__(self):
        if self.n_q < 1:
            raise ValueError("n_q must be >= 1")
        n = 2 ** self.n_q
        if self.b_max is None:
            object.__setattr__(self, "b_max", math.pi * (n - 1) / n)
        if not 0 < self.b_max <= math.pi:
            raise ValueError(f"b_max must lie in (0, pi], got {self.b_max}")
        if self.r_max is None:
            dr = 2 * math.pi / (n * self.db)
            object.__setattr__(self, "r_max", dr * (n - 1) / 2)
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")

    @property
    def levels(self) -> int:
        return 2 ** self.n_q

    @property
    def db(self) -> float:
        return 2 * self.b_max / (self.levels - 1)

    @property
    def dr(self) -> float:
        return 2 * self.r_max / (self.levels - 1)

    @property
    def b_values(self) -> np.ndarray:
        return -self.b_max + self.db * np.arange(self.levels)

    @property
    def r_values(self) -> np.ndarray:
        return -self.r_max + self.dr * np.arange(self.levels)

    def scaled(self, factor: float) -> "Digitization":
        """Same register with the field range multiplied by ``factor``."""
        return Digitization(self.n_q, self.b_max * factor)


def fourier_matrix(n: int) -> np.ndarray:
    c = (n - 1) / 2
    j = np.arange(n) - c
    return np.exp(2j * np.pi * np.outer(j, j) / n) / math.sqrt(n)


def field_operator(d: Digitization) -> np.ndarray:
    return np.diag(d.b_values)


def conjugate_operator(d: Digitization) -> np.ndarray:
    f = fourier_matrix(d.levels)
    return (f * d.r_values) @ f.conj().T


def _kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1))
    for op in ops:
        out = np.kron(out, op)
    return out


def lift(site_op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Embed a single-register operator at 1-based ``site``."""
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} outside 1..{n_sites}")
    eye = np.eye(site_op.shape[0])
    return _kron_all([site_op if s == site else eye for s in range(1, n_sites + 1)])


def _check_cap(n_q: int, n_sites: int) -> None:
    if n_q * n_sites > MAX_TOTAL_QUBITS:
        raise ResourceLimitError(
            f"{n_sites} registers x {n_q} qubits exceeds the dense cap of "
            f"{MAX_TOTAL_QUBITS} qubits")


def _grid(values: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Per-register eigenvalue vectors over the full product basis."""
    mesh = np.meshgrid(*values, indexing="ij")
    return [m.ravel() for m in mesh]


def _cos_terms(vectors: Sequence[np.ndarray], args: Sequence[Sequence[tuple[int, float]]]) -> np.ndarray:
    out = np.zeros_like(vectors[0])
    for arg in args:
        out += np.cos(sum(c * vectors[pos - 1] for pos, c in arg))
    return out


def _bilinear_kron(a: np.ndarray, rotors: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_{ij} a[i, j] R_i R_j`` with ``R_i`` lifted by Kronecker products."""
    n_sites = len(rotors)
    eyes = [np.eye(r.shape[0]) for r in rotors]
    dim = int(np.prod([r.shape[0] for r in rotors]))
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(n_sites):
        for j in range(n_sites):
            if a[i, j] == 0.0:
                continue
            ops = list(eyes)
            if i == j:
                ops[i] = rotors[i] @ rotors[i]
            else:
                ops[i], ops[j] = rotors[i], rotors[j]
            out += a[i, j] * _kron_all(ops)
    return out


def _apply_each(site_op: np.ndarray, x: np.ndarray, n_sites: int) -> np.ndarray:
    """``(site_op ⊗ ... ⊗ site_op) @ x`` without forming the Kronecker product."""
    n = site_op.shape[0]
    cols = x.shape[1]
    t = x.reshape((n,) * n_sites + (cols,))
    for k in range(n_sites):
        t = np.moveaxis(np.tensordot(site_op, t, axes=([1], [k])), 0, k)
    return t.reshape(n ** n_sites, cols)


def _fourier_conjugate(diag: np.ndarray, n: int, n_sites: int) -> np.ndarray:
    """``F_tot diag(v) F_tot^dagger`` for real ``v``."""
    f = fourier_matrix(n)
    half = _apply_each(f, np.diag(diag.astype(complex)), n_sites)
    return _apply_each(f, half.conj().T, n_sites)


def _as_real(h: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(h.real))))
    if float(np.max(np.abs(h.imag), initial=0.0)) <= 1e-10 * scale:
        return np.ascontiguousarray(h.real)
    return h


@dataclass(frozen=True)
class RedigitizedLayout:
    """Fresh registers used for the rotated operators."""

    registers: tuple[Digitization, ...]
    scale: float
    policy: str
    argument_ranges: tuple[float, ...] = field(default=())

    @property
    def max_register_eigenvalue(self) -> float:
        return max(r.b_max for r in self.registers)


def redigitized_layout(rot: RotatedModel, d: Digitization, policy: str = DEFAULT_POLICY) -> RedigitizedLayout:
    """Digitization of the rotated registers.

    ``policy="argument"`` (default) shrinks every register by
    ``1 / sum_i sqrt(d_i)`` so that every cosine argument, including the
    global one, stays inside ``[-pi, pi]``.  ``policy="register"`` keeps the
    original range on each register; then only the operators themselves are
    inside ``[-pi, pi]``, not the arguments they enter.
    """
    if policy == "register":
        scale = 1.0
    elif policy == "argument":
        scale = 1.0 / sum(coef for _, coef in rot.global_arg)
    else:
        raise ValueError(f"unknown range policy {policy!r}")
    reg = d.scaled(scale) if scale != 1.0 else d
    n = rot.rotation.dim
    args = list(rot.local_args) + [rot.global_arg]
    ranges = tuple(reg.b_max * sum(abs(c) for _, c in arg) for arg in args)
    return RedigitizedLayout((reg,) * n, scale, policy, ranges)


def _resolve_partition(model: U1Model, partition: Optional[Partition]) -> Partition:
    return partition if partition is not None else choose_partition(model.n_plaquettes)


def magnetic_diagonal(model: U1Model, d: Digitization, mode: str = ORIGINAL,
                      partition: Optional[Partition] = None, policy: str = DEFAULT_POLICY) -> np.ndarray:
    """Diagonal of the magnetic Hamiltonian in the field eigenbasis."""
    n = model.n_plaquettes
    b = d.b_values
    if mode == ORIGINAL:
        vecs = _grid([b] * n)
        return model.magnetic.prefactor * (
            _cos_terms(vecs, model.magnetic.local_args) + _cos_terms(vecs, [model.magnetic.global_arg]))
    rot = rotate_model(model.electric, model.magnetic, _resolve_partition(model, partition))
    if mode == ROTATED_EXACT:
        w = rot.rotation.to_dense()
        vecs = _grid([b] * n)
        vecs = [sum(w[j, i] * vecs[j] for j in range(n)) for i in range(n)]
    elif mode == ROTATED_REDIGITIZED:
        layout = redigitized_layout(rot, d, policy)
        vecs = _grid([reg.b_values for reg in layout.registers])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return rot.magnetic_prefactor * (_cos_terms(vecs, rot.local_args) + _cos_terms(vecs, [rot.global_arg]))


def electric_fourier_diagonal(model: U1Model, d: Digitization, mode: str = ORIGINAL,
                              partition: Optional[Partition] = None,
                              policy: str = DEFAULT_POLICY) -> np.ndarray:
    """Diagonal of the electric Hamiltonian in the rotor (Fourier) eigenbasis."""
    n = model.n_plaquettes
    r = d.r_values
    if mode == ORIGINAL:
        a, pref = model.electric.matrix, model.electric.prefactor
        vecs = _grid([r] * n)
    else:
        rot = rotate_model(model.electric, model.magnetic, _resolve_partition(model, partition))
        a, pref = rot.electric_matrix, rot.electric_prefactor
        if mode == ROTATED_EXACT:
            w = rot.rotation.to_dense()
            base = _grid([r] * n)
            vecs = [sum(w[j, i] * base[j] for j in range(n)) for i in range(n)]
        elif mode == ROTATED_REDIGITIZED:
            layout = redigitized_layout(rot, d, policy)
            vecs = _grid([reg.r_values for reg in layout.registers])
        else:
            raise ValueError(f"unknown mode {mode!r}")
    out = np.zeros_like(vecs[0])
    for i in range(n):
        for j in range(n):
            if a[i, j] != 0.0:
                out += a[i, j] * vecs[i] * vecs[j]
    return pref * out


def build_hamiltonian(model: U1Model, d: Digitization, mode: str = ORIGINAL,
                      partition: Optional[Partition] = None, *, electric: bool = True,
                      magnetic: bool = True, policy: str = DEFAULT_POLICY) -> np.ndarray:
    """Dense Hamiltonian on ``2**(n_q N_p)`` states.

    ``ORIGINAL`` sums Kronecker-lifted rotor bilinears; the rotated modes
    assemble their electric part as a diagonal in the rotor eigenbasis and
    conjugate it back with the register-wise Fourier transform.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    n = model.n_plaquettes
    _check_cap(d.n_q, n)
    dim = d.levels ** n
    h = np.zeros((dim, dim), dtype=complex)
    if electric:
        if mode == ORIGINAL:
            rotors = [conjugate_operator(d)] * n
            h += model.electric.prefactor * _bilinear_kron(model.electric.matrix, rotors)
        elif mode == ROTATED_REDIGITIZED:
            rot = rotate_model(model.electric, model.magnetic, _resolve_partition(model, partition))
            layout = redigitized_layout(rot, d, policy)
            rotors = [conjugate_operator(reg) for reg in layout.registers]
            h += rot.electric_prefactor * _bilinear_kron(rot.electric_matrix, rotors)
        else:
            diag = electric_fourier_diagonal(model, d, mode, partition, policy)
            h += _fourier_conjugate(diag, d.levels, n)
    if magnetic:
        h[np.diag_indices(dim)] += magnetic_diagonal(model, d, mode, partition, policy)
    return _as_real(h)


def spectrum(h: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if np.max(np.abs(h - h.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian")
    return np.linalg.eigvalsh(h)


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues_a: np.ndarray
    eigenvalues_b: np.ndarray
    n_q: int
    n_low: int = 8

    @property
    def max_abs_diff(self) -> float:
        return float(np.max(np.abs(self.eigenvalues_a - self.eigenvalues_b)))

    @property
    def low_lying_diff(self) -> float:
        k = min(self.n_low, len(self.eigenvalues_a))
        return float(np.max(np.abs(self.eigenvalues_a[:k] - self.eigenvalues_b[:k])))

    def to_dict(self) -> dict:
        return {
            "n_q": self.n_q,
            "max_abs_diff": self.max_abs_diff,
            "low_lying_diff": self.low_lying_diff,
            "n_low": self.n_low,
            "eigenvalues_a": [float(x) for x in self.eigenvalues_a],
            "eigenvalues_b": [float(x) for x in self.eigenvalues_b],
        }


def compare_spectra(model: U1Model, d: Digitization, mode_a: str = ORIGINAL,
                    mode_b: str = ROTATED_REDIGITIZED, partition: Optional[Partition] = None,
                    n_low: int = 8, policy: str = DEFAULT_POLICY) -> SpectrumReport:
    ea = spectrum(build_hamiltonian(model, d, mode_a, partition, policy=policy))
    eb = spectrum(build_hamiltonian(model, d, mode_b, partition, policy=policy))
    return SpectrumReport(ea, eb, d.n_q, n_low)


def _unitary_from_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    e, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * e * t)) @ v.conj().T


def exact_evolution(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` by dense diagonalization."""
    return _unitary_from_hermitian(h, t)


def trotter_evolve(model: U1Model, d: Digitization, t: float, steps: int,
                   basis: str = ORIGINAL, partition: Optional[Partition] = None, *,
                   electric: bool = True, magnetic: bool = True) -> np.ndarray:
    """First-order product formula, each factor diagonal in its own basis.

    One step is ``exp(-i H_B dt) F_tot exp(-i D_E dt) F_tot^dagger`` where
    ``D_E`` is the electric energy on rotor eigenstates.  ``basis=WEAVED``
    takes both diagonals from the rotated term structure.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    n = model.n_plaquettes
    _check_cap(d.n_q, n)
    mode = {ORIGINAL: ORIGINAL, WEAVED: ROTATED_EXACT}.get(basis)
    if mode is None:
        raise ValueError(f"unknown basis {basis!r}")
    dim = d.levels ** n
    dt = t / steps
    phase_b = np.ones(dim, dtype=complex)
    if magnetic:
        phase_b = np.exp(-1j * dt * magnetic_diagonal(model, d, mode, partition))
    if electric:
        phase_e = np.exp(-1j * dt * electric_fourier_diagonal(model, d, mode, partition))
        f = fourier_matrix(d.levels)
        f_tot = _apply_each(f, np.eye(dim, dtype=complex), n)
        kinetic = (f_tot * phase_e) @ f_tot.conj().T
        step = phase_b[:, None] * kinetic
    else:
        step = np.diag(phase_b)
    return np.linalg.matrix_power(step, steps)


def unitarity_error(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def trotter_error_table(model: U1Model, d: Digitization, t: float, steps: Sequence[int],
                        basis: str = ORIGINAL, partition: Optional[Partition] = None) -> list[dict]:
    """Operator-norm distance to ``exp(-i H t)`` for each step count."""
    mode = ORIGINAL if basis == ORIGINAL else ROTATED_EXACT
    exact = exact_evolution(build_hamiltonian(model, d, mode, partition), t)
    rows = []
    for s in steps:
        u = trotter_evolve(model, d, t, s, basis, partition)
        rows.append({
            "steps": int(s),
            "error": float(np.linalg.norm(u - exact, 2)),
            "unitarity_error": unitarity_error(u),
        })
    return rows
