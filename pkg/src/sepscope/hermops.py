"""Hermitian-operator core for bipartite systems.

Construction and validation of operators and states, tensor partial
operations (partial trace, partial transpose, realignment), the orthonormal
Hermitian product basis, and the real coordinate map between traceless
operators and Euclidean vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatchError, InvalidInputError

HERMITICITY_ATOL = 1e-12
TRACE_ATOL = 1e-10
PSD_ATOL = 1e-10
STATE_NORM_ATOL = 1e-12
ORTHONORMALITY_ATOL = 1e-10


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class HermitianOp:
    """A Hermitian operator on C^M (x) C^N, stored as a dense MN x MN matrix.

    Subsystem dimension 1 is allowed so that reduced operators returned by
    :func:`partial_trace` fit the same type.  The convention M <= N is not
    assumed anywhere.
    """

    dims: tuple[int, int]
    matrix: np.ndarray

    def __post_init__(self):
        m, n = (int(d) for d in self.dims)
        if m < 1 or n < 1:
            raise InvalidInputError(f"subsystem dimensions must be positive, got {self.dims}")
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (m * n, m * n):
            raise DimensionMismatchError(
                f"matrix shape {mat.shape} does not match dims {(m, n)}"
            )
        herm_defect = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
        if herm_defect > HERMITICITY_ATOL:
            raise InvalidInputError(f"matrix is not Hermitian (defect {herm_defect:.3e})")
        object.__setattr__(self, "dims", (m, n))
        object.__setattr__(self, "matrix", _frozen((mat + mat.conj().T) / 2.0))

    @property
    def side(self) -> int:
        return self.dims[0] * self.dims[1]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))


@dataclass(frozen=True, eq=False)
class DensityMatrix(HermitianOp):
    """A quantum state: Hermitian, unit trace, PSD up to numerical slack."""

    def __post_init__(self):
        super().__post_init__()
        tr = np.trace(self.matrix).real
        if abs(tr - 1.0) > TRACE_ATOL:
            raise InvalidInputError(f"density matrix trace {tr!r} differs from 1")
        lam_min = float(np.linalg.eigvalsh(self.matrix)[0])
        if lam_min < -PSD_ATOL:
            raise InvalidInputError(f"density matrix has negative eigenvalue {lam_min:.3e}")


@dataclass(frozen=True, eq=False)
class PureProductState:
    """A product of unit vectors alpha in C^M and beta in C^N."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=complex).reshape(-1)
        b = np.asarray(self.beta, dtype=complex).reshape(-1)
        for name, v in (("alpha", a), ("beta", b)):
            if abs(np.linalg.norm(v) - 1.0) > STATE_NORM_ATOL:
                raise InvalidInputError(f"{name} is not a unit vector")
        object.__setattr__(self, "alpha", _frozen(a))
        object.__setattr__(self, "beta", _frozen(b))

    @property
    def dims(self) -> tuple[int, int]:
        return (len(self.alpha), len(self.beta))

    def ket(self) -> np.ndarray:
        return np.kron(self.alpha, self.beta)

    def density(self) -> DensityMatrix:
        k = self.ket()
        return DensityMatrix(self.dims, np.outer(k, k.conj()))


@dataclass(frozen=True, eq=False)
class ObservableBasis:
    """Orthonormal Hermitian product basis {X_i}, X_0 = I/sqrt(MN).

    Ordering is fixed: identity factor first, then off-diagonal symmetric,
    off-diagonal antisymmetric, and diagonal generators, each in
    lexicographic index order; the A-factor index varies slower than the
    B-factor index.  Element k for factors (a, b) sits at k = a*N^2 + b.
    """

    dims: tuple[int, int]
    stack: np.ndarray  # (M^2 N^2, MN, MN)

    def __post_init__(self):
        object.__setattr__(self, "stack", _frozen(np.asarray(self.stack, dtype=complex)))

    def __len__(self) -> int:
        return self.stack.shape[0]

    def element(self, i: int) -> np.ndarray:
        return self.stack[i]

    def product_index(self, a_index: int, b_index: int) -> int:
        m, n = self.dims
        if not (0 <= a_index < m * m and 0 <= b_index < n * n):
            raise InvalidInputError("local generator index out of range")
        return a_index * n * n + b_index

    def full_index_set(self) -> tuple[int, ...]:
        return tuple(range(1, len(self)))


@dataclass(frozen=True, eq=False)
class BlochVector:
    """Real coordinates of an operator on a subset of basis indices.

    Index 0 (the identity component) is never part of the index set; every
    density matrix carries the fixed coefficient 1/sqrt(MN) there.
    """

    coords: np.ndarray
    index_set: tuple[int, ...]

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float).reshape(-1)
        idx = tuple(int(i) for i in self.index_set)
        if len(coords) != len(idx):
            raise InvalidInputError("coordinate count does not match index set")
        if 0 in idx:
            raise InvalidInputError("index 0 (identity component) is carried implicitly")
        object.__setattr__(self, "coords", _frozen(coords))
        object.__setattr__(self, "index_set", idx)


def _local_generators(d: int) -> list[np.ndarray]:
    """Normalized su(d) generators plus identity, tr(G_i G_j) = delta_ij."""
    mats = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            g = np.zeros((d, d), dtype=complex)
            g[j, k] = g[k, j] = 1.0 / np.sqrt(2.0)
            mats.append(g)
    for j in range(d):
        for k in range(j + 1, d):
            g = np.zeros((d, d), dtype=complex)
            g[j, k] = -1j / np.sqrt(2.0)
            g[k, j] = 1j / np.sqrt(2.0)
            mats.append(g)
    for l in range(1, d):
        g = np.zeros((d, d), dtype=complex)
        g[np.arange(l), np.arange(l)] = 1.0
        g[l, l] = -float(l)
        mats.append(g / np.sqrt(l * (l + 1)))
    return mats


@lru_cache(maxsize=32)
def build_basis(m: int, n: int) -> ObservableBasis:
    """Build the orthonormal Hermitian product basis for C^M (x) C^N."""
    m, n = int(m), int(n)
    if m < 2 or n < 2:
        raise InvalidInputError(f"subsystem dimensions must be at least 2, got {(m, n)}")
    gen_a = _local_generators(m)
    gen_b = _local_generators(n)
    stack = np.empty((m * m * n * n, m * n, m * n), dtype=complex)
    i = 0
    for ga in gen_a:
        for gb in gen_b:
            stack[i] = np.kron(ga, gb)
            i += 1
    return ObservableBasis((m, n), stack)


def _check_index_set(basis: ObservableBasis, indices) -> tuple[int, ...]:
    k = len(basis)
    idx = tuple(int(i) for i in indices)
    if not idx:
        raise InvalidInputError("index set is empty")
    seen = set()
    for i in idx:
        if not 1 <= i < k:
            raise InvalidInputError(f"basis index {i} out of range [1, {k - 1}]")
        if i in seen:
            raise InvalidInputError(f"duplicate basis index {i}")
        seen.add(i)
    return idx


def bloch_project(op: HermitianOp, basis: ObservableBasis, indices=None) -> BlochVector:
    """Coordinates tr(X_i A) of an operator on the given basis indices."""
    if op.dims != basis.dims:
        raise DimensionMismatchError(f"operator dims {op.dims} != basis dims {basis.dims}")
    idx = basis.full_index_set() if indices is None else _check_index_set(basis, indices)
    sub = basis.stack[list(idx)]
    coords = np.einsum("kij,ji->k", sub, op.matrix)
    if coords.size and np.max(np.abs(coords.imag)) > 1e-10:
        raise InvalidInputError("projection produced non-real coordinates")
    return BlochVector(coords.real, idx)


def bloch_lift(vec: BlochVector | np.ndarray, basis: ObservableBasis,
               indices=None, include_identity: bool = False) -> HermitianOp:
    """Inverse of the coordinate map on the spanned subspace.

    Returns sum_k coords[k] X_{T[k]}, plus I/(MN) when ``include_identity``
    is set (state reconstruction).
    """
    if isinstance(vec, BlochVector):
        coords = vec.coords
        idx = vec.index_set if indices is None else _check_index_set(basis, indices)
    else:
        coords = np.asarray(vec, dtype=float).reshape(-1)
        if indices is None:
            raise InvalidInputError("raw coordinate arrays need an explicit index set")
        idx = _check_index_set(basis, indices)
    if len(coords) != len(idx):
        raise DimensionMismatchError("coordinate count does not match index set")
    mat = np.einsum("k,kij->ij", coords, basis.stack[list(idx)])
    if include_identity:
        side = basis.dims[0] * basis.dims[1]
        mat = mat + np.eye(side) / side
    return HermitianOp(basis.dims, mat)


def partial_trace(op: HermitianOp, subsystem: str) -> HermitianOp:
    """Trace out one tensor factor; keeps the density-matrix type for states."""
    m, n = op.dims
    four = op.matrix.reshape(m, n, m, n)
    if subsystem == "B":
        out = np.einsum("ikjk->ij", four)
        dims = (m, 1)
    elif subsystem == "A":
        out = np.einsum("ikil->kl", four)
        dims = (n, 1)
    else:
        raise InvalidInputError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    cls = DensityMatrix if isinstance(op, DensityMatrix) else HermitianOp
    return cls(dims, out)


def partial_transpose(op: HermitianOp, subsystem: str = "B") -> HermitianOp:
    """Transpose one tensor factor.  Linear involution, trace preserving."""
    m, n = op.dims
    four = op.matrix.reshape(m, n, m, n)
    if subsystem == "A":
        out = four.transpose(2, 1, 0, 3)
    elif subsystem == "B":
        out = four.transpose(0, 3, 2, 1)
    else:
        raise InvalidInputError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return HermitianOp(op.dims, out.reshape(m * n, m * n))


def realign(op: HermitianOp) -> np.ndarray:
    """Reshuffle into the M^2 x N^2 matrix that is rank one on product operators.

    On elementary tensors it equals the outer product of the column-stacked
    vectorizations of the two factors.
    """
    m, n = op.dims
    four = op.matrix.reshape(m, n, m, n)
    return four.transpose(2, 0, 3, 1).reshape(m * m, n * n)


def eig_hermitian(op: HermitianOp) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (nondecreasing) and orthonormal eigenvectors (columns)."""
    w, v = np.linalg.eigh(op.matrix)
    return w, v


def purity(rho: DensityMatrix) -> float:
    """tr(rho^2); equals 1 exactly on pure states and 1/(MN) at the center."""
    return float(np.vdot(rho.matrix, rho.matrix).real)


def trace_norm(matrix: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.linalg.svd(matrix, compute_uv=False).sum())


def maximally_mixed(m: int, n: int) -> DensityMatrix:
    side = m * n
    return DensityMatrix((m, n), np.eye(side) / side)


def bell_ket(label: str) -> np.ndarray:
    """The four maximally entangled two-qubit kets.

    'psi+'/'psi-' = (|00> +/- |11>)/sqrt(2), 'phi+'/'phi-' = (|01> +/- |10>)/sqrt(2).
    """
    k = np.zeros(4, dtype=complex)
    if label == "psi+":
        k[0] = k[3] = 1.0
    elif label == "psi-":
        k[0], k[3] = 1.0, -1.0
    elif label == "phi+":
        k[1] = k[2] = 1.0
    elif label == "phi-":
        k[1], k[2] = 1.0, -1.0
    else:
        raise InvalidInputError(f"unknown label {label!r}")
    return k / np.sqrt(2.0)


def bell_density(label: str) -> DensityMatrix:
    k = bell_ket(label)
    return DensityMatrix((2, 2), np.outer(k, k.conj()))
