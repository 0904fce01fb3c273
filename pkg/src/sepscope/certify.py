"""Desk-scale verification utilities.

Finite-precision separable-decomposition certificates and their acceptance
checks, affine-independence and simplex-membership tests, and an
oracle-driven nearest-separable-distance iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .hermops import (
    BlochVector,
    DensityMatrix,
    bloch_lift,
    bloch_project,
    build_basis,
)
from .oracle import b_star

GRID_ATOL = 1e-15


def truncate_to_bits(values, bits: int):
    """Truncate toward zero onto the 2^-bits grid."""
    scale = float(2**bits)
    return np.trunc(np.asarray(values) * scale) / scale


def _is_grid_aligned(x: float, bits: int) -> bool:
    scaled = x * (2**bits)
    return abs(scaled - round(scaled)) <= GRID_ATOL * (2**bits)


@dataclass(frozen=True, eq=False)
class SeparableCertificate:
    """A claimed separable decomposition with grid-aligned components.

    Each term is (weight, alpha, beta) with possibly unnormalised vectors;
    every weight and every rectangular component must be representable in
    ``precision_bits`` bits.  At most M^2 N^2 terms are ever needed.
    """

    terms: tuple
    precision_bits: int

    def __post_init__(self):
        if self.precision_bits < 1:
            raise InvalidInputError("precision_bits must be positive")
        if not self.terms:
            raise InvalidInputError("certificate has no terms")
        cleaned = []
        m = len(np.asarray(self.terms[0][1]).reshape(-1))
        n = len(np.asarray(self.terms[0][2]).reshape(-1))
        if len(self.terms) > (m * n) ** 2:
            raise InvalidInputError(
                f"certificate has {len(self.terms)} terms; at most {(m * n) ** 2} are needed"
            )
        for weight, alpha, beta in self.terms:
            weight = float(weight)
            alpha = np.asarray(alpha, dtype=complex).reshape(-1)
            beta = np.asarray(beta, dtype=complex).reshape(-1)
            if len(alpha) != m or len(beta) != n:
                raise InvalidInputError("certificate terms have inconsistent dimensions")
            if weight < 0.0:
                raise InvalidInputError("certificate weights must be nonnegative")
            components = [weight]
            components += list(alpha.real) + list(alpha.imag)
            components += list(beta.real) + list(beta.imag)
            for x in components:
                if not _is_grid_aligned(float(x), self.precision_bits):
                    raise InvalidInputError(
                        f"component {x!r} is not on the {self.precision_bits}-bit grid"
                    )
            alpha.setflags(write=False)
            beta.setflags(write=False)
            cleaned.append((weight, alpha, beta))
        object.__setattr__(self, "terms", tuple(cleaned))

    @property
    def dims(self) -> tuple[int, int]:
        return (len(self.terms[0][1]), len(self.terms[0][2]))

    def assemble(self) -> np.ndarray:
        """The (unnormalised) operator sum_i p_i a_i a_i^+ (x) b_i b_i^+."""
        m, n = self.dims
        out = np.zeros((m * n, m * n), dtype=complex)
        for weight, alpha, beta in self.terms:
            ket = np.kron(alpha, beta)
            out += weight * np.outer(ket, ket.conj())
        return out


@dataclass(frozen=True)
class CertificateCheck:
    accepted: bool
    norm_check_max: float
    distance: float
    normalized_gap_bound: float


def verify_qsep_certificate(rho: DensityMatrix, cert: SeparableCertificate,
                            eps_prime: float, delta_prime: float) -> CertificateCheck:
    """Accept when every term normalisation defect is below eps' and the
    assembled operator is within delta' of the state in Frobenius norm.

    Acceptance implies the state is within delta' + eps' of an exactly
    normalised separable state.
    """
    if cert.dims != rho.dims:
        raise InvalidInputError("certificate dimensions do not match the state")
    if eps_prime <= 0 or delta_prime <= 0:
        raise InvalidInputError("tolerances must be positive")
    weight_sum = sum(t[0] for t in cert.terms)
    defects = []
    gap_bound = 0.0
    for weight, alpha, beta in cert.terms:
        scale = float((np.linalg.norm(alpha) ** 2) * (np.linalg.norm(beta) ** 2))
        defect = abs(1.0 - scale * weight_sum)
        defects.append(defect)
        if weight_sum > 0:
            gap_bound += (weight / weight_sum) * defect
    sigma = cert.assemble()
    diff = rho.matrix - sigma
    distance = float(np.sqrt(np.vdot(diff, diff).real))
    norm_check_max = max(defects)
    accepted = norm_check_max < eps_prime and distance < delta_prime
    return CertificateCheck(accepted, norm_check_max, distance, gap_bound)


def affine_independent(points, rel_tol: float = 1e-10) -> bool:
    """True when the differences from the first point have full column rank."""
    pts = [np.asarray(p, dtype=float).reshape(-1) for p in points]
    if not pts:
        raise InvalidInputError("no points given")
    if any(p.shape != pts[0].shape for p in pts):
        raise InvalidInputError("points have inconsistent dimensions")
    if len(pts) == 1:
        return True
    diffs = np.stack([p - pts[0] for p in pts[1:]])
    if len(pts) - 1 > pts[0].size:
        return False
    svals = np.linalg.svd(diffs, compute_uv=False)
    return bool(svals[-1] > rel_tol * max(svals[0], 1.0))


def hull_membership(q, vertices, tol: float = 1e-10) -> bool:
    """Membership of q in the simplex spanned by n+1 affinely independent
    vertices; boundary points count as inside."""
    q = np.asarray(q, dtype=float).reshape(-1)
    verts = [np.asarray(v, dtype=float).reshape(-1) for v in vertices]
    n = q.size
    if len(verts) != n + 1:
        raise InvalidInputError(f"need {n + 1} vertices in dimension {n}, got {len(verts)}")
    if not affine_independent(verts):
        raise InvalidInputError("vertices are not affinely independent")
    for j in range(n + 1):
        facet = [verts[i] for i in range(n + 1) if i != j]
        anchor = facet[0]
        rows = np.stack([v - anchor for v in facet[1:]]) if len(facet) > 1 else np.zeros((0, n))
        _, _, vh = np.linalg.svd(rows) if rows.size else (None, None, np.eye(n))
        normal = vh[-1]
        side_q = float(normal @ (q - anchor))
        side_j = float(normal @ (verts[j] - anchor))
        if abs(side_q) <= tol:
            continue
        if side_q * side_j < 0:
            return False
    return True


@dataclass(frozen=True)
class GilbertResult:
    distance: float
    nearest: BlochVector
    iterations: int


def gilbert_distance(rho: DensityMatrix, *, max_iters: int = 10_000,
                     tol: float = 1e-7, budget: int = 8, seed: int = 0,
                     epsilon: float = 1e-6) -> GilbertResult:
    """Upper estimate of the Euclidean distance from a state to the
    separable set, by linear-maximisation descent over product states.

    Each step asks the optimisation oracle for the extreme point maximising
    the current direction and takes the exact line-search step toward it;
    the distance estimate is nonincreasing.  Stops when one step improves
    the distance by less than ``tol``.
    """
    m, n = rho.dims
    basis = build_basis(m, n)
    index_set = basis.full_index_set()
    target = bloch_project(rho, basis, index_set).coords
    current = np.zeros_like(target)
    distance = float(np.linalg.norm(target))
    iterations = 0
    for _ in range(max_iters):
        direction = target - current
        norm_dir = float(np.linalg.norm(direction))
        if norm_dir < 1e-15:
            break
        lifted = bloch_lift(direction / norm_dir, basis, index_set)
        result = b_star(lifted, epsilon, budget=budget, seed=seed)
        extreme = bloch_project(result.maximizer.density(), basis, index_set).coords
        gap = extreme - current
        denom = float(gap @ gap)
        if denom < 1e-30:
            break
        step = float(np.clip((direction @ gap) / denom, 0.0, 1.0))
        if step <= 0.0:
            break
        current = current + step * gap
        iterations += 1
        new_distance = float(np.linalg.norm(target - current))
        improvement = distance - new_distance
        distance = min(distance, new_distance)
        if improvement < tol:
            break
    return GilbertResult(distance, BlochVector(current, index_set), iterations)
