"""Efficient one-sided separability tests and the composite battery.

Each test returns Entangled, SeparableCertified, or Inconclusive.  Necessary
tests can only ever report Entangled; sufficient tests can only ever certify
separability.  All violation thresholds are 1e-9 so that round-off never
produces a false Entangled verdict; boundary states fall on the
non-entangled branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hermops import (
    DensityMatrix,
    eig_hermitian,
    maximally_mixed,
    partial_trace,
    partial_transpose,
    realign,
    trace_norm,
)

ENTANGLED = "Entangled"
SEPARABLE = "SeparableCertified"
INCONCLUSIVE = "Inconclusive"

VIOLATION_TOL = 1e-9
CERT_TOL = 1e-12
RANK_REL_TOL = 1e-9


@dataclass(frozen=True)
class TestOutcome:
    test_name: str
    verdict: str
    witness_value: float | None = None
    conclusive: bool = False


def _numerical_rank(eigenvalues: np.ndarray) -> int:
    top = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    if top == 0.0:
        return 0
    return int(np.sum(eigenvalues > RANK_REL_TOL * top))


def ppt_test(rho: DensityMatrix) -> TestOutcome:
    """Positivity of the partial transpose; conclusive for MN <= 6 or low rank."""
    m, n = rho.dims
    pt_eigs = np.linalg.eigvalsh(partial_transpose(rho, "B").matrix)
    lam_min = float(pt_eigs[0])
    conclusive = m * n <= 6
    if not conclusive:
        rank = _numerical_rank(np.linalg.eigvalsh(rho.matrix))
        conclusive = rank <= max(m, n)
    if lam_min < -VIOLATION_TOL:
        return TestOutcome("ppt", ENTANGLED, lam_min, conclusive)
    if conclusive:
        return TestOutcome("ppt", SEPARABLE, lam_min, True)
    return TestOutcome("ppt", INCONCLUSIVE, lam_min, False)


def reduction_test(rho: DensityMatrix) -> TestOutcome:
    m, n = rho.dims
    rho_a = partial_trace(rho, "B").matrix
    rho_b = partial_trace(rho, "A").matrix
    lam_a = float(np.linalg.eigvalsh(np.kron(rho_a, np.eye(n)) - rho.matrix)[0])
    lam_b = float(np.linalg.eigvalsh(np.kron(np.eye(m), rho_b) - rho.matrix)[0])
    worst = min(lam_a, lam_b)
    if worst < -VIOLATION_TOL:
        return TestOutcome("reduction", ENTANGLED, worst, False)
    return TestOutcome("reduction", INCONCLUSIVE, worst, False)


def _renyi2_entropy(matrix: np.ndarray) -> float:
    return -float(np.log(np.vdot(matrix, matrix).real))


def _von_neumann_entropy(matrix: np.ndarray) -> float:
    w = np.clip(np.linalg.eigvalsh(matrix), 0.0, None)
    w = w[w > 0.0]
    return -float(np.sum(w * np.log(w)))


def entropic_test(rho: DensityMatrix, alpha: int = 2) -> TestOutcome:
    """Entropy of the whole state must dominate both marginal entropies."""
    if alpha == 2:
        ent = _renyi2_entropy
    elif alpha == 1:
        ent = _von_neumann_entropy
    else:
        raise ValueError(f"alpha must be 1 or 2, got {alpha}")
    name = f"entropic_alpha{alpha}"
    s = ent(rho.matrix)
    s_marg = max(ent(partial_trace(rho, "B").matrix), ent(partial_trace(rho, "A").matrix))
    deficit = s - s_marg
    if deficit < -VIOLATION_TOL:
        return TestOutcome(name, ENTANGLED, deficit, False)
    return TestOutcome(name, INCONCLUSIVE, deficit, False)


def majorisation_test(rho: DensityMatrix) -> TestOutcome:
    """Spectrum of the state must be majorised by both marginal spectra."""
    side = rho.side
    lam = np.sort(np.linalg.eigvalsh(rho.matrix))[::-1]
    worst_excess = -np.inf
    for sub in ("B", "A"):
        lam_red = np.sort(np.linalg.eigvalsh(partial_trace(rho, sub).matrix))[::-1]
        padded = np.zeros(side)
        padded[: len(lam_red)] = lam_red
        excess = float(np.max(np.cumsum(lam) - np.cumsum(padded)))
        worst_excess = max(worst_excess, excess)
    if worst_excess > VIOLATION_TOL:
        return TestOutcome("majorisation", ENTANGLED, worst_excess, False)
    return TestOutcome("majorisation", INCONCLUSIVE, worst_excess, False)


def ccnr_test(rho: DensityMatrix) -> TestOutcome:
    """Trace norm of the realigned matrix is at most 1 on separable states."""
    value = trace_norm(realign(rho))
    if value > 1.0 + VIOLATION_TOL:
        return TestOutcome("ccnr", ENTANGLED, value, False)
    return TestOutcome("ccnr", INCONCLUSIVE, value, False)


def ball_test(rho: DensityMatrix) -> TestOutcome:
    """Separability certificates from proximity to the maximally mixed state."""
    m, n = rho.dims
    side = m * n
    diff = rho.matrix - maximally_mixed(m, n).matrix
    dist_sq = float(np.vdot(diff, diff).real)
    if dist_sq <= 1.0 / (side * (side - 1)) + CERT_TOL:
        return TestOutcome("ball", SEPARABLE, dist_sq, False)
    lam_min = float(np.linalg.eigvalsh(rho.matrix)[0])
    if lam_min >= 1.0 / (2 + side) - CERT_TOL:
        return TestOutcome("ball", SEPARABLE, dist_sq, False)
    return TestOutcome("ball", INCONCLUSIVE, dist_sq, False)


def m2_ppt_sufficient_test(rho: DensityMatrix) -> TestOutcome:
    """For M = 2, invariance under partial transposition certifies separability."""
    if rho.dims[0] != 2:
        return TestOutcome("m2_ppt_sufficient", INCONCLUSIVE, None, False)
    diff = rho.matrix - partial_transpose(rho, "A").matrix
    defect = float(np.linalg.norm(diff))
    if defect < 1e-10:
        return TestOutcome("m2_ppt_sufficient", SEPARABLE, defect, False)
    return TestOutcome("m2_ppt_sufficient", INCONCLUSIVE, defect, False)


BATTERY_ORDER = ("ball", "ppt", "reduction", "majorisation", "entropic", "ccnr", "m2")


def run_battery(rho: DensityMatrix) -> tuple[list[TestOutcome], str]:
    """Run every test cheapest-first; the combined verdict is the first
    non-Inconclusive outcome, but all outcomes are reported."""
    outcomes = [
        ball_test(rho),
        ppt_test(rho),
        reduction_test(rho),
        majorisation_test(rho),
        entropic_test(rho, alpha=2),
        ccnr_test(rho),
        m2_ppt_sufficient_test(rho),
    ]
    combined = INCONCLUSIVE
    for out in outcomes:
        if out.verdict != INCONCLUSIVE:
            combined = out.verdict
            break
    return outcomes, combined
