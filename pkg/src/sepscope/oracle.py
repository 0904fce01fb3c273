"""Weak optimisation over the separable set.

Computes b*(A), the maximum of <a (x) b| A |a (x) b> over pure product
states, by deterministic multi-start see-saw (alternating exact
maximisation over the two tensor factors), with lambda_max(A) as the cheap
sound upper bound and optional early termination against a reference value.
A certified brute-force variant enumerates a net over one factor and
maximises the other factor exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BudgetExceededError, DimensionMismatchError, InvalidInputError
from .hermops import HermitianOp, PureProductState

MODE_NONE = "none"
MODE_CUT_IF_BELOW = "cut_if_below"
MODE_WITNESS_IF_ABOVE = "witness_if_above"


@dataclass(frozen=True)
class EarlyStopContext:
    """Reference value and regime for halting the search early.

    ``cut_if_below``: stop once the best lower bound reaches the reference
    (the caller will generate a cutting plane).  ``witness_if_above``: stop
    once the upper bound falls below the reference (the caller has found a
    certified witness direction).
    """

    reference_value: float = 0.0
    mode: str = MODE_NONE

    def __post_init__(self):
        if self.mode not in (MODE_NONE, MODE_CUT_IF_BELOW, MODE_WITNESS_IF_ABOVE):
            raise InvalidInputError(f"unknown early-stop mode {self.mode!r}")
        if not np.isfinite(self.reference_value):
            raise InvalidInputError("reference value must be finite")


NO_EARLY_STOP = EarlyStopContext()


@dataclass(frozen=True)
class OracleResult:
    lower_bound: float
    maximizer: PureProductState
    upper_bound: float
    epsilon: float
    terminated_early: bool
    evaluations: int
    bound_regime: str  # heuristic-lower | net-certified | early-cut | early-witness


@dataclass(frozen=True)
class SeesawResult:
    state: PureProductState
    value: float
    value_history: tuple[float, ...]


def expectation(op: HermitianOp, state: PureProductState) -> float:
    """<alpha (x) beta| A |alpha (x) beta>, guaranteed real."""
    if op.dims != state.dims:
        raise DimensionMismatchError(f"operator dims {op.dims} != state dims {state.dims}")
    ket = state.ket()
    val = complex(ket.conj() @ op.matrix @ ket)
    if abs(val.imag) > 1e-10:
        raise InvalidInputError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def _alpha_update(four: np.ndarray, betas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Top eigenvector over the A factor for each fixed beta (batched)."""
    contracted = np.einsum("rk,ikjl,rl->rij", betas.conj(), four, betas)
    w, v = np.linalg.eigh(contracted)
    return v[..., :, -1], w[..., -1].real


def _beta_update(four: np.ndarray, alphas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    contracted = np.einsum("ri,ikjl,rj->rkl", alphas.conj(), four, alphas)
    w, v = np.linalg.eigh(contracted)
    return v[..., :, -1], w[..., -1].real


def _normalize_rows(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


@lru_cache(maxsize=128)
def _random_seed_block(seed: int, count: int, start: int, m: int, n: int):
    """Counter-keyed random product seeds, independent of the operator."""
    alphas = np.empty((count, m), dtype=complex)
    betas = np.empty((count, n), dtype=complex)
    for i in range(count):
        rng = np.random.default_rng(np.random.SeedSequence([seed, start + i, m, n]))
        a = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        alphas[i] = a / np.linalg.norm(a)
        betas[i] = b / np.linalg.norm(b)
    alphas.setflags(write=False)
    betas.setflags(write=False)
    return alphas, betas


def _seed_states(op: HermitianOp, budget: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic see-saw seeds.

    Seeds 0 .. MN-1 split the eigenvectors of A (descending eigenvalue) into
    their closest product states via the top singular pair of the reshaped
    vector; later seeds come from a counter-keyed random stream.
    """
    m, n = op.dims
    _, vecs = np.linalg.eigh(op.matrix)
    alphas = np.empty((budget, m), dtype=complex)
    betas = np.empty((budget, n), dtype=complex)
    split = min(budget, m * n)
    for k in range(split):
        w = vecs[:, m * n - 1 - k].reshape(m, n)
        u, _, vh = np.linalg.svd(w)
        alphas[k] = u[:, 0]
        betas[k] = vh[0, :].conj()
    if budget > split:
        rand_a, rand_b = _random_seed_block(int(seed), budget - split, split, m, n)
        alphas[split:] = rand_a
        betas[split:] = rand_b
    return alphas, betas


def seesaw(op: HermitianOp, seed_state: PureProductState,
           max_iters: int = 300, tol: float = 1e-10) -> SeesawResult:
    """Alternating exact maximisation from one seed; the value sequence is
    nondecreasing per half-step."""
    if op.dims != seed_state.dims:
        raise DimensionMismatchError("seed state dims do not match operator")
    m, n = op.dims
    four = op.matrix.reshape(m, n, m, n)
    alphas = seed_state.alpha[np.newaxis, :].copy()
    betas = seed_state.beta[np.newaxis, :].copy()
    history = [expectation(op, seed_state)]
    value = history[0]
    for _ in range(max_iters):
        alphas, vals = _alpha_update(four, betas)
        alphas = _normalize_rows(alphas)
        history.append(float(vals[0]))
        betas, vals = _beta_update(four, alphas)
        betas = _normalize_rows(betas)
        history.append(float(vals[0]))
        new_value = float(vals[0])
        if new_value - value < tol:
            value = max(value, new_value)
            break
        value = new_value
    state = PureProductState(alphas[0], betas[0])
    return SeesawResult(state, expectation(op, state), tuple(history))


def b_star(op: HermitianOp, epsilon: float, budget: int = 64, seed: int = 0,
           early: EarlyStopContext = NO_EARLY_STOP,
           max_iters: int = 300, tol: float = 1e-11) -> OracleResult:
    """Best product-state value over deterministic multi-start see-saw.

    The lower bound is attained by the returned product state.  The upper
    bound is lambda_max(A); it is tightened only by the net-based variant.
    Ties between restarts resolve to the lowest seed index.
    """
    if budget <= 0:
        raise InvalidInputError("restart budget must be positive")
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    m, n = op.dims
    if m < 2 or n < 2:
        raise InvalidInputError("oracle needs both subsystem dimensions >= 2")
    upper = float(np.linalg.eigvalsh(op.matrix)[-1])

    if early.mode == MODE_WITNESS_IF_ABOVE and upper < early.reference_value:
        res = seesaw(op, _first_seed_state(op), max_iters=max_iters, tol=tol)
        return OracleResult(res.value, res.state, upper, epsilon, True,
                            len(res.value_history), "early-witness")

    four = op.matrix.reshape(m, n, m, n)
    alphas, betas = _seed_states(op, budget, seed)
    alphas = _normalize_rows(alphas)
    betas = _normalize_rows(betas)
    contracted = np.einsum("ri,ikjl,rj->rkl", alphas.conj(), four, alphas)
    values = np.einsum("rk,rkl,rl->r", betas.conj(), contracted, betas).real
    evaluations = budget
    prev = values.copy()
    stopped_early = False
    for _ in range(max_iters):
        if early.mode == MODE_CUT_IF_BELOW and float(values.max()) >= early.reference_value:
            stopped_early = True
            break
        alphas, values = _alpha_update(four, betas)
        alphas = _normalize_rows(alphas)
        evaluations += budget
        if early.mode == MODE_CUT_IF_BELOW and float(values.max()) >= early.reference_value:
            stopped_early = True
            break
        betas, values = _beta_update(four, alphas)
        betas = _normalize_rows(betas)
        evaluations += budget
        if np.max(values - prev) < tol:
            break
        prev = values.copy()

    best = int(np.argmax(values))
    state = PureProductState(alphas[best], betas[best])
    lower = expectation(op, state)
    regime = "early-cut" if stopped_early else "heuristic-lower"
    return OracleResult(lower, state, upper, epsilon, stopped_early, evaluations, regime)


def _first_seed_state(op: HermitianOp) -> PureProductState:
    alphas, betas = _seed_states(op, 1, 0)
    return PureProductState(alphas[0] / np.linalg.norm(alphas[0]),
                            betas[0] / np.linalg.norm(betas[0]))


def net_evaluation_count(op: HermitianOp, epsilon: float) -> int:
    """Grid size the certified net variant would enumerate at this accuracy."""
    n_theta, n_phi, _ = _net_grid(op, epsilon)
    return n_theta * n_phi


def _net_grid(op: HermitianOp, epsilon: float) -> tuple[int, int, float]:
    opnorm = float(np.max(np.abs(np.linalg.eigvalsh(op.matrix))))
    if opnorm < 1e-15:
        return 2, 3, np.pi / 2
    # Covering radius h/sqrt(2) over two angles; value error <= 2*opnorm*radius.
    h = epsilon / (np.sqrt(2.0) * opnorm)
    n_theta = max(2, int(np.ceil((np.pi / 2) / h)) + 1)
    n_phi = max(3, int(np.ceil(2 * np.pi / h)))
    return n_theta, n_phi, h


def eps_net_b_star(op: HermitianOp, epsilon: float,
                   hard_cap: int = 30_000_000, chunk: int = 262_144) -> OracleResult:
    """Certified b* bracket for MN <= 6 by exhausting a net over one factor.

    A two-angle grid enumerates the dimension-2 factor's pure states; the
    other factor is maximised exactly by eigendecomposition, so the only
    error source is the grid resolution.  The angular step is chosen so the
    induced value error is at most ``epsilon``, giving the certified bracket
    [grid max, grid max + epsilon].  Raises when the grid would exceed
    ``hard_cap`` evaluations; callers then fall back to :func:`b_star`.
    """
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    m, n = op.dims
    if m * n > 6:
        raise InvalidInputError("certified enumeration is limited to MN <= 6")
    swapped = m != 2
    four = op.matrix.reshape(m, n, m, n)
    if swapped:
        # Net over the B factor instead; it has dimension 2 whenever MN <= 6.
        four = four.transpose(1, 0, 3, 2)
        m, n = n, m
    n_theta, n_phi, _ = _net_grid(op, epsilon)
    total = n_theta * n_phi
    if total > hard_cap:
        raise BudgetExceededError(
            f"net needs {total} evaluations, exceeding the cap of {hard_cap}"
        )

    thetas = np.linspace(0.0, np.pi / 2, n_theta)
    phis = np.arange(n_phi) * (2 * np.pi / n_phi)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    alphas = np.empty((total, 2), dtype=complex)
    alphas[:, 0] = np.cos(tt).ravel()
    alphas[:, 1] = (np.sin(tt) * np.exp(1j * pp)).ravel()

    best_val = -np.inf
    best_idx = 0
    for start in range(0, total, chunk):
        block = alphas[start : start + chunk]
        contracted = np.einsum("ri,ikjl,rj->rkl", block.conj(), four, block, optimize=True)
        vals = np.linalg.eigvalsh(contracted)[:, -1]
        local = int(np.argmax(vals))
        if vals[local] > best_val:
            best_val = float(vals[local])
            best_idx = start + local
    alpha = alphas[best_idx]
    contracted = np.einsum("i,ikjl,j->kl", alpha.conj(), four, alpha)
    w, v = np.linalg.eigh(contracted)
    beta = v[:, -1]
    if swapped:
        state = PureProductState(beta, alpha)
    else:
        state = PureProductState(alpha, beta)
    lower = float(w[-1].real)
    return OracleResult(lower, state, lower + epsilon, epsilon, False, total, "net-certified")
