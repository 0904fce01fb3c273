"""Separability driver: witness search over the separable set.

Builds the geometry of the separable body in Bloch coordinates, adapts the
product-state optimisation oracle to restricted coordinate index sets, runs
the cutting-plane solver, and lifts accepted directions back to Hermitian
witnesses.  Also provides the witness analytics: two-sided extremal values,
and the noisy-Bell two-observable discriminator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import accpm
from .accpm import (
    DEFAULT_CONSTANTS,
    GeometryParams,
    OracleReply,
    SolverConstants,
    make_geometry,
)
from .errors import InvalidInputError
from .hermops import (
    DensityMatrix,
    HermitianOp,
    ObservableBasis,
    bloch_lift,
    bloch_project,
    build_basis,
)
from .oracle import (
    MODE_CUT_IF_BELOW,
    MODE_WITNESS_IF_ABOVE,
    EarlyStopContext,
    b_star,
)

WITNESS_FOUND = "WitnessFound"
SEPARABLE_WITHIN_DELTA = "SeparableWithinDelta"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class WitnessVerdict:
    kind: str
    witness: HermitianOp | None
    witness_bloch: np.ndarray | None
    b_star_estimate: float | None
    margin: float | None
    index_set: tuple[int, ...]
    diagnostics: dict


@dataclass(frozen=True)
class SandwichResult:
    a_star: float
    b_star: float
    is_left: bool
    is_right: bool

    @property
    def is_ambidextrous(self) -> bool:
        return self.is_left and self.is_right


@dataclass(frozen=True)
class NoisyBellResult:
    verdict: str  # Entangled | Inconclusive
    satisfied: tuple[str, ...]
    identified_bell: str | None


def separable_radii(m: int, n: int) -> tuple[float, float, float]:
    """Outer radius, inscribed-ball radius, and effective outer radius of the
    separable body in Bloch coordinates."""
    side = m * n
    big_r = math.sqrt(1.0 - 1.0 / side)
    r_s = 1.0 / math.sqrt(side * (side - 1))
    return big_r, r_s, math.sqrt(big_r * big_r - r_s * r_s)


def sep_geometry(m: int, n: int, delta: float, dimension: int | None = None) -> GeometryParams:
    """Geometry parameters for the separable body; ``dimension`` defaults to
    the full coordinate count M^2 N^2 - 1 and shrinks for restricted index
    sets (projection preserves both radii)."""
    if m < 2 or n < 2:
        raise InvalidInputError("subsystem dimensions must be at least 2")
    big_r, r_s, _ = separable_radii(m, n)
    if dimension is None:
        dimension = m * m * n * n - 1
    return make_geometry(delta, big_r, r_s, dimension)


class SeparableOracle:
    """Weak optimisation over separable states, phrased in Bloch coordinates.

    A query direction c on the index set T is lifted to the traceless
    observable sum_k c_k X_{T[k]}; the best product state found is projected
    back to the same coordinates.  Early termination uses the witness
    condition when the spectral bound already settles the query, and the
    cut condition otherwise.
    """

    def __init__(self, basis: ObservableBasis, index_set: tuple[int, ...],
                 budget: int = 64, seed: int = 0):
        self.basis = basis
        self.index_set = tuple(index_set)
        self.budget = int(budget)
        self.seed = int(seed)
        self.calls = 0

    def lift(self, coords: np.ndarray) -> HermitianOp:
        return bloch_lift(np.asarray(coords, dtype=float), self.basis, self.index_set)

    def project_product(self, state) -> np.ndarray:
        """Coordinates of a pure product state on the index set."""
        ket = state.ket()
        sub = self.basis.stack[list(self.index_set)]
        return np.einsum("i,kij,j->k", ket.conj(), sub, ket).real

    def optimise(self, coords: np.ndarray, epsilon: float,
                 early: EarlyStopContext, budget: int | None = None):
        op = self.lift(coords)
        if early.mode == MODE_CUT_IF_BELOW:
            spectral_top = float(np.linalg.eigvalsh(op.matrix)[-1])
            if spectral_top < early.reference_value:
                early = EarlyStopContext(early.reference_value, MODE_WITNESS_IF_ABOVE)
        result = b_star(op, epsilon, budget=budget or self.budget,
                        seed=self.seed, early=early)
        self.calls += 1
        return result

    def __call__(self, coords: np.ndarray, epsilon: float,
                 early: EarlyStopContext) -> OracleReply:
        result = self.optimise(coords, epsilon, early)
        return OracleReply(point=self.project_product(result.maximizer), detail=result)


def d_rho(op: HermitianOp, rho: DensityMatrix, epsilon: float = 1e-6,
          budget: int = 64, seed: int = 0) -> float:
    """Signed distance b*(A) - tr(A rho) for a unit-Frobenius observable.

    The optimum is attained by a genuine product state, so a negative value
    certifies entanglement even though the oracle is a heuristic.
    """
    if abs(op.frobenius_norm() - 1.0) > 1e-9:
        raise InvalidInputError("signed distance expects a unit-Frobenius observable")
    if op.dims != rho.dims:
        raise InvalidInputError("operator and state dimensions differ")
    best = b_star(op, epsilon, budget=budget, seed=seed)
    return best.lower_bound - float(np.trace(op.matrix @ rho.matrix).real)


def find_witness(rho: DensityMatrix, delta: float, observables=None, *,
                 heuristic_first: bool = True, dynamic_stops: bool = True,
                 oracle_budget: int = 64, seed: int = 0,
                 presearch_iters: int = 200, constants: SolverConstants = DEFAULT_CONSTANTS,
                 check_invariants: bool = False, diagnostics_sink=None) -> WitnessVerdict:
    """Search for an entanglement witness in the span of the chosen
    observables, or conclude the state is within delta of separable.

    Accepted directions are re-verified with a four-fold oracle budget; if
    the re-verified margin falls below the oracle accuracy the search resumes
    with the refuting product state as a new cut.
    """
    m, n = rho.dims
    basis = build_basis(m, n)
    if observables is None:
        index_set = basis.full_index_set()
    else:
        index_set = tuple(int(i) for i in observables)
        if not index_set:
            raise InvalidInputError("observable index set must be nonempty")
        if 0 in index_set:
            raise InvalidInputError("identity component cannot host a witness")
    p_vec = bloch_project(rho, basis, index_set).coords

    diagnostics: dict = {"indexSet": list(index_set)}
    if float(np.linalg.norm(p_vec)) < 1e-9:
        diagnostics.update({"shortCircuit": "center", "oracleCalls": 0})
        return WitnessVerdict(SEPARABLE_WITHIN_DELTA, None, None, None, None,
                              index_set, diagnostics)

    geom = sep_geometry(m, n, delta, dimension=len(index_set))
    if float(np.linalg.norm(p_vec)) > geom.R + 1e-9:
        raise InvalidInputError("state coordinates exceed the outer radius bound")

    oracle = SeparableOracle(basis, index_set, budget=oracle_budget, seed=seed)
    verification_calls = 0

    def verify(coords: np.ndarray):
        nonlocal verification_calls
        verification_calls += 1
        result = oracle.optimise(coords, geom.epsilon_oracle,
                                 EarlyStopContext(float(coords @ p_vec), MODE_CUT_IF_BELOW),
                                 budget=4 * oracle_budget)
        margin = float(coords @ p_vec) - result.lower_bound
        return margin, result

    def accept_hook(c: np.ndarray, reply: OracleReply):
        margin, result = verify(c)
        better = OracleReply(point=oracle.project_product(result.maximizer),
                             detail=result)
        return margin >= geom.epsilon_oracle, better

    def finish_found(c: np.ndarray, margin: float, estimate: float,
                     extra: dict) -> WitnessVerdict:
        c = np.asarray(c, dtype=float)
        c = c / np.linalg.norm(c)
        witness_op = oracle.lift(c)
        diagnostics.update(extra)
        diagnostics["verificationCalls"] = verification_calls
        return WitnessVerdict(WITNESS_FOUND, witness_op, c, estimate, margin,
                              index_set, diagnostics)

    if heuristic_first:
        pre = accpm.heuristic_presearch(p_vec, oracle, n_prime=presearch_iters,
                                        eps=geom.epsilon_oracle)
        diagnostics["presearchCalls"] = pre.oracle_calls
        if pre.direction is not None:
            margin, result = verify(pre.direction)
            if margin >= geom.epsilon_oracle:
                return finish_found(pre.direction, margin, result.lower_bound,
                                    {"foundBy": "presearch",
                                     "oracleCalls": oracle.calls})

    outcome = accpm.solve(p_vec, oracle, geom, constants, dynamic=dynamic_stops,
                          accept_hook=accept_hook, check_invariants=check_invariants,
                          diagnostics_sink=diagnostics_sink)
    diagnostics.update(outcome.diagnostics)
    diagnostics["oracleCalls"] = oracle.calls
    if outcome.kind == accpm.DIRECTION_FOUND:
        c = outcome.direction
        estimate = outcome.certificate["cTk"]
        margin = outcome.certificate["cTp"] - estimate
        return finish_found(c, margin, estimate, {"foundBy": "solver"})
    diagnostics["verificationCalls"] = verification_calls
    return WitnessVerdict(SEPARABLE_WITHIN_DELTA, None, None, None, None,
                          index_set, diagnostics)


def sandwich(op: HermitianOp, epsilon: float = 1e-6, budget: int = 64,
             seed: int = 0) -> SandwichResult:
    """Extremal separable expectations of an observable and its handedness.

    The observable is a left witness when some state dips strictly below the
    separable minimum, a right witness when some state exceeds the separable
    maximum; both at once make it ambidextrous.
    """
    upper = b_star(op, epsilon, budget=budget, seed=seed)
    neg = HermitianOp(op.dims, -op.matrix)
    lower = b_star(neg, epsilon, budget=budget, seed=seed)
    b_val = upper.lower_bound
    a_val = -lower.lower_bound
    eigs = np.linalg.eigvalsh(op.matrix)
    is_left = bool(eigs[0] < a_val - 1e-8)
    is_right = bool(eigs[-1] > b_val + 1e-8)
    return SandwichResult(a_val, b_val, is_left, is_right)


_BELL_RULES = (
    ("sum>+1/2", "phi+"),
    ("diff>+1/2", "psi+"),
    ("sum<-1/2", "phi-"),
    ("diff<-1/2", "psi-"),
)


def noisy_bell_check(e11: float, e22: float) -> NoisyBellResult:
    """Two-observable entanglement check for two qubits.

    ``e11`` and ``e22`` are expectations of the normalized observables
    X (x) X and Y (x) Y (unit Frobenius norm, so both lie in [-1, 1]).  Any
    of the four half-unit violations certifies entanglement; under the
    noisy-Bell source model exactly one can hold, which identifies the Bell
    state.  The identification is only reported when exactly one holds.
    """
    for name, val in (("e11", e11), ("e22", e22)):
        if not -1.0 - 1e-12 <= val <= 1.0 + 1e-12:
            raise InvalidInputError(f"{name}={val} outside [-1, 1]")
    s, d = e11 + e22, e11 - e22
    slack = 1e-12
    satisfied = []
    labels = []
    for name, label in _BELL_RULES:
        base = s if name.startswith("sum") else d
        hit = base > 0.5 + slack if name.endswith(">+1/2") else base < -0.5 - slack
        if hit:
            satisfied.append(name)
            labels.append(label)
    verdict = "Entangled" if satisfied else "Inconclusive"
    identified = labels[0] if len(labels) == 1 else None
    return NoisyBellResult(verdict, tuple(satisfied), identified)
