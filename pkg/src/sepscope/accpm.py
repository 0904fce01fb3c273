"""Analytic-center cutting-plane solver for in-biased weak separation.

The search space is the unit ball intersected with halfspaces a_i^T x >= b_i.
The solver recenters with damped Newton on the logarithmic barrier, maintains
per-plane kappa/sigma/mu bookkeeping to discard or refresh stale planes,
queries a weak optimisation oracle at the normalized approximate center, and
halts either with a separating direction or when volume/width stopping
conditions certify that no direction can remain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .errors import InvalidInputError, NumericalFailureError
from .oracle import MODE_CUT_IF_BELOW, EarlyStopContext

DIRECTION_FOUND = "DirectionFound"
REGION_EXHAUSTED = "RegionExhausted"


def q_of(lam: float) -> float:
    """q_lambda = 1 - (1 - 3 lambda)^(1/3), defined for lambda < 1/3."""
    lam = max(float(lam), 0.0)
    if lam >= 1.0 / 3.0:
        raise InvalidInputError(f"q is defined for lambda < 1/3, got {lam}")
    return 1.0 - (1.0 - 3.0 * lam) ** (1.0 / 3.0)


def q_inverse(t: float) -> float:
    """Inverse of q on [0, 1)."""
    if not 0.0 <= t < 1.0:
        raise InvalidInputError(f"q inverse needs t in [0, 1), got {t}")
    return (1.0 - (1.0 - t) ** 3) / 3.0


@dataclass(frozen=True)
class SolverConstants:
    """Algorithm constants and the derived chain used by the convergence
    bounds.  The derived values are recomputed from the stored base
    constants and checked on construction."""

    rho0: float = 1e-3
    zeta0: float = 0.00101
    gamma0: float = 0.25
    sigma0: float = 0.08
    nu: float = 1078.0
    lambda_star: float = 2.0 - math.sqrt(3.0)

    @cached_property
    def gamma_tilde0(self) -> float:
        return self.gamma0 / ((1.0 - self.zeta0 * self.gamma0) * (1.0 - self.zeta0))

    @cached_property
    def c1(self) -> float:
        g, z = self.gamma0, self.zeta0
        denom = 1.0 + g * q_of(self.gamma_tilde0) / (1.0 - z) + z * g
        return g * g * ((1.0 - z) / denom) ** 2

    @cached_property
    def c2(self) -> float:
        return 0.25 * min(self.sigma0, self.c1)

    @cached_property
    def c3(self) -> float:
        x = self.sigma0 / (1.0 - self.zeta0) ** 4
        return math.sqrt(x / (1.0 - x))

    @cached_property
    def c4(self) -> float:
        q = q_of(self.c3)
        return 0.5 * q * q * (1.0 + q) / (1.0 - q)

    @cached_property
    def c5(self) -> float:
        return (1.0 - self.zeta0) / (1.0 / self.gamma0 + 2.0 + self.zeta0)

    @cached_property
    def c6(self) -> float:
        return 0.5 * self.c5**2 - self.c5**3 / (3.0 * (1.0 - self.c5))

    @cached_property
    def c7(self) -> float:
        s = math.sqrt(1.0 + self.gamma0**2) * self.zeta0
        return s / (1.0 - s)

    @cached_property
    def c_discard(self) -> float:
        z, s0 = self.zeta0, self.sigma0
        zs = z * math.sqrt(s0)
        return (zs / (1.0 - zs)
                + 0.5 * (z / (1.0 - z)) ** 2
                + z**3 / (3.0 * (1.0 - z))
                + self.c4)

    @cached_property
    def c_add(self) -> float:
        z, g = self.zeta0, self.gamma0
        zg = z * g / (1.0 - z * g)
        t = q_of(self.gamma_tilde0)
        t = t / (1.0 - t)
        return (zg
                + 0.5 * (z / (1.0 - z)) ** 2
                + 0.5 * zg**2
                + self.c7**3 / (3.0 * (1.0 - self.c7))
                + 0.5 * t * t
                + t**3 / (3.0 * (1.0 - t)))

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """Check the constraint chain the convergence analysis relies on."""
        checks = [
            ("zeta0 matches q(rho0)", abs(self.zeta0 - q_of(self.rho0)) < 1e-5),
            ("rho0 < 1/3", self.rho0 < 1.0 / 3.0),
            ("gamma_tilde0 < 1/3", self.gamma_tilde0 < 1.0 / 3.0),
            ("zeta0 < 0.02", self.zeta0 < 0.02),
            ("c1 > 0", self.c1 > 0.0),
            ("c2 > 0", self.c2 > 0.0),
            ("c3 < 1/3", self.c3 < 1.0 / 3.0),
            ("c4 < 0.615", self.c4 < 0.615),
            ("c5 < 1", self.c5 < 1.0),
            ("c6 > 0", self.c6 > 0.0),
            ("nu supports the volume bound",
             3.0 + (math.log2(12.0) + 0.5) / 2.0
             < 0.5 * (self.nu * math.log2(1.0 + self.c2) - math.log2(self.nu))),
        ]
        failed = [name for name, ok in checks if not ok]
        if failed:
            raise InvalidInputError(f"solver constants violate: {failed}")


DEFAULT_CONSTANTS = SolverConstants()


@dataclass(frozen=True)
class GeometryParams:
    """Accuracy split and radii governing the cut rule and stopping rules."""

    delta: float
    delta_prime: float
    epsilon_oracle: float
    delta_tilde: float
    r: float
    R: float
    r_s: float
    R_star: float
    u: float
    n: int


def _theta_root(delta_prime: float, eps: float, r_star: float) -> float:
    """Bisection root of sin(t) = (delta'/(R*+eps)) (2 cos(t) - 1) on (0, pi/3)."""
    coeff = delta_prime / (r_star + eps)

    def g(t: float) -> float:
        return math.sin(t) - coeff * (2.0 * math.cos(t) - 1.0)

    lo, hi = 0.0, math.pi / 3.0
    if g(hi) <= 0.0:
        raise NumericalFailureError("inner-cone angle bisection failed to bracket")
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def make_geometry(delta: float, R: float, r_s: float = 0.0, n: int | None = None) -> GeometryParams:
    """Derive the accuracy split, inner radius, and plane budget exponent.

    ``R`` is the outer radius of the body, ``r_s`` an inscribed-ball radius
    (0 in generic mode), ``n`` the ambient dimension.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidInputError(f"delta must lie in (0, 1), got {delta}")
    if R <= 0.0 or not 0.0 <= r_s < R:
        raise InvalidInputError(f"invalid radii R={R}, r_s={r_s}")
    if n is None or n < 1:
        raise InvalidInputError("ambient dimension n is required")
    delta_prime = 2.0 * delta / 5.0
    eps = delta / 5.0
    r_star = math.sqrt(R * R - r_s * r_s)
    theta = _theta_root(delta_prime, eps, r_star)
    r = math.sin(theta) * (1.0 - math.tan(theta / 2.0)) / (1.0 + math.tan(theta / 2.0))
    if not 0.0 < r < 1.0:
        raise NumericalFailureError(f"derived inner radius {r} out of range")
    u = 2.0 * math.log2(n) + math.log2(1.0 / r)
    return GeometryParams(delta, delta_prime, eps, delta_prime / (4.0 * R),
                          r, R, r_s, r_star, u, int(n))


@dataclass(frozen=True)
class Halfspace:
    """Constraint a^T x >= b with the distance kappa recorded at
    introduction or last reset."""

    a: np.ndarray
    b: float
    kappa: float


class SearchRegion:
    """Unit ball intersected with halfspaces, plus the approximate center."""

    def __init__(self, n: int):
        self.n = int(n)
        self._a = np.empty((0, n))
        self._b = np.empty(0)
        self._kappa = np.empty(0)
        self.z = np.zeros(n)

    @property
    def h(self) -> int:
        return self._a.shape[0]

    @property
    def normals(self) -> np.ndarray:
        return self._a

    @property
    def offsets(self) -> np.ndarray:
        return self._b

    @property
    def kappas(self) -> np.ndarray:
        return self._kappa

    @property
    def planes(self) -> list[Halfspace]:
        return [Halfspace(self._a[i].copy(), float(self._b[i]), float(self._kappa[i]))
                for i in range(self.h)]

    def add_plane(self, a: np.ndarray, b: float, kappa: float) -> None:
        a = np.asarray(a, dtype=float).reshape(-1)
        if a.shape != (self.n,):
            raise InvalidInputError("normal vector has wrong dimension")
        if abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise InvalidInputError("plane normals must be unit vectors")
        if b > 1e-12:
            raise InvalidInputError("plane offsets must be nonpositive")
        self._a = np.vstack([self._a, a[np.newaxis, :]])
        self._b = np.append(self._b, float(b))
        self._kappa = np.append(self._kappa, float(kappa))

    def remove_plane(self, index: int) -> None:
        self._a = np.delete(self._a, index, axis=0)
        self._b = np.delete(self._b, index)
        self._kappa = np.delete(self._kappa, index)

    def set_kappa(self, index: int, kappa: float) -> None:
        self._kappa[index] = float(kappa)

    def slacks(self, x: np.ndarray) -> np.ndarray:
        return self._a @ x - self._b

    def is_interior(self, x: np.ndarray) -> bool:
        ball = 1.0 - float(x @ x)
        return ball > 0.0 and (self.h == 0 or float(self.slacks(x).min()) > 0.0)


def barrier_value(region: SearchRegion, x: np.ndarray) -> float:
    """Barrier value alone (no derivative assembly)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    ball = 1.0 - float(x @ x)
    s = region.slacks(x)
    if ball <= 0.0 or (s.size and float(s.min()) <= 0.0):
        raise InvalidInputError("point is on or outside the region boundary")
    return -float(np.sum(np.log(s))) - math.log(ball)


def barrier_eval(region: SearchRegion, x: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Barrier value, gradient, and Hessian at a strictly interior point."""
    x = np.asarray(x, dtype=float).reshape(-1)
    ball = 1.0 - float(x @ x)
    s = region.slacks(x)
    if ball <= 0.0 or (s.size and float(s.min()) <= 0.0):
        raise InvalidInputError("point is on or outside the region boundary")
    value = -float(np.sum(np.log(s))) - math.log(ball)
    grad = -(region.normals.T @ (1.0 / s)) + 2.0 * x / ball
    hess = (region.normals.T @ (region.normals / (s * s)[:, np.newaxis])
            + 4.0 * np.outer(x, x) / (ball * ball)
            + 2.0 * np.eye(region.n) / ball)
    return value, grad, 0.5 * (hess + hess.T)


def _factor(hess: np.ndarray):
    try:
        return sla.cho_factor(hess, lower=True)
    except np.linalg.LinAlgError:
        pass
    reg = 1e-12 * float(np.trace(hess)) / hess.shape[0]
    try:
        return sla.cho_factor(hess + reg * np.eye(hess.shape[0]), lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError("barrier Hessian lost positive definiteness") from exc


def newton_measure(region: SearchRegion, x: np.ndarray) -> float:
    """Newton decrement sqrt(g^T H^{-1} g); zero exactly at the center."""
    _, grad, hess = barrier_eval(region, x)
    factor = _factor(hess)
    return math.sqrt(max(float(grad @ sla.cho_solve(factor, grad)), 0.0))


def sigma_value(region: SearchRegion, z: np.ndarray, index: int,
                factor=None) -> float:
    """Hessian-ellipsoid radius toward plane ``index`` over its squared slack."""
    if not 0 <= index < region.h:
        raise InvalidInputError(f"plane index {index} out of range")
    if factor is None:
        _, _, hess = barrier_eval(region, z)
        factor = _factor(hess)
    a = region.normals[index]
    quad = float(a @ sla.cho_solve(factor, a))
    slack = float(a @ z - region.offsets[index])
    return quad / (slack * slack)


def mu_value(region: SearchRegion, z: np.ndarray, index: int) -> float:
    """Current over introduction-time distance to plane ``index``."""
    if not 0 <= index < region.h:
        raise InvalidInputError(f"plane index {index} out of range")
    slack = float(region.normals[index] @ z - region.offsets[index])
    return slack / float(region.kappas[index])


def recenter(region: SearchRegion, x0: np.ndarray, constants: SolverConstants,
             delta_tilde: float, iteration_cap: int = 500,
             _out: dict | None = None) -> tuple[np.ndarray, int]:
    """Damped Newton to an approximate analytic center.

    Exits when lambda(x) < rho0 and q_lambda < (dt/(1+dt)) ||x|| / sqrt(2);
    the second test keeps normalized centers safe to hand to the oracle.
    """
    x = np.asarray(x0, dtype=float).reshape(-1).copy()
    a_mat = region.normals
    slack = region.slacks(x)
    ball = 1.0 - float(x @ x)
    if ball <= 0.0 or float(slack.min()) <= 0.0:
        raise InvalidInputError("recentering must start strictly inside the region")
    dt_ratio = delta_tilde / (1.0 + delta_tilde)
    eye = np.eye(region.n)
    iters = 0
    while True:
        inv_s = 1.0 / slack
        grad = -(a_mat.T @ inv_s) + 2.0 * x / ball
        hess = (a_mat.T @ (a_mat * (inv_s * inv_s)[:, np.newaxis])
                + 4.0 * np.outer(x, x) / (ball * ball) + 2.0 * eye / ball)
        hess = 0.5 * (hess + hess.T)
        factor = _factor(hess)
        step = sla.cho_solve(factor, grad)
        lam = math.sqrt(max(float(grad @ step), 0.0))
        if lam < constants.rho0 and q_of(lam) < dt_ratio * np.linalg.norm(x) / math.sqrt(2.0):
            if _out is not None:
                _out.update(grad=grad, hess=hess, factor=factor, lam=lam, slack=slack)
            return x, iters
        if iters >= iteration_cap:
            raise NumericalFailureError(
                "recentering exceeded its iteration cap",
                state={"lambda": lam, "iterations": iters, "norm_x": float(np.linalg.norm(x))},
            )
        varsigma = 1.0 / (1.0 + lam) if lam >= constants.lambda_star else 1.0
        tries = 0
        while True:
            candidate = x - varsigma * step
            cand_slack = region.slacks(candidate)
            cand_ball = 1.0 - float(candidate @ candidate)
            if cand_ball > 0.0 and float(cand_slack.min()) > 0.0:
                break
            varsigma *= 0.5
            tries += 1
            if tries > 60:
                raise NumericalFailureError("Newton step could not stay interior")
        x, slack, ball = candidate, cand_slack, cand_ball
        iters += 1


def add_cut(region: SearchRegion, z: np.ndarray, a: np.ndarray,
            constants: SolverConstants, delta_tilde: float,
            iteration_cap: int = 500, force_central: bool = False,
            hess: np.ndarray | None = None) -> dict:
    """Shift a new plane behind the center by the gamma0 rule and recenter.

    The offset solves (a^T H^{-1} a) / (a^T z - beta)^2 = gamma0^2, clamped
    to beta <= 0 so later width bounds keep their sign assumptions.  kappa is
    recorded against the new center.  Mutates ``region`` (plane list and z).
    ``hess``, when given, must be the barrier Hessian at ``z`` for the
    current plane set.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    if hess is None:
        _, _, hess = barrier_eval(region, z)
    factor = _factor(hess)
    quad = float(a @ sla.cho_solve(factor, a))
    if quad <= 0.0:
        raise NumericalFailureError("cut direction has nonpositive Hessian quadratic form")
    if force_central:
        beta = 0.0
    else:
        beta = float(a @ z) - math.sqrt(quad) / constants.gamma0
        beta = min(beta, 0.0)
    region.add_plane(a, beta, kappa=1.0)
    f_before = barrier_value(region, z)
    exit_state: dict = {}
    z_new, iters = recenter(region, z, constants, delta_tilde, iteration_cap,
                            _out=exit_state)
    kappa = float(a @ z_new - beta)
    region.set_kappa(region.h - 1, kappa)
    region.z = z_new
    f_after = barrier_value(region, z_new)
    return {
        "beta": beta,
        "kappa": kappa,
        "newton_iterations": iters,
        "barrier_drop": f_before - f_after,
        "entry_quadratic_over_kappa_sq": quad / (kappa * kappa),
        "exit_state": exit_state,
    }


def discard_cut(region: SearchRegion, z: np.ndarray, index: int,
                constants: SolverConstants, delta_tilde: float,
                iteration_cap: int = 500) -> dict:
    """Drop a stale plane (requires mu > 2 and sigma < sigma0) and recenter."""
    if mu_value(region, z, index) <= 2.0:
        raise InvalidInputError("discard requires mu > 2")
    if sigma_value(region, z, index) >= constants.sigma0:
        raise InvalidInputError("discard requires sigma < sigma0")
    region.remove_plane(index)
    f_before = barrier_value(region, z)
    exit_state: dict = {}
    z_new, iters = recenter(region, z, constants, delta_tilde, iteration_cap,
                            _out=exit_state)
    region.z = z_new
    f_after = barrier_value(region, z_new)
    return {
        "newton_iterations": iters,
        "barrier_drop": f_before - f_after,
        "exit_state": exit_state,
    }


def should_stop(region: SearchRegion, z: np.ndarray, geom: GeometryParams,
                constants: SolverConstants, dynamic: bool = True,
                hess: np.ndarray | None = None,
                slack: np.ndarray | None = None) -> str | None:
    """Stopping conditions; returns the reason string or None.

    The static plane-count condition always applies (it is the oracle-call
    budget); dynamic mode tightens the width and volume conditions using the
    current Hessian instead of worst-case constants.
    """
    h = region.h
    n = region.n
    if h >= constants.nu * n * geom.u:
        return "volume-static"
    if h == 0:
        return None
    slack_min = float((region.slacks(z) if slack is None else slack).min())
    if not dynamic:
        if 2.0 * geom.r > slack_min / (1.0 - constants.zeta0) * (3.0 * h + 4.0):
            return "width-static"
        return None
    if hess is None:
        _, _, hess = barrier_eval(region, z)
    eigs = np.linalg.eigvalsh(hess)
    lam_max_inv = 1.0 / float(eigs[0])
    varpi = (h + 2.0) / 2.0
    reach = float(np.linalg.norm(z)) + constants.zeta0 * math.sqrt(max(lam_max_inv, 0.0))
    if reach < 1.0:
        varpi = min(varpi, 1.0 / (1.0 - reach * reach))
    if 2.0 * geom.r > slack_min / (1.0 - constants.zeta0) * (h + 4.0 * varpi):
        return "width-dynamic"
    inner = h * h + h * (8.0 * varpi - 1.0) - 16.0 * varpi + 32.0 * varpi * varpi + 2.0
    theta_prime = math.sqrt(2.0 * (inner / (1.0 - constants.zeta0) ** 2 + constants.zeta0**2))
    threshold = ((2.0 * n * math.log2(2.0 * n * theta_prime / geom.r) + n)
                 / math.log2(1.0 + constants.c2) + math.log2(4.0 / 5.0))
    if h > threshold:
        return "volume-dynamic"
    return None


@dataclass(frozen=True)
class OracleReply:
    """What the weak optimisation oracle hands back for a query direction."""

    point: np.ndarray
    detail: object | None = None


@dataclass(frozen=True)
class FeasibilityOutcome:
    kind: str  # DirectionFound | RegionExhausted
    direction: np.ndarray | None
    certificate: dict | None
    diagnostics: dict


@dataclass(frozen=True)
class PresearchResult:
    direction: np.ndarray | None
    oracle_calls: int


def _newton_cap(constants: SolverConstants, geom: GeometryParams) -> int:
    t = (geom.delta_tilde / (1.0 + geom.delta_tilde)
         * math.sqrt(2.0) * geom.r * (1.0 - constants.zeta0)
         / (3.0 * constants.nu * geom.n * geom.u + 4.0))
    rho_floor = max(q_inverse(min(t, 0.999999)), 1e-16)
    analytic = (math.ceil(constants.c_add / constants.lambda_star)
                + math.ceil(math.log2(constants.lambda_star / rho_floor)) + 2)
    return int(10 * analytic)


def _newton_bound(constants: SolverConstants, delta_tilde: float,
                  z_norm: float, budget_constant: float) -> int:
    """Per-recentering iteration bound at the exit tolerance the final
    center actually required."""
    t = delta_tilde / (1.0 + delta_tilde) * z_norm / math.sqrt(2.0)
    rho_eff = constants.rho0 if t >= 1.0 else min(constants.rho0, q_inverse(t))
    rho_eff = max(rho_eff, 1e-300)
    return (math.ceil(budget_constant / constants.lambda_star)
            + math.ceil(math.log2(constants.lambda_star / rho_eff)) + 2)


class _InvariantChecker:
    """Runtime assertions mirroring the solver's convergence lemmas."""

    def __init__(self, constants: SolverConstants, geom: GeometryParams,
                 samples: int, seed: int):
        self.constants = constants
        self.geom = geom
        self.samples = samples
        self.rng = np.random.default_rng(seed)
        self.violations: list[dict] = []

    def _record(self, kind: str, **data) -> None:
        self.violations.append({"kind": kind, **data})

    def determinant_growth(self, region: SearchRegion, z: np.ndarray,
                           hess: np.ndarray | None = None) -> None:
        """det(H(z)) > 2^-n * 2.5 * (1+C2)^(h-1) whenever Case 2 is entered."""
        if hess is None:
            _, _, hess = barrier_eval(region, z)
        sign, logdet = np.linalg.slogdet(hess)
        bound = (-region.n * math.log(2.0) + math.log(2.5)
                 + (region.h - 1) * math.log1p(self.constants.c2))
        if sign <= 0 or logdet <= bound + 1e-9:
            self._record("determinant-growth", h=region.h, logdet=float(logdet),
                         bound=float(bound))

    def ellipsoid_containment(self, region: SearchRegion, z: np.ndarray,
                              hess: np.ndarray | None = None,
                              slack: np.ndarray | None = None) -> None:
        """Sampled boundary points of E(H(z), z, 1) must lie inside the region.

        Planes whose slack at z exceeds the largest sampled displacement
        cannot be violated and are screened out before the slack test.
        """
        if hess is None:
            _, _, hess = barrier_eval(region, z)
        try:
            chol = np.linalg.cholesky(hess)
        except np.linalg.LinAlgError:
            self._record("ellipsoid-containment", reason="hessian not PD", h=region.h)
            return
        u = self.rng.standard_normal((self.samples, region.n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        disp = sla.solve_triangular(chol.T, u.T, lower=False).T
        pts = z[np.newaxis, :] + disp
        ball_ok = np.einsum("ij,ij->i", pts, pts) <= 1.0 + 1e-10
        slack_ok = np.ones(self.samples, dtype=bool)
        if region.h:
            if slack is None:
                slack = region.slacks(z)
            reach = float(np.max(np.linalg.norm(disp, axis=1)))
            close = np.nonzero(slack <= reach + 1e-12)[0]
            if close.size:
                sub = region.normals[close]
                slacks = pts @ sub.T - region.offsets[close][np.newaxis, :]
                slack_ok = slacks.min(axis=1) >= -1e-10
        bad = int(np.sum(~(ball_ok & slack_ok)))
        if bad:
            self._record("ellipsoid-containment", h=region.h, outside=bad)

    def conic_residual(self, region: SearchRegion, z: np.ndarray,
                       grad: np.ndarray | None = None,
                       hess: np.ndarray | None = None,
                       lam: float | None = None) -> None:
        """The center must be a conic combination of the normals within the
        center-containment slack.

        The best nonnegative-weight residual of z against the normals is
        bounded by ||z - omega|| <= q_lambda sqrt(lambda_max(H^-1)), since the
        exact center is itself such a combination; 10 lambda dominates
        q_lambda with room to spare.  The fixed barrier weights give a cheap
        upper bound on that residual; the exact nonnegative least-squares
        value is only computed when the cheap bound is inconclusive.
        """
        if grad is None or hess is None or lam is None:
            _, grad, hess = barrier_eval(region, z)
            factor = _factor(hess)
            lam = math.sqrt(max(float(grad @ sla.cho_solve(factor, grad)), 0.0))
        lam_max_inv = 1.0 / float(np.linalg.eigvalsh(hess)[0])
        bound = 10.0 * lam * math.sqrt(max(lam_max_inv, 0.0))
        ball = 1.0 - float(z @ z)
        cheap = 0.5 * ball * float(np.linalg.norm(grad))
        if cheap <= bound + 1e-15:
            return
        from scipy.optimize import nnls

        # Any feasible weight vector upper-bounds the best residual, so try
        # the planes the center actually leans on (smallest slack) first and
        # widen only if inconclusive.
        h = region.h
        order = np.argsort(region.slacks(z))
        residual = math.inf
        for size in (4 * region.n, 16 * region.n, h):
            if size >= h:
                _, residual = nnls(region.normals.T, z)
                break
            _, residual = nnls(region.normals[order[:size]].T, z)
            if residual <= bound + 1e-15:
                break
        if residual > bound + 1e-15:
            self._record("conic-residual", h=h, residual=float(residual),
                         bound=bound, lam=lam)

    def newton_count(self, iters: int, z_norm: float, budget_constant: float,
                     context: str) -> None:
        bound = _newton_bound(self.constants, self.geom.delta_tilde, z_norm,
                              budget_constant)
        if iters > bound:
            self._record("newton-count", context=context, iterations=iters,
                         bound=bound)

    def barrier_drop(self, drop: float, limit: float, context: str) -> None:
        if drop > limit + 1e-9:
            self._record("barrier-drop", context=context, drop=drop, limit=limit)

    def new_plane_relevance(self, value: float) -> None:
        """After a cut, the added plane keeps at least the C1 relevance floor."""
        if value < self.constants.c1 - 1e-12:
            self._record("new-plane-relevance", value=value, floor=self.constants.c1)


def solve(p: np.ndarray, oracle, geom: GeometryParams,
          constants: SolverConstants = DEFAULT_CONSTANTS, *,
          dynamic: bool = True, accept_hook=None, check_invariants: bool = False,
          diagnostics_sink=None, containment_samples: int = 1000,
          sample_seed: int = 20240701) -> FeasibilityOutcome:
    """Either find a unit direction c with c^T p >= c^T k_c + epsilon, or
    certify that the target point is within delta of the body.

    ``oracle(c, epsilon, early)`` must return an :class:`OracleReply` whose
    point lies in the body.  ``accept_hook(c, reply)``, when given, can veto
    an acceptance and supply a better point to cut with instead.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    n = p.size
    if geom.n != n:
        raise InvalidInputError(f"geometry dimension {geom.n} != point dimension {n}")
    norm_p = float(np.linalg.norm(p))
    if norm_p < 1e-9:
        raise InvalidInputError("target point coincides with the known interior point")
    if norm_p > 1.0 + 1e-12:
        raise InvalidInputError("target point must be scaled into the unit ball")

    region = SearchRegion(n)
    a1 = p / norm_p
    region.add_plane(a1, 0.0, kappa=1.0 / math.sqrt(3.0))
    region.z = a1 / math.sqrt(3.0)
    eps = geom.epsilon_oracle
    cap = _newton_cap(constants, geom)
    checker = (_InvariantChecker(constants, geom, containment_samples, sample_seed)
               if check_invariants else None)

    oracle_budget = constants.nu * n * geom.u + 1.0
    sigma_scan_cap = math.ceil(n / constants.sigma0) + 1
    oracle_calls = 0
    planes_added = 0
    planes_discarded = 0
    newton_total = 0
    iteration = 0
    max_iterations = int(10 * constants.nu * n * geom.u) + 1000

    def _emit(record: dict) -> None:
        if diagnostics_sink is None:
            return
        if callable(diagnostics_sink):
            diagnostics_sink(record)
        else:
            diagnostics_sink.append(record)

    def _diagnostics(stop_reason: str | None) -> dict:
        out = {
            "oracleCalls": oracle_calls,
            "planesAdded": planes_added,
            "planesDiscarded": planes_discarded,
            "newtonIterationsTotal": newton_total,
            "stopReason": stop_reason,
            "iterations": iteration,
        }
        if checker is not None:
            out["invariantViolations"] = checker.violations
        return out

    last_hess = None
    last_slack = None
    while True:
        iteration += 1
        if iteration > max_iterations:
            raise NumericalFailureError("cutting-plane loop exceeded its iteration cap",
                                        state={"iteration": iteration, "h": region.h})
        z = region.z
        slack_now = last_slack if last_slack is not None else region.slacks(z)
        mus = slack_now / region.kappas
        case = None
        if float(mus.max()) > 2.0:
            candidates = [int(i) for i in np.nonzero(mus > 2.0)[0]]
            if last_hess is None:
                _, _, hess = barrier_eval(region, z)
            else:
                hess = last_hess
            factor = _factor(hess)
            discard_index = None
            evaluations = 0
            for j in candidates:
                if evaluations >= sigma_scan_cap:
                    break
                evaluations += 1
                if sigma_value(region, z, j, factor=factor) < constants.sigma0:
                    discard_index = j
                    break
            if discard_index is not None:
                case = "1.1"
                info = discard_cut(region, z, discard_index, constants,
                                   geom.delta_tilde, cap)
                planes_discarded += 1
                newton_total += info["newton_iterations"]
                last_hess = info["exit_state"].get("hess")
                last_slack = info["exit_state"].get("slack")
                if checker is not None:
                    state = info["exit_state"]
                    checker.barrier_drop(info["barrier_drop"], constants.c_discard,
                                         "discard")
                    checker.newton_count(info["newton_iterations"],
                                         float(np.linalg.norm(region.z)),
                                         constants.c_discard, "discard")
                    checker.conic_residual(region, region.z, grad=state.get("grad"),
                                           hess=state.get("hess"), lam=state.get("lam"))
            else:
                case = "1.2"
                region.set_kappa(candidates[0], float(slack_now[candidates[0]]))
        else:
            case = "2"
            if checker is not None:
                checker.determinant_growth(region, z, hess=last_hess)
            if oracle_calls + 1 > oracle_budget:
                return FeasibilityOutcome(REGION_EXHAUSTED, None, None,
                                          _diagnostics("oracle-budget"))
            c = z / np.linalg.norm(z)
            oracle_calls += 1
            reply = oracle(c, eps, EarlyStopContext(float(c @ p), MODE_CUT_IF_BELOW))
            k = np.asarray(reply.point, dtype=float).reshape(-1)
            margin = float(c @ p) - float(c @ k)
            if margin >= eps:
                verdict = True
                if accept_hook is not None:
                    verdict, better = accept_hook(c, reply)
                    if not verdict:
                        reply = better
                        k = np.asarray(better.point, dtype=float).reshape(-1)
                        margin = float(c @ p) - float(c @ k)
                        if margin >= eps:
                            raise NumericalFailureError(
                                "acceptance veto did not produce a refuting point")
                if verdict:
                    certificate = {
                        "k": k,
                        "cTp": float(c @ p),
                        "cTk": float(c @ k),
                        "epsilon": eps,
                    }
                    return FeasibilityOutcome(DIRECTION_FOUND, c, certificate,
                                              _diagnostics("accepted"))
            residual = (p - k) - float(c @ (p - k)) * c
            norm_res = float(np.linalg.norm(residual))
            if norm_res <= eps:
                # The cut rule guarantees m^T a_bar > delta' - eps = eps for
                # every surviving direction m; a residual this short means
                # none survives, so exhaustion is certified.
                return FeasibilityOutcome(REGION_EXHAUSTED, None, None,
                                          _diagnostics("degenerate-cut"))
            info = add_cut(region, z, residual / norm_res, constants,
                           geom.delta_tilde, cap, hess=last_hess)
            planes_added += 1
            newton_total += info["newton_iterations"]
            last_hess = info["exit_state"].get("hess")
            last_slack = info["exit_state"].get("slack")
            if checker is not None:
                state = info["exit_state"]
                checker.barrier_drop(info["barrier_drop"], constants.c_add, "add")
                checker.newton_count(info["newton_iterations"],
                                     float(np.linalg.norm(region.z)),
                                     constants.c_add, "add")
                checker.conic_residual(region, region.z, grad=state.get("grad"),
                                       hess=state.get("hess"), lam=state.get("lam"))
                checker.new_plane_relevance(info["entry_quadratic_over_kappa_sq"])

        if checker is not None:
            checker.ellipsoid_containment(region, region.z, hess=last_hess,
                                          slack=last_slack)
        if diagnostics_sink is not None:
            _emit({
                "iter": iteration,
                "case": case,
                "h": region.h,
                "lambda": newton_measure(region, region.z),
                "minSlack": float(region.slacks(region.z).min()),
                "oracleCalls": oracle_calls,
            })
        reason = should_stop(region, region.z, geom, constants, dynamic,
                             hess=last_hess, slack=last_slack)
        if reason is not None:
            return FeasibilityOutcome(REGION_EXHAUSTED, None, None, _diagnostics(reason))


def heuristic_presearch(p: np.ndarray, oracle, n_prime: int = 200,
                        eps: float = 1e-6) -> PresearchResult:
    """Cheap direction search: nudge the test vector away from the returned
    maximizer and toward the target until it separates or the budget ends."""
    p = np.asarray(p, dtype=float).reshape(-1)
    norm_p = float(np.linalg.norm(p))
    if norm_p <= 0.0:
        raise InvalidInputError("presearch needs a nonzero target point")
    c = p / norm_p
    calls = 0
    for _ in range(int(n_prime)):
        reply = oracle(c, eps, EarlyStopContext(float(c @ p), MODE_CUT_IF_BELOW))
        calls += 1
        k = np.asarray(reply.point, dtype=float).reshape(-1)
        gap = float(c @ k) - float(c @ p)
        if gap <= -eps:
            return PresearchResult(c, calls)
        drift = p - k
        norm_drift = float(np.linalg.norm(drift))
        if norm_drift < 1e-15:
            break
        c = c + gap * drift / norm_drift
        c = c / np.linalg.norm(c)
    return PresearchResult(None, calls)
