"""Command-line front end.

Subcommands: ``test`` (one-sided battery), ``witness`` (witness search /
separability within delta), ``oracle`` (product-state optimisation),
``distance`` (nearest-separable estimate), ``verify-cert`` (certificate
check).  Output is deterministic JSON on stdout; exit status 0 for a
verdict, 2 for invalid input, 3 for numerical failure.  The environment
variable SEPSCOPE_SEED overrides --seed for CI reproducibility.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import certify, onesided, oracle as oracle_mod, stateio, witness as witness_mod
from .errors import InvalidInputError, NumericalFailureError, SepscopeError

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_NUMERICAL_FAILURE = 3


def _parse_observables(text: str) -> tuple[int, ...]:
    try:
        indices = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise InvalidInputError(f"bad observable list {text!r}") from exc
    if not indices:
        raise InvalidInputError("observable list is empty")
    return indices


def _resolve_seed(args) -> int:
    env = os.environ.get("SEPSCOPE_SEED")
    if env is not None:
        try:
            seed = int(env)
        except ValueError as exc:
            raise InvalidInputError(f"SEPSCOPE_SEED={env!r} is not an integer") from exc
    else:
        seed = args.seed
    if seed < 0:
        raise InvalidInputError("seed must be nonnegative")
    return seed


def _check_delta(delta: float) -> float:
    if not 0.0 < delta < 1.0:
        raise InvalidInputError(f"delta must lie in (0, 1), got {delta}")
    return delta


def _cmd_test(args) -> dict:
    rho = stateio.load_state(args.input)
    outcomes, combined = onesided.run_battery(rho)
    return {
        "command": "test",
        "dims": [rho.dims[0], rho.dims[1]],
        "tests": [
            {
                "name": out.test_name,
                "verdict": out.verdict,
                "witnessValue": out.witness_value,
                "conclusive": out.conclusive,
            }
            for out in outcomes
        ],
        "combined": combined,
    }


def _cmd_witness(args) -> dict:
    rho = stateio.load_state(args.input)
    delta = _check_delta(args.delta)
    seed = _resolve_seed(args)
    observables = _parse_observables(args.observables) if args.observables else None
    diagnostics_records: list[dict] = [] if args.diagnostics else None

    if args.heuristic_only:
        basis = witness_mod.build_basis(*rho.dims)
        index_set = observables or basis.full_index_set()
        geom = witness_mod.sep_geometry(*rho.dims, delta, dimension=len(index_set))
        p_vec = witness_mod.bloch_project(rho, basis, index_set).coords
        result: dict = {"command": "witness", "indexSet": list(index_set)}
        if float(np.linalg.norm(p_vec)) < 1e-9:
            result["verdict"] = witness_mod.SEPARABLE_WITHIN_DELTA
            return result
        sep_oracle = witness_mod.SeparableOracle(basis, index_set,
                                                 budget=args.budget, seed=seed)
        from .accpm import heuristic_presearch

        pre = heuristic_presearch(p_vec, sep_oracle, n_prime=args.presearch_iters,
                                  eps=geom.epsilon_oracle)
        if pre.direction is None:
            result["verdict"] = "Inconclusive"
            result["diagnostics"] = {"presearchCalls": pre.oracle_calls}
            return result
        direction = pre.direction / np.linalg.norm(pre.direction)
        lifted = sep_oracle.lift(direction)
        best = oracle_mod.b_star(lifted, geom.epsilon_oracle, budget=4 * args.budget,
                                 seed=seed + 1)
        margin = float(direction @ p_vec) - best.lower_bound
        result.update({
            "verdict": witness_mod.WITNESS_FOUND if margin >= geom.epsilon_oracle
            else "Inconclusive",
            "witnessMatrix": stateio.complex_matrix_to_pairs(lifted.matrix),
            "witnessBloch": [float(x) for x in direction],
            "bStar": best.lower_bound,
            "margin": margin,
            "diagnostics": {"presearchCalls": pre.oracle_calls},
        })
        return result

    verdict = witness_mod.find_witness(
        rho, delta, observables,
        heuristic_first=not args.no_heuristic,
        dynamic_stops=not args.static_stops,
        oracle_budget=args.budget,
        seed=seed,
        presearch_iters=args.presearch_iters,
        diagnostics_sink=diagnostics_records,
    )
    out = {
        "command": "witness",
        "verdict": verdict.kind,
        "indexSet": list(verdict.index_set),
        "bStar": verdict.b_star_estimate,
        "margin": verdict.margin,
        "diagnostics": {
            k: v for k, v in verdict.diagnostics.items() if k != "invariantViolations"
        },
    }
    if verdict.witness is not None:
        out["witnessMatrix"] = stateio.complex_matrix_to_pairs(verdict.witness.matrix)
        out["witnessBloch"] = [float(x) for x in verdict.witness_bloch]
    else:
        out["witnessMatrix"] = None
        out["witnessBloch"] = None
    if args.diagnostics:
        for record in diagnostics_records:
            sys.stderr.write(stateio.dumps(record, indent=0).replace("\n", "") + "\n")
    return out


def _cmd_oracle(args) -> dict:
    op = stateio.load_operator(args.input)
    seed = _resolve_seed(args)
    if args.epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    if args.net:
        result = oracle_mod.eps_net_b_star(op, args.epsilon)
    else:
        result = oracle_mod.b_star(op, args.epsilon, budget=args.restarts, seed=seed)
    return {
        "command": "oracle",
        "lowerBound": result.lower_bound,
        "upperBound": result.upper_bound,
        "epsilon": result.epsilon,
        "terminatedEarly": result.terminated_early,
        "evaluations": result.evaluations,
        "boundRegime": result.bound_regime,
        "maximizer": {
            "alpha": stateio.complex_vector_to_pairs(result.maximizer.alpha),
            "beta": stateio.complex_vector_to_pairs(result.maximizer.beta),
        },
    }


def _cmd_distance(args) -> dict:
    rho = stateio.load_state(args.input)
    seed = _resolve_seed(args)
    result = certify.gilbert_distance(rho, max_iters=args.max_iters, tol=args.tol,
                                      budget=args.restarts, seed=seed)
    return {
        "command": "distance",
        "distance": result.distance,
        "iterations": result.iterations,
        "nearestBloch": [float(x) for x in result.nearest.coords],
    }


def _cmd_verify_cert(args) -> dict:
    rho = stateio.load_state(args.input)
    cert = stateio.load_certificate(args.certificate)
    if args.eps_prime <= 0 or args.delta_prime <= 0:
        raise InvalidInputError("tolerances must be positive")
    check = certify.verify_qsep_certificate(rho, cert, args.eps_prime, args.delta_prime)
    return {
        "command": "verify-cert",
        "accepted": check.accepted,
        "normCheckMax": check.norm_check_max,
        "distance": check.distance,
        "normalizedGapBound": check.normalized_gap_bound,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sepscope",
        description="Bipartite separability tests and entanglement-witness search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run the one-sided test battery")
    p_test.add_argument("--input", required=True, help="state JSON file")
    p_test.set_defaults(func=_cmd_test)

    p_wit = sub.add_parser("witness", help="search for an entanglement witness")
    p_wit.add_argument("--input", required=True, help="state JSON file")
    p_wit.add_argument("--delta", type=float, required=True,
                       help="separation accuracy in (0, 1)")
    p_wit.add_argument("--observables", default=None,
                       help="comma-separated basis indices spanning the search")
    p_wit.add_argument("--heuristic-only", action="store_true", dest="heuristic_only",
                       help="run only the cheap pre-search")
    p_wit.add_argument("--no-heuristic", action="store_true", dest="no_heuristic",
                       help="skip the pre-search and go straight to the solver")
    p_wit.add_argument("--static-stops", action="store_true", dest="static_stops",
                       help="use the worst-case stopping conditions")
    p_wit.add_argument("--seed", type=int, default=0)
    p_wit.add_argument("--budget", type=int, default=64,
                       help="oracle restart budget per query")
    p_wit.add_argument("--presearch-iters", type=int, default=200)
    p_wit.add_argument("--diagnostics", action="store_true",
                       help="stream one JSON line per solver iteration to stderr")
    p_wit.set_defaults(func=_cmd_witness)

    p_orc = sub.add_parser("oracle", help="optimise an observable over product states")
    p_orc.add_argument("--input", required=True, help="operator JSON file")
    p_orc.add_argument("--epsilon", type=float, default=1e-6)
    p_orc.add_argument("--restarts", type=int, default=64)
    p_orc.add_argument("--net", action="store_true",
                       help="force the certified enumeration (MN <= 6 only)")
    p_orc.add_argument("--seed", type=int, default=0)
    p_orc.set_defaults(func=_cmd_oracle)

    p_dst = sub.add_parser("distance", help="nearest-separable distance estimate")
    p_dst.add_argument("--input", required=True, help="state JSON file")
    p_dst.add_argument("--max-iters", type=int, default=10_000, dest="max_iters")
    p_dst.add_argument("--tol", type=float, default=1e-7)
    p_dst.add_argument("--restarts", type=int, default=8)
    p_dst.add_argument("--seed", type=int, default=0)
    p_dst.set_defaults(func=_cmd_distance)

    p_ver = sub.add_parser("verify-cert", help="check a separable-decomposition certificate")
    p_ver.add_argument("--input", required=True, help="state JSON file")
    p_ver.add_argument("--certificate", required=True, help="certificate JSON file")
    p_ver.add_argument("--eps-prime", type=float, required=True, dest="eps_prime")
    p_ver.add_argument("--delta-prime", type=float, required=True, dest="delta_prime")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.set_defaults(func=_cmd_verify_cert)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except NumericalFailureError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        if exc.state:
            sys.stderr.write(stateio.dumps({"diagnostics": exc.state}))
        return EXIT_NUMERICAL_FAILURE
    except (InvalidInputError, SepscopeError, ValueError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INVALID_INPUT
    sys.stdout.write(stateio.dumps(report))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
