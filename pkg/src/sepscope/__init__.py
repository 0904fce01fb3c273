"""Bipartite quantum separability at desk scale.

One-sided separability tests, a product-state optimisation oracle, an
analytic-center cutting-plane search for entanglement witnesses, and
certificate verification utilities, with a JSON-speaking CLI.
"""

from .accpm import (
    DEFAULT_CONSTANTS,
    DIRECTION_FOUND,
    REGION_EXHAUSTED,
    FeasibilityOutcome,
    GeometryParams,
    Halfspace,
    OracleReply,
    SearchRegion,
    SolverConstants,
    add_cut,
    barrier_eval,
    discard_cut,
    heuristic_presearch,
    make_geometry,
    mu_value,
    newton_measure,
    q_of,
    recenter,
    should_stop,
    sigma_value,
    solve,
)
from .certify import (
    CertificateCheck,
    GilbertResult,
    SeparableCertificate,
    affine_independent,
    gilbert_distance,
    hull_membership,
    truncate_to_bits,
    verify_qsep_certificate,
)
from .errors import (
    BudgetExceededError,
    DimensionMismatchError,
    InvalidInputError,
    NumericalFailureError,
    SepscopeError,
)
from .hermops import (
    BlochVector,
    DensityMatrix,
    HermitianOp,
    ObservableBasis,
    PureProductState,
    bell_density,
    bell_ket,
    bloch_lift,
    bloch_project,
    build_basis,
    eig_hermitian,
    maximally_mixed,
    partial_trace,
    partial_transpose,
    purity,
    realign,
    trace_norm,
)
from .onesided import (
    ENTANGLED,
    INCONCLUSIVE,
    SEPARABLE,
    TestOutcome,
    ball_test,
    ccnr_test,
    entropic_test,
    m2_ppt_sufficient_test,
    majorisation_test,
    ppt_test,
    reduction_test,
    run_battery,
)
from .oracle import (
    NO_EARLY_STOP,
    EarlyStopContext,
    OracleResult,
    SeesawResult,
    b_star,
    eps_net_b_star,
    expectation,
    net_evaluation_count,
    seesaw,
)
from .witness import (
    SEPARABLE_WITHIN_DELTA,
    WITNESS_FOUND,
    NoisyBellResult,
    SandwichResult,
    SeparableOracle,
    WitnessVerdict,
    d_rho,
    find_witness,
    noisy_bell_check,
    sandwich,
    sep_geometry,
    separable_radii,
)

__version__ = "0.1.0"
