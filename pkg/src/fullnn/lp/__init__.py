from fullnn.lp.engine import (
    check_dual,
    choose_backend,
    dump_lp,
    maximize,
    row_residual,
    solve_feasibility,
    verify_certificate,
)
from fullnn.lp.models import (
    FarkasCertificate,
    LinearProgram,
    LPBuilder,
    LPInfeasibleError,
    LPUnboundedError,
    MalformedLPError,
    NumericalAmbiguityError,
    Relation,
    SolveResult,
    SolveStatus,
    lp_from_dense,
    normalize,
)

__all__ = [
    "FarkasCertificate",
    "LPBuilder",
    "LPInfeasibleError",
    "LPUnboundedError",
    "LinearProgram",
    "MalformedLPError",
    "NumericalAmbiguityError",
    "Relation",
    "SolveResult",
    "SolveStatus",
    "check_dual",
    "choose_backend",
    "dump_lp",
    "lp_from_dense",
    "maximize",
    "normalize",
    "row_residual",
    "solve_feasibility",
    "verify_certificate",
]
