from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from fullnn.core.config import FullNNConfig, default_config
from fullnn.lp import highs, simplex
from fullnn.lp.models import (
    FarkasCertificate,
    LinearProgram,
    LPInfeasibleError,
    LPUnboundedError,
    MalformedLPError,
    NormalizedLP,
    NumericalAmbiguityError,
    SolveResult,
    SolveStatus,
    normalize,
)
from fullnn.lp.simplex import MaximizeResult, Phase1Result

logger = logging.getLogger(__name__)


class Backend(Protocol):
    name: str

    def phase1(self, problem: NormalizedLP) -> Phase1Result: ...

    def maximize(self, problem: NormalizedLP, objective: np.ndarray) -> MaximizeResult: ...


@dataclass(frozen=True)
class SimplexBackend:
    max_iterations: int = 200_000
    name: str = "simplex"

    def phase1(self, problem: NormalizedLP) -> Phase1Result:
        return simplex.solve_phase1(problem, self.max_iterations)

    def maximize(self, problem: NormalizedLP, objective: np.ndarray) -> MaximizeResult:
        return simplex.maximize(problem, objective, self.max_iterations)


@dataclass(frozen=True)
class HighsBackend:
    name: str = "highs"

    def phase1(self, problem: NormalizedLP) -> Phase1Result:
        return highs.solve_phase1(problem)

    def maximize(self, problem: NormalizedLP, objective: np.ndarray) -> MaximizeResult:
        return highs.maximize(problem, objective)


def choose_backend(lp: LinearProgram, config: FullNNConfig) -> Backend:
    choice = config.lp.backend
    if choice == "auto":
        tableau = lp.n_rows * (lp.n_vars + 2 * lp.n_rows)
        choice = "simplex" if tableau <= config.lp.dense_limit else "highs"
    if choice == "simplex":
        return SimplexBackend(config.lp.max_iterations)
    return HighsBackend()


def row_residual(problem: NormalizedLP, x: np.ndarray) -> float:
    """Largest row violation, each row measured relative to max(1, max|a_i|)."""
    if problem.shape[0] == 0:
        return 0.0
    lhs = problem.a_hat @ x
    gap = problem.b_hat - lhs
    gap = np.where(problem.is_eq, np.abs(gap), np.maximum(gap, 0.0))
    scale = np.maximum(1.0, abs(problem.a_hat).max(axis=1).toarray().ravel())
    bound_gap = np.maximum(problem.lower - x, 0.0)
    bound_gap = np.where(np.isfinite(bound_gap), bound_gap, 0.0)
    return float(max(np.max(gap / scale), bound_gap.max(initial=0.0)))


def certificate_margin(lp: LinearProgram, y: np.ndarray) -> float:
    """y.b_hat plus the implicit bound multipliers' contribution w.l."""
    problem = normalize(lp)
    g = problem.a_hat.T @ y
    bounded = np.isfinite(problem.lower)
    w_term = -np.sum(np.minimum(g[bounded], 0.0) * problem.lower[bounded])
    return float(y @ problem.b_hat + w_term)


def check_dual(lp: LinearProgram, y: np.ndarray, dual_tol: float = 1e-7) -> bool:
    """The part of the Farkas conditions that does not involve the right-hand side."""
    problem = normalize(lp)
    if y.shape != (lp.n_rows,) or not np.all(np.isfinite(y)):
        return False
    if np.any(y[~problem.is_eq] < 0.0):
        return False
    y_max = float(np.max(np.abs(y), initial=0.0))
    if y_max == 0.0:
        return False
    a_max = float(abs(problem.a_hat).max()) if problem.a_hat.nnz else 0.0
    limit = dual_tol * y_max * max(a_max, np.finfo(float).tiny)
    g = problem.a_hat.T @ y
    bounded = np.isfinite(problem.lower)
    return not (np.any(g[bounded] > limit) or np.any(np.abs(g[~bounded]) > limit))


def verify_certificate(
    lp: LinearProgram,
    cert: FarkasCertificate,
    *,
    dual_tol: float = 1e-7,
    margin_tol: float = 1e-9,
) -> bool:
    """Check sign conditions, y.A ~ 0 (<= 0 on bounded columns) and a positive margin."""
    y = np.asarray(cert.y, dtype=float)
    if not check_dual(lp, y, dual_tol):
        return False
    problem = normalize(lp)
    margin = certificate_margin(lp, y)
    b_max = float(np.max(np.abs(problem.b_hat), initial=0.0))
    return margin > 0.0 and margin >= margin_tol * float(np.sum(np.abs(y))) * b_max


def solve_feasibility(lp: LinearProgram, config: FullNNConfig | None = None) -> SolveResult:
    """Classify ``lp`` as feasible, infeasible or ambiguous.

    FEASIBLE needs a point within ``tolerance.feasibility`` of every row and
    INFEASIBLE needs a certificate that passes ``verify_certificate``.
    Everything else is AMBIGUOUS, whatever the size of the residual: a
    residual far above 10x the tolerance without a verifiable certificate
    is still not reported as infeasible.
    """
    config = config or default_config()
    tol = config.tolerance
    backend = choose_backend(lp, config)
    problem = normalize(lp)
    logger.info(
        "solving %s: %d rows x %d vars with %s",
        lp.name or "lp", lp.n_rows, lp.n_vars, backend.name,
    )
    result = backend.phase1(problem)
    residual = row_residual(problem, result.x) if result.x is not None else float("inf")
    if residual <= tol.feasibility:
        logger.info("%s feasible (residual %.2e)", lp.name or "lp", residual)
        return SolveResult(
            SolveStatus.FEASIBLE, solution=result.x, iterations=result.iterations,
            residual=residual, phase1_value=result.value, backend=backend.name,
        )
    margin = float("nan")
    if result.y is not None:
        y = result.y / max(float(np.max(np.abs(result.y), initial=0.0)), np.finfo(float).tiny)
        cert = FarkasCertificate(y, tuple(lp.row_id(i) for i in range(lp.n_rows)))
        margin = certificate_margin(lp, y)
        if verify_certificate(
            lp, cert, dual_tol=tol.certificate_dual, margin_tol=tol.certificate_margin
        ):
            logger.info("%s infeasible (certificate margin %.3e)", lp.name or "lp", margin)
            return SolveResult(
                SolveStatus.INFEASIBLE, solution=result.x, certificate=cert,
                iterations=result.iterations, residual=residual,
                phase1_value=result.value, margin=margin, backend=backend.name,
            )
    logger.warning(
        "%s numerically ambiguous: residual %.3e, phase-1 value %.3e, margin %.3e",
        lp.name or "lp", residual, result.value, margin,
    )
    return SolveResult(
        SolveStatus.AMBIGUOUS, solution=result.x, iterations=result.iterations,
        residual=residual, phase1_value=result.value, margin=margin, backend=backend.name,
    )


def maximize(
    lp: LinearProgram,
    objective: Sequence[float] | np.ndarray | None = None,
    config: FullNNConfig | None = None,
) -> tuple[float, np.ndarray]:
    config = config or default_config()
    c = lp.objective if objective is None else np.asarray(objective, dtype=float)
    if c is None or c.shape != (lp.n_vars,):
        raise MalformedLPError("maximize needs an objective with one entry per variable")
    backend = choose_backend(lp, config)
    problem = normalize(lp)
    result = backend.maximize(problem, c)
    if result.status == "infeasible":
        raise LPInfeasibleError(f"{lp.name or 'lp'} is infeasible")
    if result.status == "unbounded":
        raise LPUnboundedError(f"{lp.name or 'lp'} is unbounded")
    if result.status != "optimal" or result.x is None:
        raise NumericalAmbiguityError(f"{lp.name or 'lp'}: solver stopped with {result.status}")
    residual = row_residual(problem, result.x)
    if residual > config.tolerance.feasibility:
        raise NumericalAmbiguityError(
            f"{lp.name or 'lp'}: optimum violates constraints by {residual:.3e}"
        )
    logger.info("%s optimum %.12g after %d pivots", lp.name or "lp", result.value, result.iterations)
    return result.value, result.x


def dump_lp(lp: LinearProgram) -> str:
    """Plain-text form for cross-checking with external solvers.

    ``fullnn-lp 1`` header, ``vars N``, ``bounds`` with one lower bound per
    variable (``-inf`` for free), then ``row <id> <rel> <rhs>`` lines each
    followed by ``  <col>:<coef>`` pairs, and an optional ``objective`` line.
    """
    lines = [f"fullnn-lp 1 {lp.name}".rstrip(), f"vars {lp.n_vars}"]
    lines.append("bounds " + " ".join(repr(float(v)) for v in lp.lower))
    matrix = lp.matrix.tocsr()
    for i in range(lp.n_rows):
        start, end = matrix.indptr[i], matrix.indptr[i + 1]
        pairs = " ".join(
            f"{int(j)}:{float(v)!r}" for j, v in zip(matrix.indices[start:end], matrix.data[start:end])
        )
        lines.append(f"row {lp.row_id(i)} {lp.relations[i].value} {float(lp.rhs[i])!r}")
        lines.append(f"  {pairs}")
    if lp.objective is not None:
        lines.append("objective " + " ".join(repr(float(v)) for v in lp.objective))
    return "\n".join(lines) + "\n"
