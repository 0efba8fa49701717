"""HiGHS backend through ``scipy.optimize.linprog`` for programs too large for a dense tableau."""
from __future__ import annotations

import logging

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from fullnn.lp.models import NormalizedLP
from fullnn.lp.simplex import MaximizeResult, Phase1Result

logger = logging.getLogger(__name__)

HIGHS_OPTIONS = {
    "presolve": True,
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


def _bounds(lower: np.ndarray) -> list[tuple[float | None, None]]:
    return [(float(l) if np.isfinite(l) else None, None) for l in lower]


def solve_phase1(problem: NormalizedLP) -> Phase1Result:
    """Elastic program: min sum(s) with a_eq x + s+ - s- = b_eq and a_ge x + s >= b_ge.

    The multipliers are the sensitivities of the optimum to b_hat: equality
    marginals directly, inequality marginals negated (rows enter linprog as
    -a x - s <= -b).
    """
    a = problem.a_hat
    m, n = problem.shape
    eq_rows = np.flatnonzero(problem.is_eq)
    ge_rows = np.flatnonzero(~problem.is_eq)
    n_eq, n_ge = eq_rows.size, ge_rows.size
    n_total = n + 2 * n_eq + n_ge
    cost = np.concatenate([np.zeros(n), np.ones(2 * n_eq + n_ge)])
    bounds = _bounds(problem.lower) + [(0.0, None)] * (2 * n_eq + n_ge)

    a_eq = b_eq = a_ub = b_ub = None
    if n_eq:
        eye = sparse.identity(n_eq, format="csr")
        a_eq = sparse.hstack(
            [a[eq_rows], eye, -eye, sparse.csr_array((n_eq, n_ge))], format="csr"
        )
        b_eq = problem.b_hat[eq_rows]
    if n_ge:
        eye = sparse.identity(n_ge, format="csr")
        a_ub = sparse.hstack(
            [-a[ge_rows], sparse.csr_array((n_ge, 2 * n_eq)), -eye], format="csr"
        )
        b_ub = -problem.b_hat[ge_rows]

    logger.debug("HiGHS phase 1: %d rows, %d columns", m, n_total)
    res = linprog(
        cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
        bounds=bounds, method="highs", options=HIGHS_OPTIONS,
    )
    iterations = int(getattr(res, "nit", 0) or 0)
    if res.status != 0:
        logger.warning("HiGHS phase 1 ended with status %s: %s", res.status, res.message)
        return Phase1Result(None, float("nan"), None, iterations, "failed")
    y = np.zeros(m)
    if n_eq:
        y[eq_rows] = res.eqlin.marginals
    if n_ge:
        y[ge_rows] = np.maximum(-res.ineqlin.marginals, 0.0)
    return Phase1Result(np.asarray(res.x[:n]), float(res.fun), y, iterations)


def maximize(problem: NormalizedLP, objective: np.ndarray) -> MaximizeResult:
    a = problem.a_hat
    eq_rows = np.flatnonzero(problem.is_eq)
    ge_rows = np.flatnonzero(~problem.is_eq)
    res = linprog(
        -np.asarray(objective, dtype=float),
        A_ub=-a[ge_rows] if ge_rows.size else None,
        b_ub=-problem.b_hat[ge_rows] if ge_rows.size else None,
        A_eq=a[eq_rows] if eq_rows.size else None,
        b_eq=problem.b_hat[eq_rows] if eq_rows.size else None,
        bounds=_bounds(problem.lower),
        method="highs",
        options=HIGHS_OPTIONS,
    )
    iterations = int(getattr(res, "nit", 0) or 0)
    if res.status == 2:
        return MaximizeResult("infeasible", iterations=iterations)
    if res.status == 3:
        return MaximizeResult("unbounded", iterations=iterations)
    if res.status != 0:
        logger.warning("HiGHS ended with status %s: %s", res.status, res.message)
        return MaximizeResult("failed", iterations=iterations)
    x = np.asarray(res.x)
    return MaximizeResult("optimal", x, float(np.asarray(objective) @ x), iterations)
