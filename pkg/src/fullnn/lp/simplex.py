"""Embedded dense two-phase simplex with Bland's anti-cycling rule.

The program is brought to standard form: lower-bounded variables are
shifted to zero, free variables are split, every >= row gets a surplus
column, rows are sign-flipped to a nonnegative right-hand side and each row
receives an artificial column. Phase 1 minimises the sum of artificials; its
dual is read from the final tableau's artificial block and mapped back to the
normalized rows as a Farkas multiplier vector.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from fullnn.lp.models import NormalizedLP

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-11
COST_TOL = 1e-11


@dataclass
class Phase1Result:
    x: np.ndarray | None = field(repr=False)
    value: float
    y: np.ndarray | None = field(repr=False)
    iterations: int
    status: str = "optimal"


@dataclass
class MaximizeResult:
    status: str
    x: np.ndarray | None = field(default=None, repr=False)
    value: float = float("nan")
    iterations: int = 0


@dataclass
class _Standard:
    table: np.ndarray       # m x (N + m + 1); last column is the right-hand side
    basis: np.ndarray       # basic column per row
    n_struct: int           # N: shifted/split variables plus surplus columns
    tau: np.ndarray         # row sign flips
    col_source: list[tuple[int, float]]  # structural column -> (original var, sign)
    shift: np.ndarray       # lower bounds used for the shift (0 for free vars)
    n_orig: int


def _standard_form(problem: NormalizedLP) -> _Standard:
    a = problem.a_hat.toarray()
    m, n = a.shape
    lower = problem.lower
    bounded = np.isfinite(lower)
    shift = np.where(bounded, lower, 0.0)
    b = problem.b_hat - a @ shift

    columns: list[np.ndarray] = []
    col_source: list[tuple[int, float]] = []
    for j in range(n):
        columns.append(a[:, j])
        col_source.append((j, 1.0))
        if not bounded[j]:
            columns.append(-a[:, j])
            col_source.append((j, -1.0))
    for i in np.flatnonzero(~problem.is_eq):
        surplus = np.zeros(m)
        surplus[i] = -1.0
        columns.append(surplus)
        col_source.append((-1, 0.0))
    struct = np.column_stack(columns) if columns else np.zeros((m, 0))
    tau = np.where(b < 0, -1.0, 1.0)
    struct = struct * tau[:, None]
    b = b * tau
    n_struct = struct.shape[1]
    table = np.hstack([struct, np.eye(m), b[:, None]])
    basis = np.arange(n_struct, n_struct + m)
    return _Standard(table, basis, n_struct, tau, col_source, shift, n)


def _pivot(table: np.ndarray, cost: np.ndarray, row: int, col: int) -> None:
    table[row] /= table[row, col]
    factors = table[:, col].copy()
    factors[row] = 0.0
    table -= np.outer(factors, table[row])
    cost -= cost[col] * table[row]


def _bland(
    table: np.ndarray,
    cost: np.ndarray,
    basis: np.ndarray,
    allowed: int,
    max_iterations: int,
) -> tuple[str, int]:
    """Minimise with reduced-cost row ``cost`` (last entry = -objective)."""
    iterations = 0
    while True:
        candidates = np.flatnonzero(cost[:allowed] < -COST_TOL)
        if candidates.size == 0:
            return "optimal", iterations
        if iterations >= max_iterations:
            return "iteration_limit", iterations
        col = int(candidates[0])
        column = table[:, col]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            return "unbounded", iterations
        ratios = table[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = int(ties[np.argmin(basis[ties])])
        _pivot(table, cost, row, col)
        basis[row] = col
        iterations += 1


def _recover_x(std: _Standard) -> np.ndarray:
    values = np.zeros(std.table.shape[1] - 1)
    values[std.basis] = std.table[:, -1]
    x = std.shift.copy()
    for k, (j, sign) in enumerate(std.col_source):
        if j >= 0:
            x[j] += sign * values[k]
    return x


def solve_phase1(problem: NormalizedLP, max_iterations: int = 200_000) -> Phase1Result:
    std = _standard_form(problem)
    m = std.table.shape[0]
    n_struct = std.n_struct
    # reduced costs for c = (0, ..., 0, 1, ..., 1) with the artificial basis
    cost = np.zeros(std.table.shape[1])
    cost[n_struct:n_struct + m] = 1.0
    cost -= std.table.sum(axis=0)
    status, iterations = _bland(std.table, cost, std.basis, n_struct, max_iterations)
    logger.debug("phase 1 finished: %s after %d pivots (%d x %d)", status, iterations, m, n_struct)
    if status == "iteration_limit":
        return Phase1Result(None, float("nan"), None, iterations, status)
    value = float(-cost[-1])
    # dual of the flipped rows: u = c_B B^-1, with B^-1 held in the artificial block
    c_basis = (std.basis >= n_struct).astype(float)
    u = c_basis @ std.table[:, n_struct:n_struct + m]
    y = std.tau * u
    return Phase1Result(_recover_x(std), value, y, iterations, status)


def maximize(
    problem: NormalizedLP,
    objective: np.ndarray,
    max_iterations: int = 200_000,
) -> MaximizeResult:
    std = _standard_form(problem)
    table = std.table
    m = table.shape[0]
    n_struct = std.n_struct
    cost = np.zeros(table.shape[1])
    cost[n_struct:n_struct + m] = 1.0
    cost -= table.sum(axis=0)
    status, it1 = _bland(table, cost, std.basis, n_struct, max_iterations)
    if status != "optimal":
        return MaximizeResult("iteration_limit", iterations=it1)
    if -cost[-1] > 1e-9 * max(1.0, float(np.abs(problem.b_hat).max(initial=0.0))):
        return MaximizeResult("infeasible", iterations=it1)

    # drive zero-level artificials out of the basis; rows that cannot pivot are redundant
    keep_rows = np.ones(m, dtype=bool)
    scratch = np.zeros(table.shape[1])
    for row in range(m):
        if std.basis[row] < n_struct:
            continue
        nonzero = np.flatnonzero(np.abs(table[row, :n_struct]) > 1e-9)
        if nonzero.size:
            col = int(nonzero[0])
            _pivot(table, scratch, row, col)
            std.basis[row] = col
        else:
            keep_rows[row] = False
    table = np.hstack([table[keep_rows, :n_struct], table[keep_rows, -1:]])
    basis = std.basis[keep_rows]
    std.table, std.basis = table, basis

    c_struct = np.zeros(n_struct)
    for k, (j, sign) in enumerate(std.col_source):
        if j >= 0:
            c_struct[k] = sign * objective[j]
    # minimise -c: reduced costs r = -c + c_B B^-1 A
    cost = np.zeros(n_struct + 1)
    cost[:n_struct] = -c_struct
    c_b = -c_struct[basis]
    cost[:n_struct] -= c_b @ table[:, :n_struct]
    cost[-1] = -(c_b @ table[:, -1])
    status, it2 = _bland(table, cost, basis, n_struct, max_iterations)
    iterations = it1 + it2
    if status != "optimal":
        return MaximizeResult(status, iterations=iterations)
    x = _recover_x(std)
    return MaximizeResult("optimal", x, float(objective @ x), iterations)
