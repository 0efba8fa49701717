"""Simulation of EJM correlations with a classical Bob-Charlie source.

The classical variable lambda is uniform over four values and Charlie
answers deterministically, c = m[lambda, z] read from the tetrahedron. Alice
and Bob share an arbitrary no-signaling box q(a, b | x, lambda) with Bob's
"input" being lambda. The unknowns are the 96 entries of q.
"""
from __future__ import annotations

import logging

import numpy as np

from fullnn.core.config import FullNNConfig, default_config
from fullnn.inflation.bilocal import VariableLayout
from fullnn.lp.engine import solve_feasibility
from fullnn.lp.models import LinearProgram, LPBuilder, NumericalAmbiguityError, Relation, SolveStatus
from fullnn.quantum import ejm_correlations
from fullnn.scenario import TETRAHEDRON, Behavior, ScenarioMismatchError

logger = logging.getLogger(__name__)

N_LAMBDA = 4


class NonMonotoneFeasibilityError(RuntimeError):
    """Raised when feasibility along a visibility grid is not a prefix."""


def simulation_layout() -> VariableLayout:
    return VariableLayout(
        inputs=[("x", 3), ("lambda", N_LAMBDA)],
        outputs=[("a", 2), ("b", 4)],
    )


def _check_target(target: Behavior) -> None:
    if target.scenario.shape != (3, 1, 3, 2, 4, 2):
        raise ScenarioMismatchError(
            f"the simulation model needs the EJM scenario, got shape {target.scenario.shape}"
        )


def build_simulation_lp(target: Behavior) -> LinearProgram:
    _check_target(target)
    layout = simulation_layout()
    builder = LPBuilder(layout.n_vars, name="ejm-simulation")
    layout.add_normalization(builder)
    # the box is no-signaling both ways: b independent of x, a independent of lambda
    layout.add_no_signaling(builder, "x", "a")
    layout.add_no_signaling(builder, "lambda", "b")

    charlie = np.where(TETRAHEDRON > 0, 0, 1)  # m[lambda, z] as an output index
    data = target.data
    for x, z, a, b, c in np.ndindex(3, 3, 2, 4, 2):
        coeffs = {
            int(layout.ids[x, lam, a, b]): 1.0 / N_LAMBDA
            for lam in range(N_LAMBDA)
            if charlie[lam, z] == c
        }
        builder.add_row(
            coeffs, Relation.EQ, float(data[x, 0, z, a, b, c]), f"match[{a},{b},{c}|{x},{z}]"
        )
    return builder.build()


def _simulable(theta: float, v: float, config: FullNNConfig) -> bool:
    result = solve_feasibility(build_simulation_lp(ejm_correlations(theta, v)), config)
    if result.status is SolveStatus.AMBIGUOUS:
        raise NumericalAmbiguityError(
            f"simulation LP ambiguous at theta={theta:.6g}, v={v:.6g} (residual {result.residual:.3e})"
        )
    return result.feasible


def max_visibility_simulable(
    theta: float,
    tol: float | None = None,
    config: FullNNConfig | None = None,
) -> float:
    """Largest v in [0, 1] at which the simulation LP for p_theta^v is feasible."""
    config = config or default_config()
    if not 0.0 <= theta <= np.pi / 2 + 1e-12:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    tol = config.scan.bisection_tol if tol is None else tol
    if not tol > 0:
        raise ValueError("tol must be positive")

    grid = np.linspace(0.0, 1.0, config.scan.monotonicity_points)
    flags = [_simulable(theta, float(v), config) for v in grid]
    first_fail = next((i for i, ok in enumerate(flags) if not ok), len(flags))
    if any(flags[first_fail:]):
        raise NonMonotoneFeasibilityError(
            f"feasibility along v is not monotone at theta={theta:.6g}: "
            + ", ".join(f"{v:.2f}:{'F' if ok else 'I'}" for v, ok in zip(grid, flags))
        )
    if first_fail == len(flags):
        return 1.0
    if first_fail == 0:
        logger.warning("no simulable visibility at theta=%.6g", theta)
        return 0.0

    lo, hi = float(grid[first_fail - 1]), float(grid[first_fail])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _simulable(theta, mid, config):
            lo = mid
        else:
            hi = mid
        logger.debug("theta=%.6g bracket [%.6f, %.6f]", theta, lo, hi)
    logger.info("theta=%.6g: simulable up to v=%.6f", theta, lo)
    return lo
