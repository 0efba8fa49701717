"""Bounds on pairs of 3-star functionals over the relaxed no-signaling set.

Branches A1 and A2 keep binary inputs; the third branch is absorbed into a
local variable, so only A1, A2 and the central party B (fixed input, eight
outcomes) remain. The independence of A1 and A2 is relaxed: only positivity,
normalization and no-signaling constrain p(a1, a2, b | x1, x2).
"""
from __future__ import annotations

import itertools
import logging
from enum import Enum

import numpy as np

from fullnn.core.config import FullNNConfig
from fullnn.inflation.bilocal import VariableLayout
from fullnn.lp.engine import maximize
from fullnn.lp.models import LinearProgram, LPBuilder

logger = logging.getLogger(__name__)

SIGN_CHOICES = tuple(itertools.product((1, -1), repeat=2))


class NSExpression(str, Enum):
    T1 = "T1"
    T2 = "T2"


# Each expression is |inner_1| + |inner_2|. An inner sum is
# sum_{x1,x2} (-1)**(h1 x1 + h2 x2) <A1_x1 A2_x2 B_mask>, with B's sign map
# (-1)**popcount(b & mask) over the bits (b1, b2, b3), b1 most significant.
_INNERS: dict[NSExpression, tuple[tuple[int, tuple[int, int]], ...]] = {
    NSExpression.T1: ((0b100, (0, 0)), (0b110, (1, 1))),
    NSExpression.T2: ((0b101, (1, 0)), (0b111, (0, 1))),
}


def ns_layout() -> VariableLayout:
    return VariableLayout(
        inputs=[("x1", 2), ("x2", 2)],
        outputs=[("a1", 2), ("a2", 2), ("b", 8)],
    )


def inner_coefficients(mask: int, hat: tuple[int, int]) -> np.ndarray:
    """Coefficient tensor [x1, x2, a1, a2, b] of one inner sum."""
    coeffs = np.zeros(ns_layout().shape)
    for x1, x2, a1, a2, b in np.ndindex(*coeffs.shape):
        parity = a1 + a2 + bin(b & mask).count("1") + hat[0] * x1 + hat[1] * x2
        coeffs[x1, x2, a1, a2, b] = (-1) ** parity
    return coeffs


def ns_polytope_program(expr: NSExpression | str, signs: tuple[int, int] = (1, 1)) -> LinearProgram:
    """One of the four sign programs: maximise s1 inner_1 + s2 inner_2."""
    expr = NSExpression(expr)
    if tuple(signs) not in SIGN_CHOICES:
        raise ValueError(f"signs must be a pair of +1/-1, got {signs}")
    layout = ns_layout()
    builder = LPBuilder(layout.n_vars, name=f"ns-polytope-{expr.value}")
    layout.add_normalization(builder)
    layout.add_no_signaling(builder, "x1", "a1")
    layout.add_no_signaling(builder, "x2", "a2")
    objective = sum(
        s * inner_coefficients(mask, hat) for s, (mask, hat) in zip(signs, _INNERS[expr])
    )
    return builder.build(objective=np.asarray(objective, dtype=float).reshape(-1))


def ns_polytope_value(expr: NSExpression | str, config: FullNNConfig | None = None) -> float:
    """max over sign choices, which is the maximum of |inner_1| + |inner_2|."""
    best = -np.inf
    for signs in SIGN_CHOICES:
        value, _ = maximize(ns_polytope_program(expr, signs), config=config)
        logger.debug("%s signs %s: %.12g", expr, signs, value)
        best = max(best, value)
    return float(best)
