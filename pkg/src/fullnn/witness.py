"""Network Bell functionals and polynomial witness expressions.

Bilocal I_t reads Bob's 4-outcome index as bits (b0, b1) = divmod(index, 2).
The star I_t reads the central outcome as (b_1, ..., b_n), b_1 the most
significant bit, and takes t in 0..2**(n-1)-1 with t_1 its most significant
bit. For n = 2 the two readings are related by (b0, b1) = (b_1, b_1 xor b_2);
``bilocal_to_star`` applies that relabeling.
"""
from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import brentq

from fullnn.scenario import (
    Behavior,
    CorrelatorSpec,
    ScenarioMismatchError,
    behavior_new,
    bit_signs,
    correlator,
    is_bilocal,
    signs_pm,
    star_scenario,
    star_size,
    tetra_signs,
)

logger = logging.getLogger(__name__)


class Direction(str, Enum):
    LE = "le"
    GE = "ge"


@dataclass(frozen=True)
class WitnessTerm:
    coef: float
    factors: tuple[CorrelatorSpec, ...]

    def __post_init__(self) -> None:
        if not self.factors:
            raise ValueError("a witness term needs at least one factor")


@dataclass(frozen=True)
class WitnessExpr:
    terms: tuple[WitnessTerm, ...]
    bound: float
    direction: Direction = Direction.LE
    name: str = ""

    def is_violated(self, value: float, slack: float = 0.0) -> bool:
        if self.direction is Direction.LE:
            return value > self.bound + slack
        return value < self.bound - slack


@dataclass(frozen=True)
class WitnessResult:
    name: str
    value: float
    bound: float
    direction: Direction
    violated: bool


def evaluate(w: WitnessExpr, b: Behavior) -> float:
    """Sum over terms of coefficient times the product of its correlators."""
    total = 0.0
    for term in w.terms:
        product = term.coef
        for spec in term.factors:
            product *= correlator(b, spec)
        total += product
    return total


def eval_witness(w: WitnessExpr, b: Behavior) -> WitnessResult:
    value = evaluate(w, b)
    return WitnessResult(w.name, value, w.bound, w.direction, w.is_violated(value))


# ---------------------------------------------------------------------------
# JSON form
# ---------------------------------------------------------------------------


class WitnessTermDoc(BaseModel):
    coef: float
    factors: list[dict[str, dict[str, Any]]]


class WitnessExprDoc(BaseModel):
    name: str = ""
    terms: list[WitnessTermDoc] = Field(default_factory=list)
    bound: float
    dir: Direction = Direction.LE


def witness_to_doc(w: WitnessExpr) -> WitnessExprDoc:
    return WitnessExprDoc(
        name=w.name,
        terms=[
            WitnessTermDoc(coef=t.coef, factors=[f.to_json() for f in t.factors]) for t in w.terms
        ],
        bound=w.bound,
        dir=w.direction,
    )


def witness_from_doc(doc: WitnessExprDoc) -> WitnessExpr:
    terms = tuple(
        WitnessTerm(t.coef, tuple(CorrelatorSpec.from_json(f) for f in t.factors)) for t in doc.terms
    )
    return WitnessExpr(terms, doc.bound, doc.dir, doc.name)


# ---------------------------------------------------------------------------
# Bilocal and star functionals
# ---------------------------------------------------------------------------


def _require_bilocal(b: Behavior, bob_outputs: int, inputs: int) -> None:
    s = b.scenario
    if not is_bilocal(s) or s.parties[1].outputs != bob_outputs:
        raise ScenarioMismatchError(
            f"expected a bilocal scenario with {bob_outputs} Bob outcomes, got {s.shape}"
        )
    if s.parties[0].inputs != inputs or s.parties[2].inputs != inputs:
        raise ScenarioMismatchError(f"expected {inputs} inputs for Alice and Charlie")


def bilocal_I(b: Behavior, t: int) -> float:
    """I_t = 1/4 sum (-1)**(a + b_t + c + t(x + z)) p(a, b, c | x, z)."""
    if t not in (0, 1):
        raise ValueError(f"t must be 0 or 1, got {t}")
    _require_bilocal(b, 4, 2)
    bob = bit_signs(2 if t == 0 else 1, 4)
    total = 0.0
    for x in range(2):
        for z in range(2):
            spec = CorrelatorSpec.of({"A": (x, signs_pm()), "B": (0, bob), "C": (z, signs_pm())})
            total += (-1) ** (t * (x + z)) * correlator(b, spec)
    return total / 4


def s2(b: Behavior) -> float:
    return float(np.sqrt(abs(bilocal_I(b, 0))) + np.sqrt(abs(bilocal_I(b, 1))))


def bilocal_ns_sum(b: Behavior) -> float:
    """|I_0| + |I_1|, at most 1 for no-signaling sources."""
    return abs(bilocal_I(b, 0)) + abs(bilocal_I(b, 1))


@dataclass(frozen=True)
class StarIndex:
    n: int
    t: int

    def __post_init__(self) -> None:
        if self.n < 2 or not 0 <= self.t < 2 ** (self.n - 1):
            raise ValueError(f"t must lie in 0..{2 ** (self.n - 1) - 1} for n={self.n}")

    @property
    def bits(self) -> tuple[int, ...]:
        """(t_1, ..., t_{n-1}), t_1 the most significant bit."""
        m = self.n - 1
        return tuple((self.t >> (m - 1 - k)) & 1 for k in range(m))

    @property
    def t_tilde(self) -> tuple[int, ...]:
        return (1,) + self.bits

    @property
    def t_hat(self) -> tuple[int, ...]:
        return (sum(self.bits) % 2,) + self.bits


def star_indices(n: int) -> list[StarIndex]:
    return [StarIndex(n, t) for t in range(2 ** (n - 1))]


def star_I(b: Behavior, idx: StarIndex) -> float:
    n = star_size(b.scenario)
    if idx.n != n:
        raise ScenarioMismatchError(f"index for n={idx.n} used on a {n}-star")
    mask = sum(bit << (n - 1 - k) for k, bit in enumerate(idx.t_tilde))
    bob = bit_signs(mask, 2**n)
    total = 0.0
    for xs in np.ndindex(*(2,) * n):
        terms = {f"A{k + 1}": (xs[k], signs_pm()) for k in range(n)}
        terms["B"] = (0, bob)
        sign = (-1) ** sum(h * x for h, x in zip(idx.t_hat, xs))
        total += sign * correlator(b, CorrelatorSpec.of(terms))
    return total / 2**n


def star_I_all(b: Behavior) -> list[float]:
    n = star_size(b.scenario)
    return [star_I(b, idx) for idx in star_indices(n)]


def sn(b: Behavior, n: int) -> float:
    """S_n = 2**-(n-2) * sum_t |I_t|**(1/n)."""
    if star_size(b.scenario) != n:
        raise ScenarioMismatchError(f"behavior is not a {n}-star")
    values = np.abs(star_I_all(b))
    return float(np.sum(values ** (1.0 / n)) / 2 ** (n - 2))


def star_ns_sum(b: Behavior) -> float:
    """sum_t |I_t|, at most 1 for the 3-star with one classical source."""
    return float(np.sum(np.abs(star_I_all(b))))


def network_local_bound() -> float:
    """S_n <= 1 for every n when all sources are classical."""
    return 1.0


def full_nn_bound_s3() -> float:
    return 2 ** (1 / 3)


def full_nn_bound_s4() -> float:
    return float(np.sqrt(2))


def s3_nonfull_bound_grid(points: int = 48) -> float:
    """Max of 1/2 sum |I_i|**(1/3) over I_1 + ... + I_4 = 1 on a simplex grid."""
    i1, i2, i3 = np.meshgrid(*(np.arange(points + 1),) * 3, indexing="ij")
    i4 = points - i1 - i2 - i3
    keep = i4 >= 0
    stacked = np.stack([i1[keep], i2[keep], i3[keep], i4[keep]]) / points
    values = 0.5 * np.sum(np.cbrt(stacked), axis=0)
    return float(values.max())


def bilocal_to_star(b: Behavior) -> Behavior:
    """Relabel a binary-input bilocal behavior as a 2-star (A1 = A, A2 = C)."""
    _require_bilocal(b, 4, 2)
    data = np.zeros(star_scenario(2).shape)
    for s1 in range(2):
        for s2_bit in range(2):
            bilocal_b = 2 * s1 + (s1 ^ s2_bit)
            # bilocal axes: x, y, z, a, b, c ; star axes: x1, x2, y, a1, a2, b
            data[:, :, 0, :, :, 2 * s1 + s2_bit] = b.data[:, 0, :, :, bilocal_b, :]
    return behavior_new(star_scenario(2), data)


# ---------------------------------------------------------------------------
# Elegant-joint-measurement witnesses
# ---------------------------------------------------------------------------


def _spec(**parties: tuple[int, Sequence[float]]) -> CorrelatorSpec:
    return CorrelatorSpec.of(parties)


def _a(x: int) -> tuple[int, tuple[float, ...]]:
    return (x - 1, signs_pm())


def _b(y: int) -> tuple[int, tuple[float, ...]]:
    return (0, tetra_signs(y - 1))


def _term(coef: float, *factors: CorrelatorSpec) -> WitnessTerm:
    return WitnessTerm(coef, tuple(factors))


def ejm_witness_c_ns() -> WitnessExpr:
    """Violation rules out a classical Alice-Bob source with a no-signaling Bob-Charlie one."""
    a1b2c3 = _spec(A=_a(1), B=_b(2), C=_a(3))
    a2b2 = _spec(A=_a(2), B=_b(2))
    c3 = _spec(C=_a(3))
    a1b2 = _spec(A=_a(1), B=_b(2))
    a2b2c3 = _spec(A=_a(2), B=_b(2), C=_a(3))
    terms = (
        _term(-1.0, a1b2c3),
        _term(-1.0, a2b2),
        _term(1.0, c3, a1b2),
        _term(1.0, c3, a2b2c3),
        _term(1.0, c3, c3),
    )
    return WitnessExpr(terms, 1.0, Direction.LE, "ejm-c-ns")


def ejm_witness_ns_c() -> WitnessExpr:
    """Violation rules out a no-signaling Alice-Bob source with a classical Bob-Charlie one."""
    a1b2c3 = _spec(A=_a(1), B=_b(2), C=_a(3))
    b2c2 = _spec(B=_b(2), C=_a(2))
    a1 = _spec(A=_a(1))
    b2c3 = _spec(B=_b(2), C=_a(3))
    a1b2c2 = _spec(A=_a(1), B=_b(2), C=_a(2))
    terms = (
        _term(-1.0, a1b2c3),
        _term(1.0, b2c2),
        _term(1.0, a1, b2c3),
        _term(-1.0, a1, a1b2c2),
        _term(1.0, a1, a1),
    )
    return WitnessExpr(terms, 1.0, Direction.LE, "ejm-ns-c")


def ejm_witness_closed_form(theta: float, v: float) -> float:
    return 0.5 * v * (v + v * np.sin(theta) + np.cos(theta))


def v_crit(theta: float) -> float:
    return float(4.0 / (np.cos(theta) + np.sqrt(8.0 + 8.0 * np.sin(theta) + np.cos(theta) ** 2)))


def best_theta_for_visibility(v: float) -> float:
    return float(np.arctan(v))


def v_crit_numeric(theta: float, xtol: float = 1e-13) -> float:
    """Visibility where the first EJM witness reaches its bound, from Born-rule data."""
    from fullnn.quantum import ejm_correlations

    expr = ejm_witness_c_ns()

    def excess(v: float) -> float:
        return evaluate(expr, ejm_correlations(theta, v)) - expr.bound

    if excess(1.0) <= 0.0:
        return 1.0
    return float(brentq(excess, 0.0, 1.0, xtol=xtol, rtol=4 * np.finfo(float).eps))


# ---------------------------------------------------------------------------
# Partial Bell-state-measurement witnesses (ternary Bob)
# ---------------------------------------------------------------------------

BOB_B0 = (1.0, 1.0, -1.0)
BOB_B1 = (1.0, -1.0, 0.0)


def bsm_witness_exprs() -> tuple[WitnessExpr, WitnessExpr]:
    pm = signs_pm()

    def ab_c(x: int | None, bob: Sequence[float] | None, z: int | None) -> CorrelatorSpec:
        parties: dict[str, tuple[int, Iterable[float]]] = {}
        if x is not None:
            parties["A"] = (x, pm)
        if bob is not None:
            parties["B"] = (0, bob)
        if z is not None:
            parties["C"] = (z, pm)
        return CorrelatorSpec.of(parties)

    shared = (
        _term(2.0, ab_c(0, BOB_B1, 0)),
        _term(-2.0, ab_c(0, BOB_B1, 1)),
        _term(-1.0, ab_c(None, BOB_B0, None)),
    )
    c_ns = shared + (
        _term(2.0, ab_c(1, BOB_B0, 0)),
        _term(1.0, ab_c(1, BOB_B0, 1)),
        _term(1.0, ab_c(1, BOB_B0, None), ab_c(None, None, 1)),
        _term(1.0, ab_c(None, BOB_B0, 0), ab_c(None, None, 1)),
        _term(-1.0, ab_c(None, None, 0), ab_c(None, None, 1)),
    )
    ns_c = shared + (
        _term(1.0, ab_c(1, BOB_B0, 0)),
        _term(2.0, ab_c(1, BOB_B0, 1)),
        _term(1.0, ab_c(1, None, None), ab_c(1, BOB_B0, None)),
        _term(1.0, ab_c(1, None, None), ab_c(None, BOB_B0, 1)),
        _term(1.0, ab_c(1, None, None), ab_c(None, None, 0)),
        _term(-1.0, ab_c(1, None, None), ab_c(None, None, 1)),
        _term(-1.0, ab_c(1, None, None), ab_c(1, None, None)),
    )
    return (
        WitnessExpr(c_ns, 3.0, Direction.LE, "bsm-c-ns"),
        WitnessExpr(ns_c, 3.0, Direction.LE, "bsm-ns-c"),
    )


def bsm_witnesses(b: Behavior) -> tuple[float, float]:
    """(R_C-NS, R_NS-C); both above 3 flags full network nonlocality."""
    _require_bilocal(b, 3, 2)
    c_ns, ns_c = bsm_witness_exprs()
    return evaluate(c_ns, b), evaluate(ns_c, b)


def bsm_threshold() -> float:
    return float(np.sqrt(3 * np.sqrt(2) / 5))
