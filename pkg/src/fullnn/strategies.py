"""Explicit non-full-network-nonlocal strategies.

Every construction enumerates its local variables and PR-box randomness
exactly, so the resulting behaviors are deterministic tables.
"""
from __future__ import annotations

import itertools
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from fullnn.scenario import (
    TETRAHEDRON,
    Behavior,
    Nature,
    Party,
    Scenario,
    ScenarioMismatchError,
    Source,
    behavior_new,
    bilocal_scenario,
    ejm_scenario,
    star_scenario,
)

logger = logging.getLogger(__name__)

# Per party, one XOR mask per input applied to the output index.
Flips = Mapping[str, Sequence[int]]


def pr_box_table() -> np.ndarray:
    """p(o1, o2 | i1, i2) indexed [i1, i2, o1, o2]."""
    table = np.zeros((2, 2, 2, 2))
    for i1, i2, o1 in itertools.product(range(2), repeat=3):
        table[i1, i2, o1, o1 ^ (i1 * i2)] = 0.5
    return table


def pr_box() -> Behavior:
    scenario = Scenario(
        (Party("P1", 2, 2), Party("P2", 2, 2)),
        (Source((0, 1), Nature.NO_SIGNALING),),
    )
    return behavior_new(scenario, pr_box_table())


def chsh(b: Behavior) -> float:
    """sum_{i1,i2} (-1)**(i1 i2) E(i1, i2) for a binary bipartite behavior."""
    if b.scenario.shape != (2, 2, 2, 2):
        raise ScenarioMismatchError("CHSH needs two parties with binary inputs and outputs")
    signs = np.array([1.0, -1.0])
    value = 0.0
    for i1, i2 in itertools.product(range(2), repeat=2):
        value += (-1) ** (i1 * i2) * float(signs @ b.data[i1, i2] @ signs)
    return value


@dataclass(frozen=True)
class LocalStrategy:
    """A shared local variable with per-party response tables.

    ``responses[name]`` is indexed [lambda, input, output].
    """

    p_lambda: np.ndarray = field(repr=False)
    responses: Mapping[str, np.ndarray] = field(repr=False)

    def __post_init__(self) -> None:
        p = np.asarray(self.p_lambda, dtype=float)
        if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("p_lambda must be a probability vector")
        for name, table in self.responses.items():
            table = np.asarray(table, dtype=float)
            if table.ndim != 3 or table.shape[0] != p.size:
                raise ValueError(f"response table of {name!r} must be [lambda, input, output]")
            if np.any(table < 0) or np.max(np.abs(table.sum(axis=2) - 1.0)) > 1e-12:
                raise ValueError(f"response table of {name!r} is not a conditional distribution")

    def behavior(self, scenario: Scenario) -> Behavior:
        n = scenario.n_parties
        data = np.zeros(scenario.shape)
        for lam, weight in enumerate(np.asarray(self.p_lambda, dtype=float)):
            if weight == 0.0:
                continue
            block = np.ones(())
            for party in scenario.parties:
                table = np.asarray(self.responses[party.name], dtype=float)[lam]
                block = np.multiply.outer(block, table)
            # block axes alternate (input, output) per party; reorder to inputs then outputs
            order = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
            data += weight * np.transpose(block, order)
        return behavior_new(scenario, data)


def deterministic_response(outputs_by_input: Sequence[Sequence[int]], outputs: int) -> np.ndarray:
    """Response table [lambda, input, output] from explicit output choices."""
    lams = len(outputs_by_input)
    inputs = len(outputs_by_input[0])
    table = np.zeros((lams, inputs, outputs))
    for lam, row in enumerate(outputs_by_input):
        for x, o in enumerate(row):
            table[lam, x, o] = 1.0
    return table


def apply_flips(b: Behavior, flips: Flips | None) -> Behavior:
    """Relabel outputs o -> o xor mask[x] per party and input."""
    if not flips:
        return b
    scenario = b.scenario
    n = scenario.n_parties
    data = np.array(b.data, copy=True)
    for name, masks in flips.items():
        k = scenario.index(name)
        party = scenario.parties[k]
        if len(masks) != party.inputs:
            raise ScenarioMismatchError(f"{name!r} needs one flip mask per input")
        for x, mask in enumerate(masks):
            perm = [o ^ int(mask) for o in range(party.outputs)]
            if max(perm) >= party.outputs:
                raise ScenarioMismatchError(f"flip mask {mask} leaves the outputs of {name!r}")
            index: list[object] = [slice(None)] * (2 * n)
            index[k] = x
            view = data[tuple(index)]
            data[tuple(index)] = np.take(view, perm, axis=n - 1 + k)
    return behavior_new(scenario, data)


def bilocal_pr_family(p_lambda: float, flips: Flips | None = None) -> Behavior:
    """Classical bit lambda (P(lambda = 1) = p_lambda) for Alice-Bob, a PR box for Bob-Charlie.

    Alice outputs a = x lambda; Bob feeds lambda into the box and outputs
    b0 = b1 = b'. Without flips this gives (I0, I1) = (1 - p_lambda, p_lambda).
    """
    if not 0.0 <= p_lambda <= 1.0:
        raise ValueError(f"p_lambda must lie in [0, 1], got {p_lambda}")
    scenario = bilocal_scenario(2, 2, 4, (Nature.CLASSICAL, Nature.NO_SIGNALING))
    data = np.zeros(scenario.shape)
    for lam, weight in ((0, 1.0 - p_lambda), (1, p_lambda)):
        for r, x, z in itertools.product(range(2), repeat=3):
            a = x * lam
            box_out = r
            c = r ^ (lam * z)
            data[x, 0, z, a, 3 * box_out, c] += 0.5 * weight
    return apply_flips(behavior_new(scenario, data), flips)


def bilocal_pr_strategy() -> Behavior:
    return bilocal_pr_family(0.5)


def star_single_pr_strategy(n: int) -> Behavior:
    """Branch 1 shares a PR box with the center; every other source is a uniform bit.

    Branch k >= 2 outputs x_k lambda_k, the center feeds the parity of the
    lambdas into the box and reports its output as b_1 (other bits 0).
    """
    natures = [Nature.NO_SIGNALING] + [Nature.CLASSICAL] * (n - 1)
    scenario = star_scenario(n, natures)
    data = np.zeros(scenario.shape)
    weight = 0.5 ** n  # (n - 1) lambdas and one box bit
    for lams in itertools.product(range(2), repeat=n - 1):
        parity = sum(lams) % 2
        for r in range(2):
            for xs in itertools.product(range(2), repeat=n):
                outs = [r ^ (xs[0] * parity)] + [xs[k] * lams[k - 1] for k in range(1, n)]
                b = r << (n - 1)
                data[tuple(xs) + (0,) + tuple(outs) + (b,)] += weight
    return behavior_new(scenario, data)


def three_star_tetra_strategy(p_lambda: Sequence[float], flips: Flips | None = None) -> Behavior:
    """Two PR boxes (branches 1, 2) and a two-bit local variable (branch 3).

    ``p_lambda`` is indexed by 2*lambda_1 + lambda_2. Deterministic lambda
    puts all weight on I_t with t = (lambda_2, lambda_1 xor lambda_2).
    """
    p = np.asarray(p_lambda, dtype=float)
    if p.shape != (4,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("p_lambda must be a distribution over four values")
    natures = [Nature.NO_SIGNALING, Nature.NO_SIGNALING, Nature.CLASSICAL]
    scenario = star_scenario(3, natures)
    data = np.zeros(scenario.shape)
    for lam, weight in enumerate(p):
        if weight == 0.0:
            continue
        l1, l2 = divmod(lam, 2)
        for r1, r2 in itertools.product(range(2), repeat=2):
            for x1, x2, x3 in itertools.product(range(2), repeat=3):
                a1 = r1 ^ (x1 * l1)
                a2 = r2 ^ (x2 * l2)
                a3 = (l1 ^ l2) * x3
                b = (r1 ^ r2) << 2
                data[x1, x2, x3, 0, a1, a2, a3, b] += 0.25 * weight
    return apply_flips(behavior_new(scenario, data), flips)


# ---------------------------------------------------------------------------
# Simulation models: no-signaling Alice-Bob source, classical Bob-Charlie source
# ---------------------------------------------------------------------------


def tetra_charlie_response() -> np.ndarray:
    """p(c | z, lambda) = delta(c, m[lambda, z]) as [lambda, z, c]."""
    table = np.zeros((4, 3, 2))
    for lam, z in itertools.product(range(4), range(3)):
        table[lam, z, 0 if TETRAHEDRON[lam, z] > 0 else 1] = 1.0
    return table


def hybrid_ejm_behavior(ab_table: np.ndarray, p_lambda: Sequence[float] | None = None) -> Behavior:
    """p(a,b,c|x,z) = sum_lambda p(lambda) p(c|z,lambda) p(a,b|x,lambda).

    ``ab_table`` is indexed [lambda, x, a, b].
    """
    weights = np.full(4, 0.25) if p_lambda is None else np.asarray(p_lambda, dtype=float)
    probs = np.einsum("l,lxab,lzc->xzabc", weights, ab_table, tetra_charlie_response())
    return behavior_new(ejm_scenario().with_sources((Nature.NO_SIGNALING, Nature.CLASSICAL)),
                        probs[:, None, :, :, :, :])


def theta0_ab_table() -> np.ndarray:
    table = np.zeros((4, 3, 2, 4))
    for lam, x in itertools.product(range(4), range(3)):
        a_match = 0 if TETRAHEDRON[lam, x] > 0 else 1
        table[lam, x, a_match, :] = 1 / 8
        table[lam, x, 1 - a_match, lam] = 1 / 2
    return table


def theta_pi2_ab_table() -> np.ndarray:
    table = np.zeros((4, 3, 2, 4))
    for lam, x, b in itertools.product(range(4), range(3), range(4)):
        l0, l1 = divmod(lam, 2)
        b0, b1 = divmod(b, 2)
        if x == 0:
            a = b1 ^ l0 ^ l1 ^ 1
        elif x == 1:
            a = b0 ^ b1 ^ l0 ^ 1
        else:
            a = b0 ^ l1 ^ 1
        table[lam, x, a, b] = 1 / 4
    return table


def _check_ab_table(table: np.ndarray) -> None:
    sums = table.sum(axis=(2, 3))
    if np.max(np.abs(sums - 1.0)) > 1e-12:
        raise ValueError("simulation table is not normalized per (x, lambda)")


def simulate_theta0() -> Behavior:
    table = theta0_ab_table()
    _check_ab_table(table)
    return hybrid_ejm_behavior(table)


def simulate_theta_pi2() -> Behavior:
    table = theta_pi2_ab_table()
    _check_ab_table(table)
    return hybrid_ejm_behavior(table)
